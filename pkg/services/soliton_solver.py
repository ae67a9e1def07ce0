"""
대수적 Ricci soliton 판정 모듈

1) nilsoliton 방정식 Ric = cI + D (D ∈ Der) 최소제곱 풀이
2) 좌불변 벡터장 soliton 방정식 -2Ric = 2λg + L_X g 풀이
3) 3차원 비단모듈 대수의 Milnor 틀
4) soliton 유형 분류 (expanding / steady / shrinking)
5) gradient soliton 장애 판정

부호 규약: σ(t) = 1 + 2λt, λ > 0 이면 expanding.
nilsoliton 과의 연결은 λ = -c 이고, 벡터장 X 는 exp(-tD) 가 생성하는 장으로
L_X g = -2·g·D_sym 이 된다.
"""

import logging
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.linalg import null_space

from services.errors import InconsistencyError, PreconditionError
from services.lie_core import (
    ad,
    change_basis,
    derivation_algebra,
    is_unimodular,
    lower_central_series,
    trace_form,
)
from services.metric_geometry import (
    MetricLieAlgebra,
    curvature,
    divergence_left_invariant,
    euclidean_factor,
    lie_derivative_metric,
    subspace_frame,
)
from services.settings import Tolerances, default_tolerances

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    NILSOLITON = "nilsoliton"
    LEFT_INVARIANT_FIELD = "left-invariant-field"
    EINSTEIN = "einstein"
    INFEASIBLE = "infeasible"
    AMBIGUOUS = "ambiguous"


class SolitonType(str, Enum):
    EXPANDING = "expanding"
    STEADY = "steady"
    SHRINKING = "shrinking"
    TRIVIAL = "trivial"


FEASIBLE_VERDICTS = (Verdict.NILSOLITON, Verdict.LEFT_INVARIANT_FIELD, Verdict.EINSTEIN)


@dataclass(frozen=True)
class SolitonCertificate:
    """
    soliton 판정 결과

    c, D: nilsoliton 상수와 미분 (verdict=nilsoliton)
    X, lam: 좌불변 벡터장과 λ (verdict=left-invariant-field / einstein)
    residual: 최소제곱 Frobenius 잔차
    scalar: 초기 스칼라 곡률 R0
    consistent: 부호 규칙 sign(R0) = -sign(λ) 만족 여부
    """

    verdict: Verdict
    residual: float
    scalar: float
    soliton_type: SolitonType | None = None
    c: float | None = None
    D: np.ndarray | None = None
    X: np.ndarray | None = None
    lam: float | None = None
    consistent: bool = True

    @property
    def is_feasible(self) -> bool:
        return self.verdict in FEASIBLE_VERDICTS


@dataclass(frozen=True)
class MilnorFrame:
    alpha: float
    beta: float
    gamma: float
    delta: float
    frame: np.ndarray  # 열이 새 정규직교 기저 (e1, e2, e3)


@dataclass(frozen=True)
class SolitonClassification:
    soliton_type: SolitonType
    consistent: bool


@dataclass(frozen=True)
class GradientReport:
    ricci_nondegenerate: bool
    flat_factor_dim: int
    verdict: str  # "not-gradient" 또는 "inconclusive"


def _decide(residual: float, tol: Tolerances) -> Verdict | None:
    """잔차 구간 판정: 실현가능이면 None, 아니면 INFEASIBLE / AMBIGUOUS"""
    if residual <= tol.tol_sol:
        return None
    if residual > 10.0 * tol.tol_sol:
        return Verdict.INFEASIBLE
    logger.warning(f"잔차 {residual:.3e} 가 판정 여유 구간 (tol_sol, 10·tol_sol] 에 있습니다")
    return Verdict.AMBIGUOUS


def _sign(value: float, eps: float) -> int:
    if value > eps:
        return 1
    if value < -eps:
        return -1
    return 0


def classify_soliton_type(
    scalar: float, lam: float, tol: Tolerances | None = None
) -> SolitonClassification:
    """
    λ 의 부호로 soliton 유형을 정하고 sign(R0) = -sign(λ) 규칙을 확인한다.

    Args:
        scalar: 초기 스칼라 곡률 R0
        lam: soliton 상수 λ

    Returns:
        SolitonClassification (규칙 위반 시 consistent=False)
    """
    tol = tol or default_tolerances()
    lam_sign = _sign(lam, tol.tol_rank)
    if lam_sign > 0:
        soliton_type = SolitonType.EXPANDING
    elif lam_sign < 0:
        soliton_type = SolitonType.SHRINKING
    else:
        soliton_type = SolitonType.STEADY

    consistent = _sign(scalar, tol.tol_rank) == -lam_sign
    if not consistent:
        logger.warning(f"부호 규칙 위반: R0={scalar:.6g}, λ={lam:.6g} ({soliton_type.value})")
    return SolitonClassification(soliton_type=soliton_type, consistent=consistent)


def scalar_evolution(scalar0: float, lam: float, t) -> np.ndarray:
    """soliton 위의 스칼라 곡률 R(t) = R0 / (1 + 2λt)"""
    return scalar0 / (1.0 + 2.0 * lam * np.asarray(t, dtype=float))


def scalar_evolution_rate(scalar, scalar0: float, lam: float) -> np.ndarray:
    """
    같은 법칙의 ODE 형태 dR/dt = -2λR^2 / R0

    Raises:
        PreconditionError: R0 = 0 (법칙이 퇴화)
    """
    if scalar0 == 0:
        raise PreconditionError("scalar evolution ODE needs nonzero initial scalar curvature")
    scalar = np.asarray(scalar, dtype=float)
    return -2.0 * lam * scalar ** 2 / scalar0


# ── nilsoliton ──


def solve_nilsoliton(mla: MetricLieAlgebra, tol: Tolerances | None = None) -> SolitonCertificate:
    """
    Ric = cI + D (D ∈ Der) 를 최소제곱으로 푼다.

    min_{c, d} ‖ricci_endo - cI - Σ d_m B_m‖_F, {B_m} 는 Der 의 기저.

    Raises:
        PreconditionError: 멱영이 아닌 대수
    """
    tol = tol or default_tolerances()
    alg = mla.alg
    if not lower_central_series(alg, tol).is_nilpotent:
        raise PreconditionError("nilsoliton equation requires nilpotent algebra")

    curv = curvature(mla)
    n = mla.dim
    ric = curv.ricci_endo

    if np.sqrt(curv.ricci_norm_sq) <= tol.tol_alg:
        # 평탄 (가환) : Ric = 0 은 자명한 Einstein
        logger.info(f"{mla.name}: Ricci 평탄 → 자명한 Einstein")
        return SolitonCertificate(
            verdict=Verdict.EINSTEIN,
            residual=float(np.sqrt(curv.ricci_norm_sq)),
            scalar=curv.scalar,
            soliton_type=SolitonType.TRIVIAL,
            c=0.0,
            D=np.zeros((n, n)),
            X=np.zeros(n),
            lam=0.0,
        )

    der = derivation_algebra(alg, tol)
    columns = [np.eye(n).ravel()] + [B.ravel() for B in der.basis]
    A = np.stack(columns, axis=1)
    coeffs, *_ = np.linalg.lstsq(A, ric.ravel(), rcond=None)
    residual = float(np.linalg.norm(A @ coeffs - ric.ravel()))

    c = float(coeffs[0])
    D = der.combine(coeffs[1:])
    logger.debug(f"{mla.name}: nilsoliton 최소제곱 c={c:.9g}, 잔차={residual:.3e}")

    rejected = _decide(residual, tol)
    if rejected is not None:
        return SolitonCertificate(
            verdict=rejected, residual=residual, scalar=curv.scalar, c=c, D=D, lam=-c
        )

    cls = classify_soliton_type(curv.scalar, -c, tol)
    logger.info(f"{mla.name}: nilsoliton c={c:.6g}, λ={-c:.6g} ({cls.soliton_type.value})")
    return SolitonCertificate(
        verdict=Verdict.NILSOLITON,
        residual=residual,
        scalar=curv.scalar,
        soliton_type=cls.soliton_type,
        c=c,
        D=D,
        lam=-c,
        consistent=cls.consistent,
    )


def symmetrize_derivation(mla: MetricLieAlgebra, D) -> np.ndarray:
    """g-대칭 부분 D_sym = ½(D + g^{-1} D^T g)"""
    g = mla.metric
    D = np.asarray(D, dtype=float)
    return 0.5 * (D + np.linalg.solve(g, D.T @ g))


def automorphism_field_residual(mla: MetricLieAlgebra, certificate: SolitonCertificate) -> float:
    """
    nilsoliton (c, D) 로부터 만든 자기동형 흐름 벡터장이 soliton 항등식을 만족하는지 확인한다.

    ‖-2Ric - 2λg - L_X g‖,  λ = -c,  L_X g = -2·g·D_sym
    """
    if certificate.c is None or certificate.D is None:
        raise PreconditionError("certificate carries no (c, D) pair")
    g = mla.metric
    lam = -certificate.c
    lie_x = -2.0 * g @ symmetrize_derivation(mla, certificate.D)
    ric_form = curvature(mla).ricci_form
    return float(np.linalg.norm(-2.0 * ric_form - 2.0 * lam * g - lie_x))


# ── 좌불변 벡터장 soliton ──


def solve_left_invariant_field(
    mla: MetricLieAlgebra, tol: Tolerances | None = None
) -> SolitonCertificate:
    """
    -2·Ric = 2λ·g + L_X g 를 좌불변 X 와 λ 에 대해 최소제곱으로 푼다.

    Returns:
        verdict = left-invariant-field (비자명 해), einstein (X=0, λ=-R/n),
        infeasible / ambiguous (최소 잔차 보고)
    """
    tol = tol or default_tolerances()
    n = mla.dim
    g = mla.metric
    curv = curvature(mla)
    target = (-2.0 * curv.ricci_form).ravel()

    eye = np.eye(n)
    columns = [lie_derivative_metric(mla, eye[k]).ravel() for k in range(n)]
    columns.append((2.0 * g).ravel())
    A = np.stack(columns, axis=1)
    solution, *_ = np.linalg.lstsq(A, target, rcond=None)
    residual = float(np.linalg.norm(A @ solution - target))
    X, lam = solution[:n], float(solution[n])

    rejected = _decide(residual, tol)
    if rejected is not None:
        logger.info(f"{mla.name}: 좌불변 벡터장 해 없음 (잔차 {residual:.3e})")
        return SolitonCertificate(
            verdict=rejected, residual=residual, scalar=curv.scalar, X=X, lam=lam
        )

    lie_x = lie_derivative_metric(mla, X)
    nontrivial = np.linalg.norm(X) > tol.tol_rank and np.linalg.norm(lie_x) > tol.tol_rank
    flat = np.sqrt(curv.ricci_norm_sq) <= tol.tol_alg

    if nontrivial:
        verdict = Verdict.LEFT_INVARIANT_FIELD
        logger.warning(f"{mla.name}: 비자명 좌불변 soliton 벡터장 발견 (λ={lam:.6g})")
    else:
        # Killing 장 또는 X=0: Einstein
        verdict = Verdict.EINSTEIN
        X = np.zeros(n)
        lam = -curv.scalar / n
        residual = float(np.linalg.norm(-2.0 * curv.ricci_form - 2.0 * lam * g))

    if flat:
        return SolitonCertificate(
            verdict=verdict, residual=residual, scalar=curv.scalar,
            soliton_type=SolitonType.TRIVIAL, X=X, lam=lam,
        )
    cls = classify_soliton_type(curv.scalar, lam, tol)
    return SolitonCertificate(
        verdict=verdict,
        residual=residual,
        scalar=curv.scalar,
        soliton_type=cls.soliton_type,
        X=X,
        lam=lam,
        consistent=cls.consistent,
    )


def soliton_certificate(mla: MetricLieAlgebra, tol: Tolerances | None = None) -> SolitonCertificate:
    """멱영이면 nilsoliton 방정식, 아니면 좌불변 벡터장 방정식으로 판정한다."""
    tol = tol or default_tolerances()
    if lower_central_series(mla.alg, tol).is_nilpotent:
        return solve_nilsoliton(mla, tol)
    return solve_left_invariant_field(mla, tol)


@dataclass(frozen=True)
class FieldDivergence:
    """
    soliton 벡터장의 (상수) 발산

    field: 벡터장에서 직접 계산한 값 (nilsoliton 이면 exp(-tD) 장의 -tr D)
    trace: soliton 항등식의 대각합에서 얻은 값 -R0 - nλ
    """

    field: float
    trace: float

    @property
    def mismatch(self) -> float:
        return abs(self.field - self.trace)


def soliton_field_divergence(mla: MetricLieAlgebra, certificate: SolitonCertificate) -> FieldDivergence:
    """
    실현가능한 인증서의 soliton 벡터장 발산

    Raises:
        PreconditionError: 실현가능하지 않은 인증서
    """
    if not certificate.is_feasible or certificate.lam is None:
        raise PreconditionError(f"certificate is not feasible ({certificate.verdict.value})")
    if certificate.verdict == Verdict.NILSOLITON:
        field_div = -float(np.trace(certificate.D))
    else:
        field_div = divergence_left_invariant(mla, certificate.X)
    trace_div = -certificate.scalar - mla.dim * certificate.lam
    return FieldDivergence(field=field_div, trace=float(trace_div))


# ── Milnor 틀 ──


def _lexicographic_positive(v: np.ndarray, eps: float) -> np.ndarray:
    for value in v:
        if abs(value) > eps:
            return v if value > 0 else -v
    return v


def milnor_frame(mla: MetricLieAlgebra, tol: Tolerances | None = None) -> MilnorFrame:
    """
    3차원 비단모듈 계량 Lie 대수의 정규직교 Milnor 틀을 만든다.

    [e1,e2] = αe2 + βe3, [e1,e3] = γe2 + δe3, [e2,e3] = 0,
    α+δ ≠ 0, αγ+βδ = 0.

    e1 은 단모듈 핵 u = ker(tr ad) 에 g-수직인 단위벡터, (e2, e3) 는 ad e1|u 의
    오른쪽 특이벡터 (특이값이 같으면 대칭부분의 고유벡터).

    Raises:
        PreconditionError: dim != 3 또는 단모듈
    """
    tol = tol or default_tolerances()
    if mla.dim != 3:
        raise PreconditionError(f"Milnor frame requires dim 3 (got {mla.dim})")
    if is_unimodular(mla.alg, tol):
        raise PreconditionError("Milnor frame requires a nonunimodular algebra")

    g = mla.metric
    tau = trace_form(mla.alg)
    u = np.linalg.solve(g, tau)
    e1 = u / np.sqrt(u @ g @ u)

    # 단모듈 핵의 결정적인 정규직교 기저
    Q = subspace_frame(mla, null_space(tau[None, :]), tol)

    ad_e1 = ad(mla.alg, e1)
    L = Q.T @ g @ ad_e1 @ Q

    _, sigma, Vt = np.linalg.svd(L)
    if sigma[0] - sigma[1] > tol.tol_rank * max(1.0, sigma[0]):
        W = Vt.T
    else:
        S = 0.5 * (L + L.T)
        if abs(S[0, 0] - S[1, 1]) + abs(S[0, 1]) > tol.tol_rank:
            _, W = np.linalg.eigh(S)
        else:
            W = np.eye(2)
    e2 = _lexicographic_positive(Q @ W[:, 0], tol.tol_rank)
    e3 = _lexicographic_positive(Q @ W[:, 1], tol.tol_rank)
    frame = np.stack([e1, e2, e3], axis=1)

    c = change_basis(mla.alg, frame).structure
    alpha, beta = float(c[0, 1, 1]), float(c[0, 1, 2])
    gamma, delta = float(c[0, 2, 1]), float(c[0, 2, 2])

    if np.linalg.norm(c[1, 2]) > tol.tol_alg or abs(alpha * gamma + beta * delta) > tol.tol_alg:
        raise InconsistencyError(
            f"Milnor frame constraints violated: [e2,e3]={c[1, 2]}, αγ+βδ={alpha * gamma + beta * delta:.3e}"
        )
    logger.debug(f"Milnor 틀: α={alpha:.6g}, β={beta:.6g}, γ={gamma:.6g}, δ={delta:.6g}")
    return MilnorFrame(alpha=alpha, beta=beta, gamma=gamma, delta=delta, frame=frame)


# ── gradient 장애 ──


def gradient_obstruction(mla: MetricLieAlgebra, tol: Tolerances | None = None) -> GradientReport:
    """
    좌불변 gradient soliton 의 장애를 판정한다.

    Ricci 가 비퇴화이거나 좌불변 평탄 인자가 없으면 gradient 가 될 수 없다.
    """
    tol = tol or default_tolerances()
    eigenvalues = curvature(mla).ricci_eigenvalues()
    nondegenerate = bool(np.abs(eigenvalues).min() > tol.tol_rank)
    flat_dim = int(euclidean_factor(mla, tol).shape[1])
    verdict = "not-gradient" if nondegenerate or flat_dim == 0 else "inconclusive"
    logger.debug(f"{mla.name}: gradient 장애 nondegenerate={nondegenerate}, flat={flat_dim} → {verdict}")
    return GradientReport(ricci_nondegenerate=nondegenerate, flat_factor_dim=flat_dim, verdict=verdict)
