"""
2-step 멱영 계량 Lie 대수와 가해 확장 모듈

- 중심 z 와 직교여공간 v 로의 분해, j(z) 사상 <j(z)x, y> = <z, [x, y]>
- 비특이성 / H-type 판정
- Ricci 핵 (j 의 핵) 과 곡률 기반 핵의 교차 검증
- 계수 1 표준 가해 확장 s = RH ⊕ n, [H, x] = s·Dx 와 Einstein 스케일 탐색
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import least_squares, minimize_scalar
from scipy.stats import norm, qmc

from services.errors import InconsistencyError, PreconditionError
from services.lie_core import (
    LieAlgebra,
    bracket,
    center,
    change_basis,
    derivation_residual,
    lower_central_series,
)
from services.metric_geometry import (
    MetricLieAlgebra,
    curvature,
    orthogonal_complement,
    ricci_form,
    subspace_frame,
)
from services.settings import Tolerances, default_tolerances, get_settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TwoStepDecomposition:
    """
    z_basis: (n, p) 중심의 g-정규직교 기저 (열)
    v_basis: (n, m) 직교여공간의 g-정규직교 기저 (열)
    j_maps: (p, m, m) j(z_a) 의 v_basis 좌표 행렬, j_maps[a][q, p] = <z_a, [v_p, v_q]>
    """

    mla: MetricLieAlgebra
    z_basis: np.ndarray
    v_basis: np.ndarray
    j_maps: np.ndarray

    @property
    def center_dim(self) -> int:
        return self.z_basis.shape[1]

    def j(self, coefficients) -> np.ndarray:
        """z = Σ a_k z_k 에 대한 j(z)"""
        return np.einsum("a,aqp->qp", np.asarray(coefficients, dtype=float), self.j_maps)


@dataclass(frozen=True)
class SolvableExtension:
    base: MetricLieAlgebra
    derivation: np.ndarray
    scale: float
    extended: MetricLieAlgebra  # H 는 마지막 기저 벡터


@dataclass(frozen=True)
class EinsteinCheck:
    is_einstein: bool
    lambda_einstein: float
    residual: float


@dataclass(frozen=True)
class EinsteinScaleResult:
    scale: float
    residual: float
    found: bool
    message: str = ""


# ── 2-step 분해 ──


def decompose_two_step(mla: MetricLieAlgebra, tol: Tolerances | None = None) -> TwoStepDecomposition:
    """
    2-step 멱영 계량 Lie 대수를 z ⊕ v 로 분해하고 j 사상을 만든다.

    Raises:
        PreconditionError: 멱영 class 가 2 가 아님
    """
    tol = tol or default_tolerances()
    lcs = lower_central_series(mla.alg, tol)
    if lcs.nilpotency_class != 2:
        raise PreconditionError(
            f"two-step decomposition requires nilpotency class 2 (got {lcs.describe()})"
        )

    Z = subspace_frame(mla, center(mla.alg, tol), tol)
    V = orthogonal_complement(mla, Z, tol)
    g = mla.metric

    # brackets[p, q] = [v_p, v_q]
    brackets = np.einsum("ip,jq,ijk->pqk", V, V, mla.alg.structure)
    brackets = 0.5 * (brackets - np.transpose(brackets, (1, 0, 2)))
    j_maps = np.einsum("ka,kl,pql->aqp", Z, g, brackets)

    dec = TwoStepDecomposition(mla=mla, z_basis=Z, v_basis=V, j_maps=j_maps)
    residual = j_pairing_residual(dec)
    if residual > tol.tol_alg:
        raise InconsistencyError(f"j-map pairing residual {residual:.3e} exceeds tol_alg")
    logger.debug(f"{mla.name}: dim z={Z.shape[1]}, dim v={V.shape[1]}")
    return dec


def j_pairing_residual(dec: TwoStepDecomposition) -> float:
    """max |<j(z_a)v_p, v_q> - <z_a, [v_p, v_q]>| 와 j 의 반대칭성 잔차 중 큰 값"""
    mla = dec.mla
    g = mla.metric
    worst = 0.0
    for a in range(dec.center_dim):
        J = dec.j_maps[a]
        worst = max(worst, float(np.abs(J + J.T).max()))
        z = dec.z_basis[:, a]
        for p in range(dec.v_basis.shape[1]):
            for q in range(dec.v_basis.shape[1]):
                jx = dec.v_basis @ J[:, p]
                lhs = jx @ g @ dec.v_basis[:, q]
                rhs = z @ g @ bracket(mla.alg, dec.v_basis[:, p], dec.v_basis[:, q])
                worst = max(worst, abs(lhs - rhs))
    return worst


def rebuild_brackets(dec: TwoStepDecomposition) -> LieAlgebra:
    """
    j 사상으로부터 구조상수를 다시 만든다.

    [v_p, v_q] = Σ_a <j(z_a)v_p, v_q> z_a, 중심과의 브래킷은 0.
    """
    m = dec.v_basis.shape[1]
    p_dim = dec.center_dim
    n = m + p_dim
    c = np.zeros((n, n, n))
    skew = 0.5 * (dec.j_maps - np.transpose(dec.j_maps, (0, 2, 1)))
    c[:m, :m, m:] = np.transpose(skew, (2, 1, 0))
    frame = np.hstack([dec.v_basis, dec.z_basis])
    # (v, z) 기저에서 원래 기저로
    return change_basis(LieAlgebra(c, name=dec.mla.name), np.linalg.inv(frame))


# ── 판정 ──


def _sphere_points(dim: int, samples: int) -> np.ndarray:
    """단위구면 위 결정적 저불일치 점 (비뒤섞임 Halton + 정규 분위수)"""
    sampler = qmc.Halton(d=dim, scramble=False)
    sampler.fast_forward(1)
    points = norm.ppf(sampler.random(samples))
    lengths = np.linalg.norm(points, axis=1)
    points = points[lengths > 1e-12]
    return points / np.linalg.norm(points, axis=1, keepdims=True)


def is_nonsingular(
    dec: TwoStepDecomposition, tol: Tolerances | None = None, samples: int | None = None
) -> bool:
    """
    모든 0 이 아닌 z 에 대해 j(z) 가 가역인지 판정한다.

    기저 검사 후 중심 단위구면의 결정적 표본에서 최소 특이값 > tol_rank 를 확인한다.
    """
    tol = tol or default_tolerances()
    samples = samples or get_settings().sphere_samples
    if dec.v_basis.shape[1] % 2 == 1:
        # 홀수 차원의 반대칭 사상은 항상 특이
        return False

    def smallest_singular(J: np.ndarray) -> float:
        return float(np.linalg.svd(J, compute_uv=False).min())

    for a in range(dec.center_dim):
        if smallest_singular(dec.j_maps[a]) <= tol.tol_rank:
            logger.debug(f"{dec.mla.name}: j(z_{a + 1}) 특이")
            return False

    if dec.center_dim == 1:
        return True

    for z in _sphere_points(dec.center_dim, samples):
        if smallest_singular(dec.j(z)) <= tol.tol_rank:
            logger.debug(f"{dec.mla.name}: 구면 표본 {z} 에서 j(z) 특이")
            return False
    return True


def is_htype(dec: TwoStepDecomposition, tol: Tolerances | None = None) -> bool:
    """j(z_a)j(z_b) + j(z_b)j(z_a) + 2δ_ab·I = 0 (H-type 항등식의 극화형)"""
    tol = tol or default_tolerances()
    m = dec.v_basis.shape[1]
    eye = np.eye(m)
    for a in range(dec.center_dim):
        for b in range(a, dec.center_dim):
            Ja, Jb = dec.j_maps[a], dec.j_maps[b]
            clifford = Ja @ Jb + Jb @ Ja + (2.0 * eye if a == b else 0.0)
            if np.linalg.norm(clifford) > tol.tol_alg:
                return False
    return True


def ricci_kernel_two_step(
    dec: TwoStepDecomposition, tol: Tolerances | None = None, strict: bool = False
) -> np.ndarray:
    """
    {z ∈ z | j(z) = 0} 의 기저 (원래 기저 좌표의 열벡터)

    곡률로 계산한 Ricci 자기준동형의 핵과 교차 검증한다. 불일치하면 경고,
    strict=True 면 InconsistencyError.
    """
    tol = tol or default_tolerances()
    p = dec.center_dim
    stacked = dec.j_maps.reshape(p, -1).T
    coefficients = null_space(stacked, rcond=tol.tol_rank)
    kernel = dec.z_basis @ coefficients

    ricci_endo = curvature(dec.mla).ricci_endo
    ricci_kernel = null_space(ricci_endo, rcond=tol.tol_rank)
    mismatch = kernel.shape[1] != ricci_kernel.shape[1]
    if not mismatch and kernel.shape[1] > 0:
        mismatch = float(np.abs(ricci_endo @ kernel).max()) > tol.tol_rank

    if mismatch:
        message = (
            f"{dec.mla.name}: j-kernel dim {kernel.shape[1]} disagrees with "
            f"Ricci kernel dim {ricci_kernel.shape[1]}"
        )
        if strict:
            raise InconsistencyError(message)
        logger.warning(message)
    return kernel


# ── 가해 확장 ──


def _extension_algebra(base: MetricLieAlgebra, D: np.ndarray, s: float) -> MetricLieAlgebra:
    n = base.dim
    c = np.zeros((n + 1, n + 1, n + 1))
    c[:n, :n, :n] = base.alg.structure
    c[n, :n, :n] = s * D.T
    c[:n, n, :n] = -s * D.T

    metric = np.zeros((n + 1, n + 1))
    metric[:n, :n] = base.metric
    metric[n, n] = 1.0

    name = f"{base.name}+H" if base.name else "extension"
    return MetricLieAlgebra(LieAlgebra(c, name=name), metric)


def solvable_extension(
    base: MetricLieAlgebra, D, s: float, tol: Tolerances | None = None
) -> SolvableExtension:
    """
    계수 1 표준 계량 가해 확장을 만든다.

    H 는 마지막 기저 벡터, 단위 길이이고 n 에 수직. [H, x] = s·Dx.

    Raises:
        PreconditionError: 기저 대수가 멱영이 아니거나 D 가 미분이 아니거나 s <= 0
    """
    tol = tol or default_tolerances()
    D = np.asarray(D, dtype=float)
    n = base.dim
    if D.shape != (n, n):
        raise PreconditionError(f"derivation must be {n}x{n} (got {D.shape})")
    if not s > 0:
        raise PreconditionError(f"extension scale must be positive (got {s})")
    if not lower_central_series(base.alg, tol).is_nilpotent:
        raise PreconditionError("solvable extension requires a nilpotent base")
    residual = derivation_residual(base.alg, D)
    if residual > tol.tol_alg:
        raise PreconditionError(f"D is not a derivation (residual {residual:.3e})")

    extended = _extension_algebra(base, D, s)
    return SolvableExtension(base=base, derivation=D, scale=float(s), extended=extended)


def is_einstein(mla: MetricLieAlgebra, tol: Tolerances | None = None) -> EinsteinCheck:
    """λ_e = R/dim, residual = ‖ricci_form - λ_e·g‖"""
    tol = tol or default_tolerances()
    curv = curvature(mla)
    lam = curv.scalar / mla.dim
    residual = float(np.linalg.norm(curv.ricci_form - lam * mla.metric))
    return EinsteinCheck(is_einstein=residual <= tol.tol_sol, lambda_einstein=lam, residual=residual)


def _einstein_defect(base: MetricLieAlgebra, D: np.ndarray, s: float) -> np.ndarray:
    """확장 계량의 무대각합 Ricci 성분 (상삼각)"""
    mla = _extension_algebra(base, D, s)
    n = mla.dim
    metric = mla.metric
    ric = ricci_form(mla)
    scalar = float(np.trace(np.linalg.solve(metric, ric)))
    defect = ric - (scalar / n) * metric
    return defect[np.triu_indices(n)]


def find_einstein_scale(
    base: MetricLieAlgebra, D, tol: Tolerances | None = None
) -> EinsteinScaleResult:
    """
    확장의 Einstein 잔차를 최소화하는 s ∈ (0, s_max] 를 찾는다.

    s = 1 을 먼저 확인하고, 아니면 유계 Brent (황금분할) 탐색 뒤 최소제곱으로 다듬는다.
    """
    tol = tol or default_tolerances()
    settings = get_settings()
    D = np.asarray(D, dtype=float)
    residual_at_one = is_einstein(solvable_extension(base, D, 1.0, tol).extended, tol).residual
    if residual_at_one <= tol.tol_sol:
        logger.info(f"{base.name}: s=1 에서 Einstein 확장 (잔차 {residual_at_one:.3e})")
        return EinsteinScaleResult(scale=1.0, residual=residual_at_one, found=True)

    lower = settings.search_xatol
    search = minimize_scalar(
        lambda s: float(np.sum(_einstein_defect(base, D, s) ** 2)),
        bounds=(lower, settings.s_max),
        method="bounded",
        options={"xatol": settings.search_xatol, "maxiter": settings.search_maxiter},
    )
    polished = least_squares(
        lambda x: _einstein_defect(base, D, float(x[0])),
        x0=[float(search.x)],
        bounds=([lower], [settings.s_max]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )

    candidates = [float(search.x), float(polished.x[0]), 1.0]
    scored = [
        (is_einstein(solvable_extension(base, D, s, tol).extended, tol).residual, s)
        for s in candidates
    ]
    residual, scale = min(scored)
    logger.debug(f"{base.name}: Einstein 스케일 탐색 s={scale:.15g}, 잔차={residual:.3e}")

    if residual <= tol.tol_sol:
        return EinsteinScaleResult(scale=scale, residual=residual, found=True)
    logger.warning(f"{base.name}: no Einstein extension at this D (best residual {residual:.3e})")
    return EinsteinScaleResult(
        scale=scale, residual=residual, found=False, message="no Einstein extension at this D"
    )
