"""
계량 Lie 대수의 좌불변 리만 기하 모듈

- Levi-Civita 접속 (Koszul 공식)
- 곡률, Ricci 형식/자기준동형, 스칼라 곡률
- 좌불변 벡터장의 발산, 계량의 Lie 미분
- 좌불변 평행 벡터장 (평탄 인자) 탐지
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from services.errors import ValidationError
from services.lie_core import LieAlgebra, ad, change_basis, frozen_array
from services.settings import Tolerances, default_tolerances

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MetricLieAlgebra:
    """
    Lie 대수 + 같은 기저에서의 양정치 내적 g[i][j] = <e_i, e_j>

    Args:
        alg: Lie 대수
        metric: 대칭 양정치 행렬 (None 이면 단위행렬)
    """

    alg: LieAlgebra
    metric: np.ndarray | None = None

    def __post_init__(self):
        n = self.alg.dim
        g = np.eye(n) if self.metric is None else np.array(self.metric, dtype=float)
        if g.shape != (n, n):
            raise ValidationError(f"계량 행렬 모양이 {(n, n)} 이어야 합니다: {g.shape}")
        if not np.all(np.isfinite(g)):
            raise ValidationError("계량 행렬에 유한하지 않은 값이 있습니다")
        asym = float(np.abs(g - g.T).max())
        if asym > 1e-9 * max(1.0, float(np.abs(g).max())):
            raise ValidationError(f"metric is not symmetric (max asymmetry {asym:.3e})")
        g = 0.5 * (g + g.T)
        eigenvalues = np.linalg.eigvalsh(g)
        if eigenvalues.min() <= 0.0:
            raise ValidationError(
                f"metric is not positive definite (smallest eigenvalue {eigenvalues.min():.3e})"
            )
        object.__setattr__(self, "metric", frozen_array(g))

    @property
    def dim(self) -> int:
        return self.alg.dim

    @property
    def name(self) -> str:
        return self.alg.name

    def inner(self, x, y) -> float:
        return float(np.asarray(x, float) @ self.metric @ np.asarray(y, float))

    def scaled(self, factor: float) -> "MetricLieAlgebra":
        return MetricLieAlgebra(self.alg, factor * self.metric)

    def with_metric(self, metric) -> "MetricLieAlgebra":
        return MetricLieAlgebra(self.alg, metric)


@dataclass(frozen=True)
class CurvaturePackage:
    """
    곡률 결과 묶음

    gamma: ∇_{e_i} e_j = Σ_k gamma[i, j, k] e_k (입력 기저)
    ricci_form: Ric(e_i, e_j)
    ricci_endo: g^{-1} · ricci_form
    scalar: 스칼라 곡률 R
    ricci_norm_sq: |Ric|^2
    """

    gamma: np.ndarray
    ricci_form: np.ndarray
    ricci_endo: np.ndarray
    scalar: float
    ricci_norm_sq: float

    def ricci_eigenvalues(self) -> np.ndarray:
        """Ricci 자기준동형의 고유값 (오름차순, g-자기수반이므로 실수)"""
        return np.sort(np.real(np.linalg.eigvals(self.ricci_endo)))


# ── 정규직교 틀 ──


def orthonormal_frame(mla: MetricLieAlgebra) -> np.ndarray:
    """
    스펙트럼 제곱근 g^{-1/2} 로 얻은 g-정규직교 틀 (열 f_a = Σ_i P[i, a] e_i)
    """
    w, V = np.linalg.eigh(mla.metric)
    return (V / np.sqrt(w)) @ V.T


def _orthonormal_structure(mla: MetricLieAlgebra) -> tuple[np.ndarray, np.ndarray]:
    P = orthonormal_frame(mla)
    return change_basis(mla.alg, P).structure, P


def _koszul_orthonormal(c: np.ndarray) -> np.ndarray:
    """정규직교 틀에서 Γ_abc = <∇_a f_b, f_c> = ½(c_abc - c_bca + c_cab)"""
    return 0.5 * (c - np.transpose(c, (2, 0, 1)) + np.transpose(c, (1, 2, 0)))


# ── 접속 ──


def levi_civita(mla: MetricLieAlgebra) -> np.ndarray:
    """
    Koszul 공식으로 Levi-Civita 접속 계수를 구한다.

    2<∇_x y, z> = <[x,y],z> - <[y,z],x> + <[z,x],y>

    Returns:
        Γ (n, n, n): ∇_{e_i} e_j = Σ_k Γ[i, j, k] e_k
    """
    c = mla.alg.structure
    g = mla.metric
    # cg[i, j, l] = <[e_i, e_j], e_l>
    cg = np.einsum("ijm,ml->ijl", c, g)
    lowered = 0.5 * (cg - np.transpose(cg, (2, 0, 1)) + np.transpose(cg, (1, 2, 0)))
    return np.einsum("ijl,lk->ijk", lowered, np.linalg.inv(g))


def connection_residuals(mla: MetricLieAlgebra, gamma: np.ndarray) -> tuple[float, float]:
    """
    (계량 호환성 잔차, 비틀림 잔차)

    <∇_x y, z> + <y, ∇_x z> = 0 과 ∇_x y - ∇_y x - [x,y] = 0 의 최대 절댓값.
    """
    g = mla.metric
    lowered = np.einsum("ijk,kl->ijl", gamma, g)
    compat = lowered + np.transpose(lowered, (0, 2, 1))
    torsion = gamma - np.transpose(gamma, (1, 0, 2)) - mla.alg.structure
    return float(np.abs(compat).max()), float(np.abs(torsion).max())


# ── 곡률 ──


def riemann_orthonormal(c: np.ndarray) -> np.ndarray:
    """
    정규직교 틀 구조상수로부터 곡률 텐서 성분

    Rm[a, b, c, e] = <R(f_a, f_b) f_c, f_e>,
    R(x,y)z = ∇_x∇_y z - ∇_y∇_x z - ∇_[x,y] z
    """
    G = _koszul_orthonormal(c)
    return (
        np.einsum("bcd,ade->abce", G, G)
        - np.einsum("acd,bde->abce", G, G)
        - np.einsum("abm,mce->abce", c, G)
    )


def riemann_tensor(mla: MetricLieAlgebra) -> np.ndarray:
    """g-정규직교 틀 (orthonormal_frame) 에서의 곡률 텐서 성분"""
    c, _ = _orthonormal_structure(mla)
    return riemann_orthonormal(c)


def is_flat(mla: MetricLieAlgebra, tol: Tolerances | None = None) -> bool:
    tol = tol or default_tolerances()
    return float(np.abs(riemann_tensor(mla)).max()) <= tol.tol_alg


def _ricci_orthonormal(mla: MetricLieAlgebra) -> tuple[np.ndarray, np.ndarray]:
    """(정규직교 틀에서의 Ricci 성분, 틀의 역행렬)"""
    c, P = _orthonormal_structure(mla)
    ric_on = np.einsum("abca->bc", riemann_orthonormal(c))
    return 0.5 * (ric_on + ric_on.T), np.linalg.inv(P)


def ricci_form(mla: MetricLieAlgebra) -> np.ndarray:
    """입력 기저에서의 Ricci 형식 Ric(e_i, e_j) (흐름 적분용 경량 경로)"""
    ric_on, P_inv = _ricci_orthonormal(mla)
    return P_inv.T @ ric_on @ P_inv


def curvature(mla: MetricLieAlgebra) -> CurvaturePackage:
    """
    곡률 패키지를 계산한다.

    g-정규직교 틀 {f_a} 에서 Ric(x,y) = Σ_a <R(f_a,x)y, f_a> 를 구한 뒤
    입력 기저로 되돌린다.
    """
    ric_on, P_inv = _ricci_orthonormal(mla)
    ric_form = P_inv.T @ ric_on @ P_inv
    ric_endo = np.linalg.solve(mla.metric, ric_form)

    package = CurvaturePackage(
        gamma=frozen_array(levi_civita(mla)),
        ricci_form=frozen_array(ric_form),
        ricci_endo=frozen_array(ric_endo),
        scalar=float(np.trace(ric_on)),
        ricci_norm_sq=float(np.sum(ric_on ** 2)),
    )
    logger.debug(f"곡률 계산 ({mla.name}): R={package.scalar:.6g}, |Ric|^2={package.ricci_norm_sq:.6g}")
    return package


def ricci_signature(package: CurvaturePackage, tol: Tolerances | None = None) -> tuple[int, int, int]:
    """Ricci 고유값의 부호 개수 (양, 0, 음)"""
    tol = tol or default_tolerances()
    ev = package.ricci_eigenvalues()
    scale = max(1.0, float(np.abs(ev).max()))
    positive = int(np.sum(ev > tol.tol_rank * scale))
    negative = int(np.sum(ev < -tol.tol_rank * scale))
    return positive, len(ev) - positive - negative, negative


# ── 발산 / Lie 미분 ──


def covariant_derivative_matrix(mla: MetricLieAlgebra, X, gamma: np.ndarray | None = None) -> np.ndarray:
    """y ↦ ∇_y X 의 행렬 (열 i = ∇_{e_i} X 의 좌표)"""
    gamma = levi_civita(mla) if gamma is None else gamma
    return np.einsum("j,ijk->ki", np.asarray(X, dtype=float), gamma)


def divergence_left_invariant(mla: MetricLieAlgebra, X) -> float:
    """
    좌불변 벡터장 X 의 (상수) 발산

    div X = Σ_i g(∇_{f_i} X, f_i) = tr(y ↦ ∇_y X)
    """
    return float(np.trace(covariant_derivative_matrix(mla, X)))


def lie_derivative_metric(mla: MetricLieAlgebra, X) -> np.ndarray:
    """
    좌불변 벡터장 X 에 대한 (L_X g)(e_i, e_j) = g(∇_{e_i}X, e_j) + g(e_i, ∇_{e_j}X)
    """
    nabla_x = covariant_derivative_matrix(mla, X)
    lowered = mla.metric @ nabla_x
    return lowered + lowered.T


def lie_derivative_metric_bracket(mla: MetricLieAlgebra, X) -> np.ndarray:
    """
    같은 양을 브래킷으로 계산: -g([X,e_i],e_j) - g(e_i,[X,e_j])
    """
    lowered = mla.metric @ ad(mla.alg, X)
    return -(lowered + lowered.T)


# ── 평탄 인자 ──


def euclidean_factor(mla: MetricLieAlgebra, tol: Tolerances | None = None) -> np.ndarray:
    """
    좌불변 평행 벡터장의 공간 (left-invariant flat factor)

    모든 i 에 대해 ∇_{e_i} z = 0 인 z 들, 즉 z ↦ ∇_{e_i} z 를 쌓은 행렬의 영공간.
    진짜 de Rham 분해가 아니라 좌불변 근사이다.
    """
    tol = tol or default_tolerances()
    gamma = levi_civita(mla)
    n = mla.dim
    # stacked[(i, k), j] = Γ[i, j, k]
    stacked = np.transpose(gamma, (0, 2, 1)).reshape(n * n, n)
    return null_space(stacked, rcond=tol.tol_rank)


# ── 부분공간 틀 ──


def subspace_frame(mla: MetricLieAlgebra, subspace: np.ndarray, tol: Tolerances | None = None) -> np.ndarray:
    """
    부분공간의 결정적인 g-정규직교 기저 (열벡터)

    표준 기저 e_1, ..., e_n 을 순서대로 부분공간에 g-사영한 뒤 Gram-Schmidt 한다.
    부분공간이 좌표축으로 생성되면 그 축들을 그대로 돌려준다.
    """
    tol = tol or default_tolerances()
    g = mla.metric
    S = np.asarray(subspace, dtype=float)
    if S.size == 0 or S.shape[1] == 0:
        return np.zeros((mla.dim, 0))
    projector = S @ np.linalg.solve(S.T @ g @ S, S.T @ g)

    basis: list[np.ndarray] = []
    for v in projector.T:
        w = v.copy()
        for b in basis:
            w = w - (b @ g @ w) * b
        norm = np.sqrt(max(float(w @ g @ w), 0.0))
        if norm > tol.tol_rank:
            basis.append(w / norm)
        if len(basis) == S.shape[1]:
            break
    return np.array(basis).T


def orthogonal_complement(mla: MetricLieAlgebra, subspace: np.ndarray, tol: Tolerances | None = None) -> np.ndarray:
    """g-직교여공간의 g-정규직교 기저"""
    tol = tol or default_tolerances()
    S = np.asarray(subspace, dtype=float)
    if S.size == 0 or S.shape[1] == 0:
        return subspace_frame(mla, np.eye(mla.dim), tol)
    complement = null_space(S.T @ mla.metric, rcond=tol.tol_rank)
    return subspace_frame(mla, complement, tol)
