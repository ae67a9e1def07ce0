"""
Lie 대수 핵심 모듈

구조상수 c[i][j][k] ([e_i, e_j] = Σ_k c[i][j][k] e_k) 로 Lie 대수를 표현하고
순수 대수적 분석을 제공한다.
- Jacobi 항등식 잔차
- 단모듈성 (trace form)
- 하강 중심열 / 유도열, 중심
- 미분 대수 Der(g)
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space, orth

from services.errors import ValidationError
from services.settings import Tolerances, default_tolerances

logger = logging.getLogger(__name__)


def frozen_array(values, ndim: int | None = None) -> np.ndarray:
    """읽기 전용 float 배열 사본을 만든다."""
    arr = np.array(values, dtype=float, copy=True)
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"{ndim}차원 배열이 필요합니다 (입력: {arr.ndim}차원)")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LieAlgebra:
    """
    구조상수로 정의된 Lie 대수

    Args:
        structure: (dim, dim, dim) 배열, [e_i, e_j] = Σ_k structure[i, j, k] e_k
        name: 표시용 이름
    """

    structure: np.ndarray
    name: str = ""

    def __post_init__(self):
        c = frozen_array(self.structure, ndim=3)
        n = c.shape[0]
        if n == 0 or c.shape != (n, n, n):
            raise ValidationError(f"구조상수는 (n, n, n) 모양이어야 합니다: {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ValidationError("구조상수에 유한하지 않은 값이 있습니다")

        # 반대칭성: c[i][j][k] = -c[j][i][k]
        asym = np.abs(c + np.transpose(c, (1, 0, 2)))
        if asym.max() > 0.0:
            i, j, k = np.unravel_index(int(np.argmax(asym)), asym.shape)
            raise ValidationError(
                f"antisymmetry violated at c[{i}][{j}][{k}]={c[i, j, k]!r}, "
                f"c[{j}][{i}][{k}]={c[j, i, k]!r}",
                index=(int(i), int(j), int(k)),
            )
        object.__setattr__(self, "structure", c)

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    @classmethod
    def from_brackets(cls, dim: int, brackets, name: str = "") -> "LieAlgebra":
        """
        (i, j, k, value) 목록 (0-기반) 에서 반대칭 완성을 해서 만든다.

        Args:
            dim: 차원
            brackets: [e_i, e_j] 의 e_k 성분 = value 인 항목들 (i != j)
            name: 이름
        """
        c = np.zeros((dim, dim, dim))
        for i, j, k, value in brackets:
            if not (0 <= i < dim and 0 <= j < dim and 0 <= k < dim):
                raise ValidationError(f"인덱스가 범위를 벗어남: ({i}, {j}, {k})", index=(i, j, k))
            if i == j:
                if value != 0:
                    raise ValidationError(f"[e_{i}, e_{i}] 는 0 이어야 합니다", index=(i, j, k))
                continue
            c[i, j, k] = value
            c[j, i, k] = -value
        return cls(c, name=name)


@dataclass(frozen=True)
class DerivationSpace:
    """Der(g) 의 기저 (각 원소는 dim x dim 행렬, D e_j = Σ_k D[k, j] e_k)"""

    basis: np.ndarray  # (dimension, n, n)

    def __post_init__(self):
        object.__setattr__(self, "basis", frozen_array(self.basis, ndim=3))

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    def combine(self, coefficients) -> np.ndarray:
        """기저의 선형결합 Σ d_m B_m"""
        return np.einsum("m,mab->ab", np.asarray(coefficients, dtype=float), self.basis)


@dataclass(frozen=True)
class LowerCentralSeries:
    dims: list[int] = field(default_factory=list)
    nilpotency_class: int | None = None

    @property
    def is_nilpotent(self) -> bool:
        return self.nilpotency_class is not None

    def describe(self) -> str:
        if self.is_nilpotent:
            return f"class {self.nilpotency_class}"
        return "not nilpotent"


# ── 기본 연산 ──


def bracket(alg: LieAlgebra, x, y) -> np.ndarray:
    """[x, y] 의 좌표"""
    return np.einsum("i,j,ijk->k", np.asarray(x, float), np.asarray(y, float), alg.structure)


def ad(alg: LieAlgebra, x) -> np.ndarray:
    """ad x 의 행렬 (열 = 기저 벡터의 상)"""
    return np.einsum("i,ijk->kj", np.asarray(x, float), alg.structure)


def ad_matrices(alg: LieAlgebra) -> np.ndarray:
    """ad e_i 행렬들을 쌓은 (n, n, n) 배열"""
    return np.transpose(alg.structure, (0, 2, 1))


def change_basis(alg: LieAlgebra, frame) -> LieAlgebra:
    """
    새 기저 f_a = Σ_i frame[i, a] e_i 에서의 구조상수로 변환한다.

    Args:
        alg: Lie 대수
        frame: (n, n) 가역 행렬 (열이 새 기저 벡터)
    """
    P = np.asarray(frame, dtype=float)
    P_inv = np.linalg.inv(P)
    c = np.einsum("ia,jb,ijk,ck->abc", P, P, alg.structure, P_inv)
    # 반올림 오차로 깨진 반대칭성 복원
    c = 0.5 * (c - np.transpose(c, (1, 0, 2)))
    return LieAlgebra(c, name=alg.name)


def permute_basis(alg: LieAlgebra, perm) -> LieAlgebra:
    """기저 순서를 바꾼다 (새 e_a = 옛 e_{perm[a]})"""
    p = np.asarray(perm, dtype=int)
    c = alg.structure[np.ix_(p, p, p)]
    return LieAlgebra(c, name=alg.name)


def direct_sum(*algebras: LieAlgebra, name: str = "") -> LieAlgebra:
    """Lie 대수들의 직합 (블록 대각 구조상수)"""
    n = sum(a.dim for a in algebras)
    c = np.zeros((n, n, n))
    offset = 0
    for a in algebras:
        s = slice(offset, offset + a.dim)
        c[s, s, s] = a.structure
        offset += a.dim
    return LieAlgebra(c, name=name or "+".join(a.name for a in algebras))


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra(np.zeros((n, n, n)), name=f"abelian{n}")


# ── Jacobi / 단모듈성 ──


def jacobi_tensor(alg: LieAlgebra) -> np.ndarray:
    """[[e_i,e_j],e_l] + [[e_j,e_l],e_i] + [[e_l,e_i],e_j] 의 좌표 (n, n, n, n)"""
    c = alg.structure
    t = np.einsum("ijk,klm->ijlm", c, c)
    return t + np.transpose(t, (2, 0, 1, 3)) + np.transpose(t, (1, 2, 0, 3))


def check_jacobi(alg: LieAlgebra) -> float:
    """
    기저 삼중쌍에 대한 Jacobi 잔차의 최댓값을 반환한다.

    Returns:
        max_{i,j,l} ‖[[e_i,e_j],e_l] + [[e_j,e_l],e_i] + [[e_l,e_i],e_j]‖
    """
    norms = np.linalg.norm(jacobi_tensor(alg), axis=3)
    return float(norms.max())


def validate_algebra(alg: LieAlgebra, tol: Tolerances | None = None) -> LieAlgebra:
    """Jacobi 잔차가 tol_alg 를 넘으면 문제 삼중쌍과 함께 ValidationError"""
    tol = tol or default_tolerances()
    norms = np.linalg.norm(jacobi_tensor(alg), axis=3)
    worst = float(norms.max())
    if worst > tol.tol_alg:
        i, j, l = (int(v) for v in np.unravel_index(int(np.argmax(norms)), norms.shape))
        raise ValidationError(
            f"Jacobi identity fails on (e{i + 1}, e{j + 1}, e{l + 1}): residual {worst:.3e}",
            index=(i, j, l),
        )
    logger.debug(f"Jacobi 잔차 {worst:.3e} ({alg.name})")
    return alg


def trace_form(alg: LieAlgebra) -> np.ndarray:
    """x ↦ tr(ad x) 의 계수 벡터"""
    return np.einsum("ijj->i", alg.structure)


def is_unimodular(alg: LieAlgebra, tol: Tolerances | None = None) -> bool:
    tol = tol or default_tolerances()
    return bool(np.all(np.abs(trace_form(alg)) <= tol.tol_alg))


# ── 부분공간 계열 ──


def _span(vectors: np.ndarray, n: int, tol: Tolerances) -> np.ndarray:
    """벡터들 (행) 이 생성하는 부분공간의 정규직교 기저 (열)"""
    if vectors.size == 0:
        return np.zeros((n, 0))
    return orth(vectors.reshape(-1, n).T, rcond=tol.tol_rank)


def lower_central_series(alg: LieAlgebra, tol: Tolerances | None = None) -> LowerCentralSeries:
    """
    g ⊇ [g,g] ⊇ [g,[g,g]] ⊇ ... 의 차원 목록과 멱영 class 를 구한다.

    Returns:
        LowerCentralSeries (멱영이 아니면 nilpotency_class=None)
    """
    tol = tol or default_tolerances()
    n = alg.dim
    current = np.eye(n)
    dims = [n]
    while current.shape[1] > 0:
        # [e_i, v_m] 전부
        images = np.einsum("ijk,jm->imk", alg.structure, current)
        nxt = _span(images, n, tol)
        if nxt.shape[1] == current.shape[1]:
            logger.debug(f"하강 중심열 안정화: dim {nxt.shape[1]} ({alg.name})")
            return LowerCentralSeries(dims=dims, nilpotency_class=None)
        dims.append(nxt.shape[1])
        current = nxt
    return LowerCentralSeries(dims=dims, nilpotency_class=len(dims) - 1)


def derived_series(alg: LieAlgebra, tol: Tolerances | None = None) -> list[int]:
    """g ⊇ [g,g] ⊇ [[g,g],[g,g]] ⊇ ... 의 차원 목록 (안정화되거나 0 이 되면 종료)"""
    tol = tol or default_tolerances()
    n = alg.dim
    current = np.eye(n)
    dims = [n]
    while current.shape[1] > 0:
        images = np.einsum("ijk,ia,jb->abk", alg.structure, current, current)
        nxt = _span(images, n, tol)
        if nxt.shape[1] == current.shape[1]:
            break
        dims.append(nxt.shape[1])
        current = nxt
    return dims


def is_solvable(alg: LieAlgebra, tol: Tolerances | None = None) -> bool:
    return derived_series(alg, tol)[-1] == 0


def center(alg: LieAlgebra, tol: Tolerances | None = None) -> np.ndarray:
    """
    중심의 기저 (표준 좌표 내적에 대해 정규직교인 열벡터)

    ad e_i 들을 세로로 쌓은 행렬의 영공간.
    """
    tol = tol or default_tolerances()
    n = alg.dim
    stacked = ad_matrices(alg).reshape(n * n, n)
    return null_space(stacked, rcond=tol.tol_rank)


# ── 미분 대수 ──


def derivation_operator(alg: LieAlgebra) -> np.ndarray:
    """
    vec(D) ↦ (D[e_i,e_j] - [De_i,e_j] - [e_i,De_j])_{i,j} 의 행렬 (n^3, n^2)

    D 는 행 우선 (C 순서) 으로 벡터화한다: vec(D)[a*n + b] = D[a, b].
    """
    c = alg.structure
    n = alg.dim
    eye = np.eye(n)
    op = (
        np.einsum("ijb,ma->ijmab", c, eye)
        - np.einsum("bi,ajm->ijmab", eye, c)
        - np.einsum("bj,iam->ijmab", eye, c)
    )
    return op.reshape(n ** 3, n * n)


def derivation_residual(alg: LieAlgebra, D) -> float:
    """‖D[x,y] - [Dx,y] - [x,Dy]‖ 의 기저 쌍 최댓값"""
    n = alg.dim
    values = derivation_operator(alg) @ np.asarray(D, dtype=float).reshape(n * n)
    return float(np.linalg.norm(values.reshape(n, n, n), axis=2).max())


def is_derivation(alg: LieAlgebra, D, tol: Tolerances | None = None) -> bool:
    tol = tol or default_tolerances()
    return derivation_residual(alg, D) <= tol.tol_alg


def derivation_algebra(alg: LieAlgebra, tol: Tolerances | None = None) -> DerivationSpace:
    """
    Der(g) 를 선형 연산자의 영공간으로 구한다.

    Returns:
        DerivationSpace (기저 행렬들은 선형독립, Frobenius 정규직교)
    """
    tol = tol or default_tolerances()
    n = alg.dim
    kernel = null_space(derivation_operator(alg), rcond=tol.tol_rank)
    basis = kernel.T.reshape(-1, n, n)
    logger.debug(f"Der({alg.name}) 차원 = {basis.shape[0]}")
    return DerivationSpace(basis=basis)
