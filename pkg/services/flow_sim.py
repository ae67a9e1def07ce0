"""
동차 Ricci 흐름 시뮬레이션 모듈

구조상수를 고정하고 계량 행렬에 대한 ODE dg/dt = -2·Ric(g) 를 고정 간격 RK4 로
적분한 뒤, 흐름 위의 진화 법칙들을 검증한다.
- soliton 스칼라 곡률 법칙 R(t) = R0 / (1 + 2λt)
- 열 방정식 dR/dt = 2|Ric|^2
- R·V^{2/n} 단조성
- Ricci 스펙트럼 모양 보존 (자기유사성)
- 부피 법칙 d/dt det g = -2R det g
"""

import logging
from dataclasses import dataclass

import numpy as np

from services.errors import PreconditionError, ValidationError
from services.lie_core import LieAlgebra
from services.metric_geometry import MetricLieAlgebra, curvature, ricci_form
from services.settings import Tolerances, default_tolerances
from services.soliton_solver import scalar_evolution, scalar_evolution_rate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FlowTrajectory:
    """
    Ricci 흐름 궤적

    times: 기록 시각 (후방 흐름이면 감소)
    metrics: (T, n, n) 계량 행렬
    scalars / ricci_norms / volumes / rv_invariant: 각 시각의 관측량
    breakdown: 양정치성 상실로 잘린 궤적이면 True, t_star 는 마지막 허용 시각
    """

    alg: LieAlgebra
    times: np.ndarray
    metrics: np.ndarray
    scalars: np.ndarray
    ricci_norms: np.ndarray
    volumes: np.ndarray
    rv_invariant: np.ndarray
    breakdown: bool = False
    t_star: float | None = None

    @property
    def dim(self) -> int:
        return self.alg.dim

    def __len__(self) -> int:
        return len(self.times)

    def traceless_norms(self) -> np.ndarray:
        """‖Ric - (R/n)g‖^2 = |Ric|^2 - R^2/n"""
        return self.ricci_norms - self.scalars ** 2 / self.dim


@dataclass(frozen=True)
class EvolutionCheck:
    deviation: float
    degenerate: bool = False
    message: str = ""
    ode_residual: float | None = None  # max |dR/dt + 2λR^2/R0| (3 점 이상)


@dataclass(frozen=True)
class HeatLawCheck:
    residual: float
    nondecreasing: bool


@dataclass(frozen=True)
class MonotonicityCheck:
    min_slope: float
    mismatch: float  # 기대 기울기와의 최대 상대 차이
    consistent: bool


def observables(alg: LieAlgebra, metric: np.ndarray) -> tuple[float, float, float]:
    """(R, |Ric|^2, V = sqrt(det g))"""
    curv = curvature(MetricLieAlgebra(alg, metric))
    return curv.scalar, curv.ricci_norm_sq, float(np.sqrt(np.linalg.det(metric)))


def from_observables(
    alg: LieAlgebra,
    times,
    metrics,
    scalars,
    ricci_norms,
    volumes,
    breakdown: bool = False,
    t_star: float | None = None,
) -> FlowTrajectory:
    """관측량 배열들로 궤적을 조립한다 (rv_invariant 는 다시 계산)"""
    volumes = np.asarray(volumes, dtype=float)
    scalars = np.asarray(scalars, dtype=float)
    return FlowTrajectory(
        alg=alg,
        times=np.asarray(times, dtype=float),
        metrics=np.asarray(metrics, dtype=float),
        scalars=scalars,
        ricci_norms=np.asarray(ricci_norms, dtype=float),
        volumes=volumes,
        rv_invariant=scalars * volumes ** (2.0 / alg.dim),
        breakdown=breakdown,
        t_star=t_star,
    )


def _is_spd(metric: np.ndarray, tol: Tolerances) -> bool:
    if not np.all(np.isfinite(metric)):
        return False
    return float(np.linalg.eigvalsh(metric).min()) >= tol.tol_rank


def integrate_flow(
    mla0: MetricLieAlgebra, t_end: float, dt: float, tol: Tolerances | None = None
) -> FlowTrajectory:
    """
    고정 간격 고전 RK4 로 dg/dt = -2·ricci_form(g) 를 적분한다.

    t_end < 0 이면 같은 적분기로 후방 흐름을 계산한다. 계량이 양정치성을 잃으면
    (최소 고유값 < tol_rank) 그 직전까지의 궤적을 breakdown=True 로 반환한다.

    Args:
        mla0: 초기 계량 Lie 대수
        t_end: 종료 시각 (0 이 아닌 유한값)
        dt: 간격 크기 (양수), 실제 간격은 |t_end| 를 균등 분할하도록 맞춘다

    Raises:
        PreconditionError: dt <= 0 또는 t_end = 0
    """
    tol = tol or default_tolerances()
    if not (np.isfinite(dt) and dt > 0):
        raise PreconditionError(f"dt must be positive (got {dt})")
    if not np.isfinite(t_end) or t_end == 0:
        raise PreconditionError(f"t_end must be a nonzero finite number (got {t_end})")

    alg = mla0.alg
    steps = max(1, int(np.ceil(abs(t_end) / dt - 1e-9)))
    h = t_end / steps
    logger.info(f"Ricci 흐름 적분 시작: {mla0.name}, t_end={t_end}, steps={steps}")

    def rhs(metric: np.ndarray) -> np.ndarray:
        return -2.0 * ricci_form(MetricLieAlgebra(alg, metric))

    g = np.array(mla0.metric, dtype=float)
    times, metrics, scalars, norms, volumes = [0.0], [g.copy()], [], [], []
    R, norm_sq, V = observables(alg, g)
    scalars.append(R)
    norms.append(norm_sq)
    volumes.append(V)

    breakdown = False
    for step in range(1, steps + 1):
        try:
            k1 = rhs(g)
            k2 = rhs(g + 0.5 * h * k1)
            k3 = rhs(g + 0.5 * h * k2)
            k4 = rhs(g + h * k3)
            nxt = g + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            nxt = 0.5 * (nxt + nxt.T)
            if not _is_spd(nxt, tol):
                raise ValidationError("metric left the positive definite cone")
        except (ValidationError, np.linalg.LinAlgError):
            breakdown = True
            break

        g = nxt
        R, norm_sq, V = observables(alg, g)
        times.append(step * h)
        metrics.append(g.copy())
        scalars.append(R)
        norms.append(norm_sq)
        volumes.append(V)

    t_star = times[-1] if breakdown else None
    if breakdown:
        logger.warning(f"{mla0.name}: curvature blow-up reached at t*={t_star:.17g}")
    else:
        logger.info(f"Ricci 흐름 적분 완료: R({times[-1]:.6g}) = {scalars[-1]:.9g}")

    return from_observables(alg, times, metrics, scalars, norms, volumes, breakdown, t_star)


# ── 검증 ──


def _time_derivative(values: np.ndarray, times: np.ndarray) -> tuple[np.ndarray, slice]:
    """
    균등 간격 자료의 시간 미분과 그 값이 유효한 인덱스 구간

    5점 이상이면 내부 점에서 4차 중심차분, 아니면 numpy.gradient.
    """
    if len(values) >= 5:
        h = times[1] - times[0]
        deriv = (-values[4:] + 8.0 * values[3:-1] - 8.0 * values[1:-3] + values[:-4]) / (12.0 * h)
        return deriv, slice(2, len(values) - 2)
    edge_order = 2 if len(values) >= 3 else 1
    return np.gradient(values, times, edge_order=edge_order), slice(0, len(values))


def verify_soliton_evolution(traj: FlowTrajectory, lam: float, tol: Tolerances | None = None) -> EvolutionCheck:
    """
    max_t |R(t) / (R0 / (1 + 2λt)) - 1| 와 ODE 형태 dR/dt = -2λR^2/R0 의 잔차

    R0 = 0 이면 닫힌 꼴 비교가 퇴화하므로 max |R(t) - R0| 를 보고한다.
    """
    tol = tol or default_tolerances()
    R0 = float(traj.scalars[0])
    if abs(R0) <= tol.tol_alg:
        drift = float(np.abs(traj.scalars - R0).max())
        return EvolutionCheck(
            deviation=drift, degenerate=True, message="steady/flat: use dR/dt ≡ 0 check instead"
        )
    ratio = traj.scalars / scalar_evolution(R0, lam, traj.times)
    deviation = float(np.abs(ratio - 1.0).max())
    ode_residual = None
    if len(traj) >= 3:
        deriv, valid = _time_derivative(traj.scalars, traj.times)
        expected = scalar_evolution_rate(traj.scalars[valid], R0, lam)
        ode_residual = float(np.abs(deriv - expected).max())
    logger.debug(f"soliton 진화 편차 (λ={lam:.6g}): {deviation:.3e}, ODE 잔차 {ode_residual}")
    return EvolutionCheck(deviation=deviation, ode_residual=ode_residual)


def verify_heat_law(traj: FlowTrajectory, tol: Tolerances | None = None) -> HeatLawCheck:
    """
    유한차분 dR/dt 와 2|Ric|^2 의 최대 차이, 그리고 R(t) 가 비감소인지 확인한다.

    Raises:
        PreconditionError: 기록 점이 3 개 미만
    """
    tol = tol or default_tolerances()
    if len(traj) < 3:
        raise PreconditionError("heat law check needs at least 3 trajectory points")
    deriv, valid = _time_derivative(traj.scalars, traj.times)
    residual = float(np.abs(deriv - 2.0 * traj.ricci_norms[valid]).max())
    slopes = np.diff(traj.scalars) / np.diff(traj.times)
    nondecreasing = bool(np.all(slopes >= -tol.tol_flow))
    return HeatLawCheck(residual=residual, nondecreasing=nondecreasing)


def verify_rv_monotonicity(traj: FlowTrajectory, tol: Tolerances | None = None) -> MonotonicityCheck:
    """
    R·V^{2/n} 의 이산 기울기 최솟값과 기대 기울기 2‖Ric - (R/n)g‖^2 V^{2/n} 와의 상대 차이

    차이는 열 방정식 검증과 같은 시간 미분 (5 점 이상이면 4차 중심차분) 으로 잰다.
    2 점뿐이면 간격 양 끝의 사다리꼴 평균과 비교한다.

    Raises:
        PreconditionError: 기록 점이 2 개 미만
    """
    tol = tol or default_tolerances()
    if len(traj) < 2:
        raise PreconditionError("monotonicity check needs at least 2 trajectory points")
    slopes = np.diff(traj.rv_invariant) / np.diff(traj.times)
    rate = 2.0 * traj.traceless_norms() * traj.volumes ** (2.0 / traj.dim)
    if len(traj) >= 3:
        deriv, valid = _time_derivative(traj.rv_invariant, traj.times)
        expected = rate[valid]
    else:
        deriv, expected = slopes, 0.5 * (rate[1:] + rate[:-1])
    scale = max(float(np.abs(expected).max()), 1.0)
    mismatch = float(np.abs(deriv - expected).max()) / scale
    return MonotonicityCheck(
        min_slope=float(slopes.min()), mismatch=mismatch, consistent=mismatch <= tol.tol_flow
    )


def ricci_shape(alg: LieAlgebra, metric: np.ndarray, tol: Tolerances | None = None) -> np.ndarray:
    """ℓ2 정규화된 정렬 Ricci 고유값 (평탄이면 0 벡터)"""
    tol = tol or default_tolerances()
    eigenvalues = curvature(MetricLieAlgebra(alg, metric)).ricci_eigenvalues()
    length = float(np.linalg.norm(eigenvalues))
    if length <= tol.tol_alg:
        return np.zeros_like(eigenvalues)
    return eigenvalues / length


def verify_self_similarity(traj: FlowTrajectory, tol: Tolerances | None = None) -> float:
    """t=0 대비 정규화 Ricci 스펙트럼의 최대 편차"""
    tol = tol or default_tolerances()
    reference = ricci_shape(traj.alg, traj.metrics[0], tol)
    deviation = 0.0
    for metric in traj.metrics[1:]:
        deviation = max(deviation, float(np.abs(ricci_shape(traj.alg, metric, tol) - reference).max()))
    return deviation


def verify_volume_law(traj: FlowTrajectory) -> float:
    """max |d/dt det g + 2R det g| (유한차분)"""
    if len(traj) < 2:
        raise PreconditionError("volume law check needs at least 2 trajectory points")
    det = traj.volumes ** 2
    deriv, valid = _time_derivative(det, traj.times)
    return float(np.abs(deriv + 2.0 * traj.scalars[valid] * det[valid]).max())


def verify_monotone_scalar(traj: FlowTrajectory) -> bool:
    """시간 방향으로 R(t) 가 엄격히 증가하는지 (주기 궤도 부재)"""
    if len(traj) < 2:
        return True
    slopes = np.diff(traj.scalars) / np.diff(traj.times)
    return bool(np.all(slopes > 0.0))


def zero_pattern_drift(traj: FlowTrajectory) -> float:
    """처음에 0 인 계량 성분들의 궤적 위 최대 절댓값"""
    mask = traj.metrics[0] == 0.0
    if not mask.any():
        return 0.0
    return float(np.abs(traj.metrics[:, mask]).max())
