"""
계량 Lie 대수 종합 분석기

lie_core → metric_geometry → soliton_solver → two_step (멱영 class 2) → 가해 확장
순서로 실행해 AnalysisReport 를 만든다.
"""
import logging
from dataclasses import dataclass, field

from services.errors import LieSolitonError
from services.lie_core import (
    center,
    check_jacobi,
    derivation_algebra,
    is_solvable,
    is_unimodular,
    lower_central_series,
)
from services.metric_geometry import MetricLieAlgebra, curvature, is_flat, ricci_signature
from services.settings import Settings, get_settings
from services.soliton_solver import (
    GradientReport,
    MilnorFrame,
    SolitonCertificate,
    Verdict,
    gradient_obstruction,
    milnor_frame,
    solve_left_invariant_field,
    solve_nilsoliton,
    symmetrize_derivation,
)
from services.two_step import (
    EinsteinScaleResult,
    decompose_two_step,
    find_einstein_scale,
    is_htype,
    is_nonsingular,
    ricci_kernel_two_step,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TwoStepSummary:
    center_dim: int
    nonsingular: bool
    htype: bool
    ricci_kernel_dim: int


@dataclass
class AnalysisReport:
    """대수 하나에 대한 분석 결과 (수치 판정은 tolerances 에 기록된 허용오차 기준)"""

    name: str
    dim: int
    tolerances: dict[str, float]
    jacobi_residual: float
    unimodular: bool
    solvable: bool
    lower_central_dims: list[int]
    nilpotency_class: int | None
    center_dim: int
    derivation_dim: int
    scalar: float
    ricci_norm_sq: float
    ricci_eigenvalues: list[float]
    ricci_signature: tuple[int, int, int]
    flat: bool
    certificate: SolitonCertificate
    field_certificate: SolitonCertificate
    gradient: GradientReport
    milnor: MilnorFrame | None = None
    two_step: TwoStepSummary | None = None
    extension: EinsteinScaleResult | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def nilpotency(self) -> str:
        if self.nilpotency_class is None:
            return "not nilpotent"
        return f"class {self.nilpotency_class}"


class AlgebraAnalyzer:
    def __init__(self, settings: Settings | None = None):
        self.settings = settings or get_settings()
        self.tol = self.settings.tolerances

    def analyze(self, mla: MetricLieAlgebra) -> AnalysisReport:
        """모든 분석 단계를 실행해 보고서를 만든다."""
        tol = self.tol
        alg = mla.alg
        logger.info(f"분석 시작: {mla.name} (dim {mla.dim})")

        # 1. 대수 구조
        logger.info("Step 1/5: 대수 구조 분석")
        lcs = lower_central_series(alg, tol)
        unimodular = is_unimodular(alg, tol)
        solvable = is_solvable(alg, tol)

        # 2. 곡률
        logger.info("Step 2/5: 곡률 계산")
        curv = curvature(mla)
        flat = is_flat(mla, tol)

        # 3. soliton 판정
        logger.info("Step 3/5: soliton 판정")
        field_certificate = solve_left_invariant_field(mla, tol)
        certificate = solve_nilsoliton(mla, tol) if lcs.is_nilpotent else field_certificate
        gradient = gradient_obstruction(mla, tol)
        notes = self._notes(solvable, flat, curv.scalar)

        milnor = None
        if mla.dim == 3 and not unimodular:
            milnor = milnor_frame(mla, tol)

        # 4. 2-step 자료
        two_step = None
        if lcs.nilpotency_class == 2:
            logger.info("Step 4/5: 2-step 분해")
            two_step = self._two_step_summary(mla)
        else:
            logger.info("Step 4/5: 2-step 분해 생략 (class != 2)")

        # 5. Einstein 확장
        extension = None
        if certificate.verdict == Verdict.NILSOLITON:
            logger.info("Step 5/5: Einstein 가해 확장 탐색")
            D_sym = symmetrize_derivation(mla, certificate.D)
            extension = find_einstein_scale(mla, D_sym, tol)
        else:
            logger.info("Step 5/5: 확장 생략 (nilsoliton 아님)")

        report = AnalysisReport(
            name=mla.name,
            dim=mla.dim,
            tolerances=tol.as_dict(),
            jacobi_residual=check_jacobi(alg),
            unimodular=unimodular,
            solvable=solvable,
            lower_central_dims=list(lcs.dims),
            nilpotency_class=lcs.nilpotency_class,
            center_dim=int(center(alg, tol).shape[1]),
            derivation_dim=derivation_algebra(alg, tol).dimension,
            scalar=curv.scalar,
            ricci_norm_sq=curv.ricci_norm_sq,
            ricci_eigenvalues=[float(v) for v in curv.ricci_eigenvalues()],
            ricci_signature=ricci_signature(curv, tol),
            flat=flat,
            certificate=certificate,
            field_certificate=field_certificate,
            gradient=gradient,
            milnor=milnor,
            two_step=two_step,
            extension=extension,
            notes=notes,
        )
        logger.info(f"분석 완료: {mla.name} → {certificate.verdict.value}")
        return report

    def _two_step_summary(self, mla: MetricLieAlgebra) -> TwoStepSummary | None:
        try:
            dec = decompose_two_step(mla, self.tol)
            kernel = ricci_kernel_two_step(dec, self.tol)
        except LieSolitonError as e:
            logger.error(f"2-step 분석 실패 ({mla.name}): {e}")
            return None
        return TwoStepSummary(
            center_dim=dec.center_dim,
            nonsingular=is_nonsingular(dec, self.tol, self.settings.sphere_samples),
            htype=is_htype(dec, self.tol),
            ricci_kernel_dim=int(kernel.shape[1]),
        )

    def _notes(self, solvable: bool, flat: bool, scalar: float) -> list[str]:
        notes = []
        if solvable and not flat:
            if scalar < -self.tol.tol_alg:
                notes.append("solvable with negative scalar curvature: any soliton must be expanding")
            else:
                notes.append("solvable but scalar curvature is not negative")
        if flat:
            notes.append("flat metric")
        return notes
