"""
정리 검증 스위트

카탈로그의 각 대수에 대해 적용 가능한 정리 사례를 실행하고 통과/실패 행을 만든다.
항목들은 스레드 풀에서 동시에 평가하지만 출력 순서는 카탈로그 순서를 따른다.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from services.catalog import CatalogEntry, catalog
from services.errors import LieSolitonError
from services.flow_sim import integrate_flow, verify_rv_monotonicity, verify_soliton_evolution
from services.lie_core import is_solvable, is_unimodular, lower_central_series, trace_form
from services.metric_geometry import MetricLieAlgebra, divergence_left_invariant, is_flat
from services.settings import Settings, get_settings
from services.soliton_solver import (
    FEASIBLE_VERDICTS,
    SolitonType,
    Verdict,
    gradient_obstruction,
    solve_left_invariant_field,
    soliton_certificate,
    soliton_field_divergence,
    solve_nilsoliton,
    symmetrize_derivation,
)
from services.two_step import (
    decompose_two_step,
    find_einstein_scale,
    is_einstein,
    is_htype,
    is_nonsingular,
    ricci_kernel_two_step,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TheoremRow:
    theorem: str
    instance: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class TheoremReport:
    rows: list[TheoremRow]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failures(self) -> list[TheoremRow]:
        return [row for row in self.rows if not row.passed]


class TheoremSuite:
    def __init__(self, settings: Settings | None = None, entries: list[CatalogEntry] | None = None):
        self.settings = settings or get_settings()
        self.tol = self.settings.tolerances
        self.entries = catalog() if entries is None else list(entries)

    def run(self) -> TheoremReport:
        """모든 항목을 평가한다 (빈 카탈로그면 경고 후 빈 보고서)."""
        if not self.entries:
            logger.warning("카탈로그가 비어 있습니다: 검증할 정리 사례가 없습니다")
            return TheoremReport(rows=[])

        logger.info(f"정리 검증 시작: {len(self.entries)}개 항목")
        with ThreadPoolExecutor(max_workers=self.settings.max_workers) as pool:
            per_entry = list(pool.map(self._evaluate_entry, self.entries))

        rows = [row for entry_rows in per_entry for row in entry_rows]
        report = TheoremReport(rows=rows)
        logger.info(f"정리 검증 완료: {len(rows) - len(report.failures)}/{len(rows)} 통과")
        return report

    def _evaluate_entry(self, entry: CatalogEntry) -> list[TheoremRow]:
        try:
            mla = entry.build()
        except LieSolitonError as e:
            return [TheoremRow("catalog-entry", entry.name, False, str(e))]

        checks: list[tuple[str, Callable[[MetricLieAlgebra], tuple[bool, str] | None]]] = [
            ("divergence-trace", self._divergence_trace),
            ("unimodular-divergence-free", self._unimodular_divergence_free),
            ("left-invariant-nonsolvability", self._left_invariant_nonsolvability),
            ("solvable-sign-law", self._solvable_sign_law),
            ("solvable-expanding", self._solvable_expanding),
            ("steady-nonexistence", self._steady_nonexistence),
            ("soliton-divergence", self._soliton_divergence),
            ("htype-expanding-non-gradient", self._htype_expanding_non_gradient),
            ("nonsingular-kernel", self._nonsingular_kernel),
            ("einstein-extension", self._einstein_extension),
            ("soliton-evolution", self._soliton_evolution),
            ("rv-monotonicity", self._rv_monotonicity),
        ]
        rows = []
        for theorem, check in checks:
            try:
                outcome = check(mla)
            except LieSolitonError as e:
                rows.append(TheoremRow(theorem, entry.name, False, f"error: {e}"))
                continue
            if outcome is None:
                continue  # 적용 대상 아님
            passed, detail = outcome
            if not passed:
                logger.error(f"정리 검증 실패: {theorem} / {entry.name}: {detail}")
            rows.append(TheoremRow(theorem, entry.name, passed, detail))
        return rows

    # ── 개별 정리 ──

    def _divergence_trace(self, mla):
        """좌불변 벡터장의 발산 = -tr(ad X)"""
        tau = trace_form(mla.alg)
        eye = np.eye(mla.dim)
        worst = max(abs(divergence_left_invariant(mla, eye[k]) + tau[k]) for k in range(mla.dim))
        return worst <= self.tol.tol_alg, f"max |div e_k + tr ad e_k| = {worst:.3e}"

    def _unimodular_divergence_free(self, mla):
        if not is_unimodular(mla.alg, self.tol):
            return None
        eye = np.eye(mla.dim)
        worst = max(abs(divergence_left_invariant(mla, eye[k])) for k in range(mla.dim))
        return worst <= self.tol.tol_alg, f"max |div e_k| = {worst:.3e}"

    def _left_invariant_nonsolvability(self, mla):
        # 단모듈 대수와 3차원 비단모듈 대수
        if not (is_unimodular(mla.alg, self.tol) or mla.dim == 3):
            return None
        cert = solve_left_invariant_field(mla, self.tol)
        passed = cert.verdict in (Verdict.EINSTEIN, Verdict.INFEASIBLE)
        return passed, f"{cert.verdict.value}, residual {cert.residual:.3e}"

    def _solvable_sign_law(self, mla):
        if not is_solvable(mla.alg, self.tol):
            return None
        flat = is_flat(mla, self.tol)
        scalar = self._certificate(mla).scalar
        passed = flat or scalar < -self.tol.tol_alg
        return passed, f"scalar {scalar:.9g}, flat {flat}"

    def _solvable_expanding(self, mla):
        if not is_solvable(mla.alg, self.tol):
            return None
        cert = self._certificate(mla)
        if cert.verdict not in FEASIBLE_VERDICTS:
            return True, f"no soliton ({cert.verdict.value})"
        passed = cert.soliton_type in (SolitonType.EXPANDING, SolitonType.TRIVIAL)
        return passed, f"{cert.verdict.value}, {cert.soliton_type.value if cert.soliton_type else '-'}"

    def _steady_nonexistence(self, mla):
        cert = self._certificate(mla)
        if cert.verdict not in FEASIBLE_VERDICTS or abs(cert.scalar) <= self.tol.tol_alg:
            return None
        product = cert.lam * cert.scalar
        return product < 0 and cert.consistent, f"lambda*R0 = {product:.9g}"

    def _soliton_divergence(self, mla):
        """비자명 soliton 벡터장의 발산은 0 이 아닌 상수, 자명하면 0"""
        cert = self._certificate(mla)
        if cert.verdict not in FEASIBLE_VERDICTS:
            return None
        div = soliton_field_divergence(mla, cert)
        agree = div.mismatch <= 10.0 * self.tol.tol_sol * np.sqrt(mla.dim)
        if cert.verdict == Verdict.EINSTEIN:
            nonzero_ok = abs(div.field) <= self.tol.tol_alg
        else:
            nonzero_ok = abs(div.field) > self.tol.tol_rank
        return agree and nonzero_ok, f"div X = {div.field:.9g}, -R0-n*lambda = {div.trace:.9g}"

    def _htype_expanding_non_gradient(self, mla):
        if lower_central_series(mla.alg, self.tol).nilpotency_class != 2:
            return None
        dec = decompose_two_step(mla, self.tol)
        if not is_htype(dec, self.tol):
            return None
        nonsingular = is_nonsingular(dec, self.tol, self.settings.sphere_samples)
        kernel_dim = ricci_kernel_two_step(dec, self.tol, strict=True).shape[1]
        gradient = gradient_obstruction(mla, self.tol).verdict
        cert = solve_nilsoliton(mla, self.tol)
        passed = (
            nonsingular
            and kernel_dim == 0
            and gradient == "not-gradient"
            and cert.verdict == Verdict.NILSOLITON
            and cert.soliton_type == SolitonType.EXPANDING
        )
        kind = cert.soliton_type.value if cert.soliton_type else "-"
        detail = (
            f"nonsingular {nonsingular}, kernel {kernel_dim}, {gradient}, "
            f"{cert.verdict.value} {kind}"
        )
        return passed, detail

    def _nonsingular_kernel(self, mla):
        if lower_central_series(mla.alg, self.tol).nilpotency_class != 2:
            return None
        dec = decompose_two_step(mla, self.tol)
        kernel_dim = ricci_kernel_two_step(dec, self.tol, strict=True).shape[1]
        if not is_nonsingular(dec, self.tol, self.settings.sphere_samples):
            return True, f"singular (kernel dim {kernel_dim})"
        gradient = gradient_obstruction(mla, self.tol).verdict
        return kernel_dim == 0 and gradient == "not-gradient", f"kernel {kernel_dim}, {gradient}"

    def _einstein_extension(self, mla):
        if not lower_central_series(mla.alg, self.tol).is_nilpotent:
            return None
        cert = solve_nilsoliton(mla, self.tol)
        if cert.verdict != Verdict.NILSOLITON:
            return None
        result = find_einstein_scale(mla, symmetrize_derivation(mla, cert.D), self.tol)
        return result.found, f"s={result.scale:.12g}, residual {result.residual:.3e}"

    def _soliton_evolution(self, mla):
        cert = self._certificate(mla)
        if cert.verdict not in FEASIBLE_VERDICTS or abs(cert.scalar) <= self.tol.tol_alg:
            return None
        traj = self._trajectory(mla)
        check = verify_soliton_evolution(traj, cert.lam, self.tol)
        return check.deviation <= self.tol.tol_flow, f"deviation {check.deviation:.3e}"

    def _rv_monotonicity(self, mla):
        if is_flat(mla, self.tol):
            return None
        traj = self._trajectory(mla)
        check = verify_rv_monotonicity(traj, self.tol)
        if is_einstein(mla, self.tol).is_einstein:
            passed = abs(check.min_slope) <= 1e-6 and check.consistent
        else:
            passed = check.min_slope > 0 and check.consistent
        return passed, f"min slope {check.min_slope:.6g}, mismatch {check.mismatch:.3e}"

    # ── 보조 ──

    def _certificate(self, mla):
        return soliton_certificate(mla, self.tol)

    def _trajectory(self, mla):
        return integrate_flow(
            mla, self.settings.theorem_flow_t_end, self.settings.theorem_flow_dt, self.tol
        )
