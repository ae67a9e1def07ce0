"""
분석 / 흐름 / 확장 / 정리 검증 결과 출력기

- text: 사람이 읽는 보고서 (jinja2 템플릿, 선택적 생성 시각 배너)
- csv: 기계 판독용 (field, value, tolerance), 17 유효숫자
"""
import io
import logging
import os
from datetime import datetime

import numpy as np
import pandas as pd
from jinja2 import Environment, FileSystemLoader

from scripts.analyzer import AnalysisReport
from services.settings import BASE_DIR, Settings, get_settings

logger = logging.getLogger(__name__)

TEMPLATE_DIR = os.path.join(BASE_DIR, "templates")


def _num(value) -> str:
    if value is None:
        return "-"
    return f"{float(value):.9g}"


def _full(value) -> str:
    return "%.17g" % float(value)


def _tol(value) -> str:
    return repr(float(value))


def _yesno(value) -> str:
    return "yes" if value else "no"


def _spectrum(values) -> str:
    return "[" + ", ".join(_num(v) for v in np.asarray(values, dtype=float)) + "]"


def _eigenvalues(matrix) -> list[float]:
    return sorted(float(v) for v in np.real(np.linalg.eigvals(np.asarray(matrix, dtype=float))))


class ReportGenerator:
    def __init__(self, settings: Settings | None = None):
        self.settings = settings or get_settings()
        self.env = Environment(
            loader=FileSystemLoader(TEMPLATE_DIR),
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
        )
        self.env.filters.update(num=_num, yesno=_yesno, spectrum=_spectrum, eigenvalues=_eigenvalues)

    # ── 분석 보고서 ──

    def render_analysis(self, report: AnalysisReport, fmt: str = "text", banner: bool = True) -> str:
        """분석 보고서를 text 또는 csv 로 만든다."""
        if fmt == "csv":
            return self._analysis_csv(report)
        template = self.env.get_template("analysis_report.txt.j2")
        return template.render(r=report, banner=banner, generated_at=self._timestamp())

    def _analysis_csv(self, report: AnalysisReport) -> str:
        tol = report.tolerances
        cert = report.certificate
        rows = [
            ("name", report.name, ""),
            ("dim", str(report.dim), ""),
            ("jacobi_residual", _full(report.jacobi_residual), _tol(tol["tol_alg"])),
            ("unimodular", _yesno(report.unimodular), _tol(tol["tol_alg"])),
            ("solvable", _yesno(report.solvable), _tol(tol["tol_rank"])),
            ("nilpotency", report.nilpotency, _tol(tol["tol_rank"])),
            ("center_dim", str(report.center_dim), _tol(tol["tol_rank"])),
            ("derivation_dim", str(report.derivation_dim), _tol(tol["tol_rank"])),
            ("scalar", _full(report.scalar), _tol(tol["tol_alg"])),
            ("ricci_norm_sq", _full(report.ricci_norm_sq), _tol(tol["tol_alg"])),
        ]
        rows += [
            (f"ricci_eigenvalue_{i + 1}", _full(v), _tol(tol["tol_alg"]))
            for i, v in enumerate(report.ricci_eigenvalues)
        ]
        rows += [
            ("flat", _yesno(report.flat), _tol(tol["tol_alg"])),
            ("verdict", cert.verdict.value, _tol(tol["tol_sol"])),
            ("residual", _full(cert.residual), _tol(tol["tol_sol"])),
            ("soliton_type", cert.soliton_type.value if cert.soliton_type else "", _tol(tol["tol_rank"])),
        ]
        if cert.c is not None:
            rows.append(("c", _full(cert.c), _tol(tol["tol_sol"])))
        if cert.lam is not None:
            rows.append(("lambda", _full(cert.lam), _tol(tol["tol_sol"])))
        rows += [
            ("field_verdict", report.field_certificate.verdict.value, _tol(tol["tol_sol"])),
            ("field_residual", _full(report.field_certificate.residual), _tol(tol["tol_sol"])),
            ("gradient", report.gradient.verdict, _tol(tol["tol_rank"])),
        ]
        if report.two_step is not None:
            rows += [
                ("two_step_nonsingular", _yesno(report.two_step.nonsingular), _tol(tol["tol_rank"])),
                ("two_step_htype", _yesno(report.two_step.htype), _tol(tol["tol_alg"])),
                ("two_step_ricci_kernel_dim", str(report.two_step.ricci_kernel_dim), _tol(tol["tol_rank"])),
            ]
        if report.extension is not None:
            rows += [
                ("extension_scale", _full(report.extension.scale), _tol(tol["tol_sol"])),
                ("extension_residual", _full(report.extension.residual), _tol(tol["tol_sol"])),
            ]
        return self._to_csv(rows, ["field", "value", "tolerance"])

    # ── 흐름 / 확장 / 정리 ──

    def render_flow_summary(self, name: str, summary: dict[str, str]) -> str:
        lines = [f"== flow summary: {name} =="]
        width = max((len(key) for key in summary), default=0)
        for key, value in summary.items():
            lines.append(f"  {key.ljust(width)} : {value}")
        return "\n".join(lines) + "\n"

    def render_extension(self, name: str, scale: float, lambda_einstein: float, residual: float,
                         einstein: bool, banner: bool = True) -> str:
        lines = []
        if banner:
            lines += ["# liesoliton extension report", f"# 생성 시각: {self._timestamp()}", ""]
        lines += [
            f"== extension: {name} ==",
            f"  scale           : {_full(scale)}",
            f"  lambda_einstein : {_full(lambda_einstein)}",
            f"  residual        : {_full(residual)}",
            f"  einstein        : {_yesno(einstein)}",
        ]
        return "\n".join(lines) + "\n"

    def render_theorems(self, rows, fmt: str = "text", banner: bool = True) -> str:
        """정리 검증 표 (행 순서는 카탈로그 순서)"""
        records = [(row.theorem, row.instance, "PASS" if row.passed else "FAIL", row.detail) for row in rows]
        if fmt == "csv":
            return self._to_csv(records, ["theorem", "instance", "result", "detail"])

        lines = []
        if banner:
            lines += ["# liesoliton theorem suite", f"# 생성 시각: {self._timestamp()}", ""]
        if not records:
            lines.append("(no theorem instances)")
            return "\n".join(lines) + "\n"
        w_theorem = max(len(r[0]) for r in records)
        w_instance = max(len(r[1]) for r in records)
        for theorem, instance, result, detail in records:
            lines.append(f"{result}  {theorem.ljust(w_theorem)}  {instance.ljust(w_instance)}  {detail}".rstrip())
        failed = sum(1 for r in records if r[2] == "FAIL")
        lines.append("")
        lines.append(f"{len(records) - failed}/{len(records)} passed")
        return "\n".join(lines) + "\n"

    def _to_csv(self, rows, columns) -> str:
        frame = pd.DataFrame(rows, columns=columns, dtype=str)
        buffer = io.StringIO()
        frame.to_csv(buffer, index=False, lineterminator="\n")
        return buffer.getvalue()

    def _timestamp(self) -> str:
        return datetime.now().strftime("%Y-%m-%d %H:%M:%S")
