"""
liesoliton 명령행 도구

하위 명령:
- analyze  : 대수 구조, 곡률, soliton 판정, 2-step / 확장 분석 보고서
- flow     : 동차 Ricci 흐름 궤적 CSV 와 검증 요약
- extend   : 표준 가해 확장과 Einstein 판정
- theorems : 카탈로그 전체 정리 검증 표
- catalog  : 카탈로그 이름 목록

종료 코드: 0 정상, 1 정리 검증 실패, 2 입력 검증 실패, 3 흐름 붕괴, 4 전제 조건 위반
"""

import logging
import os
import sys
from functools import wraps

import click
import numpy as np

from scripts.analyzer import AlgebraAnalyzer
from scripts.report_generator import ReportGenerator
from scripts.theorem_suite import TheoremSuite
from services.catalog import catalog, get_algebra
from services.errors import FlowBreakdownError, LieSolitonError, PreconditionError, ValidationError
from services.flow_sim import (
    integrate_flow,
    verify_heat_law,
    verify_rv_monotonicity,
    verify_self_similarity,
    verify_soliton_evolution,
    verify_volume_law,
)
from services.lie_core import lower_central_series
from services.metric_geometry import MetricLieAlgebra, curvature
from services.settings import get_settings
from services.soliton_solver import (
    FEASIBLE_VERDICTS,
    Verdict,
    soliton_certificate,
    solve_nilsoliton,
    symmetrize_derivation,
)
from services.spec_file import load_spec, write_trajectory_csv
from services.two_step import find_einstein_scale, is_einstein, solvable_extension

logger = logging.getLogger(__name__)


def setup_logging():
    """로깅 설정 (stderr, 프로세스당 1회)"""
    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format=settings.log_format,
        stream=sys.stderr,
    )


def exit_on_error(func):
    """LieSolitonError 를 종료 코드로 변환한다."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except LieSolitonError as e:
            logger.error(f"{type(e).__name__}: {e}")
            click.echo(f"error: {e}", err=True)
            sys.exit(e.exit_code)

    return wrapper


def load_metric(path: str, dim: int) -> np.ndarray:
    """공백 구분 dim x dim 계량 파일 ('#' 주석 허용)"""
    try:
        metric = np.loadtxt(path, dtype=float, comments="#", ndmin=2)
    except ValueError as e:
        raise ValidationError(f"cannot parse metric file {path}: {e}") from e
    if metric.shape != (dim, dim):
        raise ValidationError(f"metric file {path} must hold a {dim}x{dim} matrix (got {metric.shape})")
    return metric


def resolve_input(source: str, metric_path: str | None = None) -> MetricLieAlgebra:
    """파일 경로면 명세 파일로, 아니면 카탈로그 이름으로 해석한다."""
    tol = get_settings().tolerances
    if os.path.isfile(source):
        logger.info(f"명세 파일 로드: {source}")
        mla = load_spec(source).to_metric_lie_algebra(tol)
    else:
        mla = get_algebra(source)
    if metric_path:
        mla = mla.with_metric(load_metric(metric_path, mla.dim))
    return mla


@click.group()
def cli():
    """liesoliton: 계량 Lie 대수의 좌불변 기하와 Ricci soliton 분석"""
    setup_logging()


@cli.command()
@click.argument("source")
@click.option("--metric", "metric_path", type=click.Path(exists=True, dir_okay=False), help="계량 행렬 파일")
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text", show_default=True)
@click.option("--no-banner", is_flag=True, help="생성 시각 헤더 생략")
@exit_on_error
def analyze(source, metric_path, fmt, no_banner):
    """대수 하나를 분석한다 (카탈로그 이름 또는 명세 파일)."""
    mla = resolve_input(source, metric_path)
    report = AlgebraAnalyzer().analyze(mla)
    click.echo(ReportGenerator().render_analysis(report, fmt=fmt, banner=not no_banner), nl=False)


@cli.command()
@click.argument("source")
@click.option("--metric", "metric_path", type=click.Path(exists=True, dir_okay=False), help="계량 행렬 파일")
@click.option("--t-end", "t_end", type=float, default=None, help="종료 시각 (음수면 후방 흐름)")
@click.option("--dt", type=float, default=None, help="RK4 간격")
@click.option("--lambda", "lam", type=float, default=None, help="soliton 상수 (생략 시 판정 결과 사용)")
@click.option("--output", "output", type=click.Path(dir_okay=False, writable=True), default=None,
              help="CSV 파일 (생략 시 stdout, 요약은 stderr)")
@exit_on_error
def flow(source, metric_path, t_end, dt, lam, output):
    """Ricci 흐름 궤적을 CSV 로 내보내고 진화 법칙을 검증한다."""
    settings = get_settings()
    tol = settings.tolerances
    mla = resolve_input(source, metric_path)
    t_end = settings.flow_t_end if t_end is None else t_end
    dt = settings.flow_dt if dt is None else dt

    if lam is None:
        certificate = soliton_certificate(mla, tol)
        if certificate.verdict in FEASIBLE_VERDICTS:
            lam = certificate.lam

    traj = integrate_flow(mla, t_end, dt, tol)
    csv_text = write_trajectory_csv(traj)
    if output:
        with open(output, "w", encoding="utf-8", newline="") as f:
            f.write(csv_text)
    else:
        click.echo(csv_text, nl=False)

    summary = {"points": str(len(traj)), "R(t_end)": f"{traj.scalars[-1]:.17g}"}
    if lam is not None:
        check = verify_soliton_evolution(traj, lam, tol)
        summary["soliton_evolution"] = check.message or f"{check.deviation:.3e} (lambda={lam:.9g})"
        if check.ode_residual is not None and not check.degenerate:
            summary["soliton_ode"] = f"{check.ode_residual:.3e}"
    if len(traj) >= 3:
        heat = verify_heat_law(traj, tol)
        summary["heat_law"] = f"{heat.residual:.3e} (nondecreasing {heat.nondecreasing})"
    if len(traj) >= 2:
        rv = verify_rv_monotonicity(traj, tol)
        summary["rv_min_slope"] = f"{rv.min_slope:.9g} (mismatch {rv.mismatch:.3e})"
        summary["volume_law"] = f"{verify_volume_law(traj):.3e}"
    summary["self_similarity"] = f"{verify_self_similarity(traj, tol):.3e}"
    click.echo(ReportGenerator().render_flow_summary(mla.name, summary), nl=False, err=not output)

    if traj.breakdown:
        raise FlowBreakdownError(traj.t_star)


@cli.command()
@click.argument("source")
@click.option("--metric", "metric_path", type=click.Path(exists=True, dir_okay=False), help="계량 행렬 파일")
@click.option("--scale", type=float, default=None, help="확장 스케일 s")
@click.option("--auto", "auto", is_flag=True, help="Einstein 스케일 자동 탐색")
@click.option("--no-banner", is_flag=True, help="생성 시각 헤더 생략")
@exit_on_error
def extend(source, metric_path, scale, auto, no_banner):
    """nilsoliton 미분으로 계수 1 가해 확장을 만들고 Einstein 여부를 판정한다."""
    if scale is not None and auto:
        raise click.UsageError("--scale and --auto are mutually exclusive")
    tol = get_settings().tolerances
    mla = resolve_input(source, metric_path)
    if not lower_central_series(mla.alg, tol).is_nilpotent:
        raise PreconditionError("solvable extension requires a nilpotent algebra")

    certificate = solve_nilsoliton(mla, tol)
    if certificate.verdict == Verdict.NILSOLITON:
        D = symmetrize_derivation(mla, certificate.D)
    elif certificate.verdict == Verdict.EINSTEIN and np.sqrt(curvature(mla).ricci_norm_sq) <= tol.tol_alg:
        # 평탄 (가환) 이면 D = I 로 쌍곡공간을 만든다
        D = np.eye(mla.dim)
    else:
        raise PreconditionError("no nilsoliton structure found")

    if scale is None:
        result = find_einstein_scale(mla, D, tol)
        scale = result.scale
    extension = solvable_extension(mla, D, scale, tol)
    check = is_einstein(extension.extended, tol)
    click.echo(
        ReportGenerator().render_extension(
            mla.name, scale, check.lambda_einstein, check.residual, check.is_einstein, banner=not no_banner
        ),
        nl=False,
    )


@cli.command()
@click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text", show_default=True)
@click.option("--no-banner", is_flag=True, help="생성 시각 헤더 생략")
@exit_on_error
def theorems(fmt, no_banner):
    """카탈로그 전체에 대해 정리 사례를 검증한다 (하나라도 실패하면 종료 코드 1)."""
    report = TheoremSuite().run()
    click.echo(ReportGenerator().render_theorems(report.rows, fmt=fmt, banner=not no_banner), nl=False)
    if not report.passed:
        first = report.failures[0]
        click.echo(f"error: theorem check failed: {first.theorem} / {first.instance}", err=True)
        sys.exit(1)


@cli.group(name="catalog")
def catalog_group():
    """카탈로그 관련 명령"""


@catalog_group.command(name="list")
def catalog_list():
    """카탈로그 이름과 설명을 출력한다."""
    for entry in catalog():
        tags = ",".join(entry.tags)
        click.echo(f"{entry.name}\t{tags}\t{entry.description}")


if __name__ == "__main__":
    cli()
