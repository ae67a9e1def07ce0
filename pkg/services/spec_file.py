"""
파일 형식 모듈

1) 대수 명세 파일 (줄 단위 UTF-8 텍스트)

    # 주석
    name heis3
    dim 3
    tag nilpotent
    bracket 1 2 3 1.0        # c[1][2][3] = 1 (1-기반, 반대칭 완성)
    metric                   # 선택, dim 개의 행
    1.0 0.0 0.0
    ...

   정규형: name, dim, tag, bracket (i < j, 사전순), metric 순서이며 값은 repr(float).

2) 흐름 궤적 CSV (pandas, 17 유효숫자)
    t, g_11, g_12, ..., g_nn (상삼각 행 우선), R, ricci_norm_sq, V, rv_invariant
   붕괴 여부와 t* 는 CSV 에 없고 stderr 요약으로만 보고된다.
"""

import io
import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from services.errors import ValidationError
from services.flow_sim import FlowTrajectory, from_observables
from services.lie_core import LieAlgebra, validate_algebra
from services.metric_geometry import MetricLieAlgebra
from services.settings import Tolerances, default_tolerances

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
OBSERVABLE_COLUMNS = ["R", "ricci_norm_sq", "V", "rv_invariant"]


@dataclass(frozen=True)
class AlgebraSpecFile:
    """
    대수 명세 (인덱스는 0-기반으로 보관, 파일에서는 1-기반)

    brackets: (i, j, k, value) 항목, c[i][j][k] = value
    metric: 대칭 행렬 또는 None (단위 계량)
    tags: 자유 형식 메타데이터
    """

    name: str
    dim: int
    brackets: tuple[tuple[int, int, int, float], ...] = field(default_factory=tuple)
    metric: tuple[tuple[float, ...], ...] | None = None
    tags: tuple[str, ...] = field(default_factory=tuple)

    def canonical(self) -> "AlgebraSpecFile":
        """i < j 로 뒤집고 정렬한 정규형"""
        entries = []
        for i, j, k, value in self.brackets:
            if i > j:
                i, j, value = j, i, -value
            entries.append((i, j, k, float(value)))
        return AlgebraSpecFile(
            name=self.name,
            dim=self.dim,
            brackets=tuple(sorted(entries)),
            metric=self.metric,
            tags=self.tags,
        )

    def to_algebra(self) -> LieAlgebra:
        return LieAlgebra.from_brackets(self.dim, self.brackets, name=self.name)

    def to_metric_lie_algebra(self, tol: Tolerances | None = None) -> MetricLieAlgebra:
        """Jacobi 검증을 거친 MetricLieAlgebra"""
        alg = validate_algebra(self.to_algebra(), tol or default_tolerances())
        metric = None if self.metric is None else np.array(self.metric, dtype=float)
        return MetricLieAlgebra(alg, metric)


# ── 대수 명세 파일 ──


def _fail(line_no: int, message: str) -> ValidationError:
    return ValidationError(f"line {line_no}: {message}")


def _parse_float(text: str, line_no: int) -> float:
    try:
        value = float(text)
    except ValueError as e:
        raise _fail(line_no, f"not a number: {text!r}") from e
    if not np.isfinite(value):
        raise _fail(line_no, f"non-finite value: {text!r}")
    return value


def _parse_int(text: str, line_no: int) -> int:
    try:
        return int(text)
    except ValueError as e:
        raise _fail(line_no, f"not an integer: {text!r}") from e


def parse_spec(text: str) -> AlgebraSpecFile:
    """
    명세 텍스트를 파싱한다.

    Raises:
        ValidationError: 알 수 없는 키워드, 범위 밖 인덱스, 중복 항목, 잘못된 metric 블록
    """
    name: str | None = None
    dim: int | None = None
    tags: list[str] = []
    brackets: list[tuple[int, int, int, float]] = []
    seen: dict[tuple[int, int, int], int] = {}
    metric_rows: list[tuple[float, ...]] | None = None
    reading_metric = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        keyword = tokens[0]

        if reading_metric and keyword not in ("name", "dim", "tag", "bracket", "metric"):
            row = tuple(_parse_float(tok, line_no) for tok in tokens)
            if dim is not None and len(row) != dim:
                raise _fail(line_no, f"metric row needs {dim} entries (got {len(row)})")
            metric_rows.append(row)
            continue
        reading_metric = False

        if keyword == "name":
            if len(tokens) != 2:
                raise _fail(line_no, "expected 'name <identifier>'")
            name = tokens[1]
        elif keyword == "dim":
            if len(tokens) != 2:
                raise _fail(line_no, "expected 'dim <n>'")
            dim = _parse_int(tokens[1], line_no)
            if dim < 1:
                raise _fail(line_no, f"dim must be positive (got {dim})")
        elif keyword == "tag":
            tags.extend(tokens[1:])
        elif keyword == "bracket":
            if dim is None:
                raise _fail(line_no, "'dim' must precede brackets")
            if len(tokens) != 5:
                raise _fail(line_no, "expected 'bracket i j k value'")
            i, j, k = (_parse_int(tok, line_no) for tok in tokens[1:4])
            value = _parse_float(tokens[4], line_no)
            if not all(1 <= idx <= dim for idx in (i, j, k)):
                raise ValidationError(
                    f"line {line_no}: index out of range 1..{dim}: ({i}, {j}, {k})",
                    index=(i, j, k),
                )
            if i == j:
                raise ValidationError(f"line {line_no}: [e{i}, e{i}] must vanish", index=(i, j, k))
            key = (min(i, j), max(i, j), k)
            if key in seen:
                raise ValidationError(
                    f"line {line_no}: duplicate bracket ({i}, {j}, {k}) (first on line {seen[key]})",
                    index=(i, j, k),
                )
            seen[key] = line_no
            brackets.append((i - 1, j - 1, k - 1, value))
        elif keyword == "metric":
            if len(tokens) != 1:
                raise _fail(line_no, "expected 'metric' alone on its line")
            if metric_rows is not None:
                raise _fail(line_no, "duplicate metric block")
            metric_rows = []
            reading_metric = True
        else:
            raise _fail(line_no, f"unknown keyword {keyword!r}")

    if name is None or dim is None:
        raise ValidationError("spec file needs both 'name' and 'dim'")
    if metric_rows is not None and len(metric_rows) != dim:
        raise ValidationError(f"metric block needs {dim} rows (got {len(metric_rows)})")
    if metric_rows is not None and any(len(row) != dim for row in metric_rows):
        raise ValidationError(f"metric rows need {dim} entries each")

    return AlgebraSpecFile(
        name=name,
        dim=dim,
        brackets=tuple(brackets),
        metric=None if metric_rows is None else tuple(metric_rows),
        tags=tuple(tags),
    )


def write_spec(spec: AlgebraSpecFile) -> str:
    """정규형 텍스트로 직렬화한다."""
    spec = spec.canonical()
    lines = [f"name {spec.name}", f"dim {spec.dim}"]
    lines.extend(f"tag {tag}" for tag in spec.tags)
    lines.extend(
        f"bracket {i + 1} {j + 1} {k + 1} {float(value)!r}" for i, j, k, value in spec.brackets
    )
    if spec.metric is not None:
        lines.append("metric")
        lines.extend(" ".join(repr(float(v)) for v in row) for row in spec.metric)
    return "\n".join(lines) + "\n"


def load_spec(path: str) -> AlgebraSpecFile:
    with open(path, "r", encoding="utf-8") as f:
        return parse_spec(f.read())


def spec_from_metric_lie_algebra(mla: MetricLieAlgebra, tags=()) -> AlgebraSpecFile:
    """MetricLieAlgebra → 정규형 명세 (단위 계량이면 metric 생략)"""
    c = mla.alg.structure
    n = mla.dim
    brackets = tuple(
        (i, j, k, float(c[i, j, k]))
        for i in range(n)
        for j in range(i + 1, n)
        for k in range(n)
        if c[i, j, k] != 0.0
    )
    metric = None
    if not np.array_equal(mla.metric, np.eye(n)):
        metric = tuple(tuple(float(v) for v in row) for row in mla.metric)
    return AlgebraSpecFile(
        name=mla.name or "unnamed", dim=n, brackets=brackets, metric=metric, tags=tuple(tags)
    )


# ── 궤적 CSV ──


def trajectory_columns(dim: int) -> list[str]:
    sep = "" if dim < 10 else "_"
    metric_columns = [f"g_{i + 1}{sep}{j + 1}" for i in range(dim) for j in range(i, dim)]
    return ["t"] + metric_columns + OBSERVABLE_COLUMNS


def trajectory_frame(traj: FlowTrajectory) -> pd.DataFrame:
    n = traj.dim
    rows, cols = np.triu_indices(n)
    data = np.column_stack(
        [
            traj.times,
            traj.metrics[:, rows, cols],
            traj.scalars,
            traj.ricci_norms,
            traj.volumes,
            traj.rv_invariant,
        ]
    )
    return pd.DataFrame(data, columns=trajectory_columns(n))


def write_trajectory_csv(traj: FlowTrajectory, path_or_buffer=None) -> str | None:
    """
    궤적을 CSV 로 쓴다 (path_or_buffer 가 None 이면 문자열 반환).
    """
    frame = trajectory_frame(traj)
    return frame.to_csv(
        path_or_buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )


def read_trajectory_csv(source, alg: LieAlgebra, t_star: float | None = None) -> FlowTrajectory:
    """
    CSV 를 다시 읽어 궤적을 복원한다 (관측량은 기록값 그대로).

    CSV 에는 붕괴 여부가 없다. 붕괴한 궤적이면 stderr 로 보고된 t* 를 t_star 로 넘긴다.

    Args:
        source: 경로, 파일 객체 또는 CSV 문자열을 담은 io.StringIO
        alg: 궤적의 Lie 대수 (열 개수 검증용)
        t_star: 붕괴 시각 (주면 breakdown=True)
    """
    if isinstance(source, str) and "\n" in source:
        source = io.StringIO(source)
    frame = pd.read_csv(source, float_precision="round_trip")
    n = alg.dim
    expected = trajectory_columns(n)
    if list(frame.columns) != expected:
        raise ValidationError(f"trajectory columns do not match dim {n}: {list(frame.columns)}")

    rows, cols = np.triu_indices(n)
    metrics = np.zeros((len(frame), n, n))
    upper = frame[expected[1:-len(OBSERVABLE_COLUMNS)]].to_numpy(dtype=float)
    metrics[:, rows, cols] = upper
    metrics[:, cols, rows] = upper

    return from_observables(
        alg,
        frame["t"].to_numpy(dtype=float),
        metrics,
        frame["R"].to_numpy(dtype=float),
        frame["ricci_norm_sq"].to_numpy(dtype=float),
        frame["V"].to_numpy(dtype=float),
        breakdown=t_star is not None,
        t_star=t_star,
    )
