import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.strategies import composite
import hypothesis.strategies as st
from numpy.testing import assert_array_equal

from services.catalog import get_algebra
from services.errors import ValidationError
from services.flow_sim import integrate_flow
from services.spec_file import (
    AlgebraSpecFile,
    load_spec,
    parse_spec,
    read_trajectory_csv,
    spec_from_metric_lie_algebra,
    trajectory_columns,
    write_spec,
    write_trajectory_csv,
)

HEIS3_TEXT = """\
# 3차원 Heisenberg
name heis3
dim 3
tag nilpotent
bracket 2 1 3 -1.0   # [e2,e1] = -e3
metric
1.0 0.0 0.0
0.0 1.0 0.0
0.0 0.0 4.0
"""


def test_parse_spec():
    spec = parse_spec(HEIS3_TEXT)
    assert spec.name == "heis3"
    assert spec.dim == 3
    assert spec.tags == ("nilpotent",)
    assert spec.brackets == ((1, 0, 2, -1.0),)
    mla = spec.to_metric_lie_algebra()
    assert mla.alg.structure[0, 1, 2] == 1.0
    assert mla.metric[2, 2] == 4.0


def test_canonical_output_is_stable():
    text = write_spec(parse_spec(HEIS3_TEXT))
    assert text.splitlines()[3] == "bracket 1 2 3 1.0"
    assert write_spec(parse_spec(text)) == text


def test_spec_from_catalog_algebra():
    spec = spec_from_metric_lie_algebra(get_algebra("nil4"))
    assert spec.metric is None
    assert write_spec(spec) == "name nil4\ndim 4\nbracket 1 2 3 1.0\nbracket 1 3 4 1.0\n"


def test_load_spec(tmp_path):
    path = tmp_path / "heis3.alg"
    path.write_text(HEIS3_TEXT, encoding="utf-8")
    assert load_spec(str(path)) == parse_spec(HEIS3_TEXT)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("name x\ndim 3\nbracket 1 2 4 1.0\n", "out of range"),
        ("name x\ndim 3\nbracket 1 2 3 1.0\nbracket 2 1 3 1.0\n", "duplicate"),
        ("name x\ndim 3\nbracket 2 2 3 1.0\n", "must vanish"),
        ("name x\ndim 3\nbraket 1 2 3 1.0\n", "unknown keyword"),
        ("name x\ndim 2\nmetric\n1 0\n", "2 rows"),
        ("name x\ndim 2\nbracket 1 2 1 abc\n", "not a number"),
        ("dim 2\n", "name"),
        ("name x\ndim 2\nmetric 1 0\n0 1\n", "alone"),
    ],
)
def test_parse_errors(text, fragment):
    with pytest.raises(ValidationError, match=fragment):
        parse_spec(text)


def test_out_of_range_index_is_reported():
    with pytest.raises(ValidationError) as excinfo:
        parse_spec("name x\ndim 3\nbracket 1 2 4 1.0\n")
    assert excinfo.value.index == (1, 2, 4)


def test_metric_line_with_values_names_its_line():
    with pytest.raises(ValidationError, match="line 3"):
        parse_spec("name x\ndim 2\nmetric 1 0 0 1\n1 0\n0 1\n")


def test_jacobi_failure_on_load():
    spec = parse_spec("name broken\ndim 3\nbracket 1 2 3 1.0\nbracket 1 3 1 1.0\n")
    with pytest.raises(ValidationError, match="Jacobi"):
        spec.to_metric_lie_algebra()


def test_trajectory_columns():
    assert trajectory_columns(2) == ["t", "g_11", "g_12", "g_22", "R", "ricci_norm_sq", "V", "rv_invariant"]
    assert "g_1_10" in trajectory_columns(10)


def test_trajectory_csv_reproduces_observables(heis3):
    traj = integrate_flow(heis3.with_metric(np.diag([1.0, 2.0, 0.5])), 0.05, 1e-2)
    text = write_trajectory_csv(traj)
    assert text.splitlines()[0] == ",".join(trajectory_columns(3))
    restored = read_trajectory_csv(text, heis3.alg)
    assert_array_equal(restored.times, traj.times)
    assert_array_equal(restored.metrics, traj.metrics)
    assert_array_equal(restored.scalars, traj.scalars)
    assert_array_equal(restored.ricci_norms, traj.ricci_norms)
    assert_array_equal(restored.volumes, traj.volumes)
    assert_array_equal(restored.rv_invariant, traj.rv_invariant)


def test_trajectory_csv_to_buffer(heis3):
    traj = integrate_flow(heis3, 0.02, 1e-2)
    buffer = io.StringIO()
    assert write_trajectory_csv(traj, buffer) is None
    assert buffer.getvalue() == write_trajectory_csv(traj)


def test_trajectory_csv_dimension_mismatch(heis3):
    text = write_trajectory_csv(integrate_flow(heis3, 0.02, 1e-2))
    with pytest.raises(ValidationError, match="columns"):
        read_trajectory_csv(text, get_algebra("nil4").alg)


def test_spec_dataclass_canonical_flips_order():
    spec = AlgebraSpecFile(name="x", dim=3, brackets=((1, 0, 2, 2.0),))
    assert spec.canonical().brackets == ((0, 1, 2, -2.0),)


@composite
def spec_files(draw):
    dim = draw(st.integers(min_value=2, max_value=5))
    keys = draw(
        st.sets(
            st.tuples(
                st.integers(0, dim - 1), st.integers(0, dim - 1), st.integers(0, dim - 1)
            ).filter(lambda key: key[0] != key[1]),
            max_size=6,
        )
    )
    unique = {}
    for i, j, k in keys:
        unique.setdefault((min(i, j), max(i, j), k), (i, j, k))
    values = draw(st.lists(st.floats(-5, 5, allow_nan=False), min_size=len(unique), max_size=len(unique)))
    brackets = tuple((i, j, k, v) for (i, j, k), v in zip(unique.values(), values))
    tags = tuple(draw(st.lists(st.sampled_from(["nilpotent", "solvable", "test"]), max_size=2)))
    return AlgebraSpecFile(name="random", dim=dim, brackets=brackets, tags=tags)


@settings(max_examples=50, deadline=None)
@given(spec_files())
def test_canonical_text_is_a_fixed_point(spec):
    text = write_spec(spec)
    assert write_spec(parse_spec(text)) == text
    assert parse_spec(text) == spec.canonical()


def test_trajectory_csv_keeps_breakdown_time_when_given(heis3):
    traj = integrate_flow(heis3, -0.5, 1e-3)
    assert traj.breakdown
    text = write_trajectory_csv(traj)
    assert not read_trajectory_csv(text, heis3.alg).breakdown
    restored = read_trajectory_csv(text, heis3.alg, t_star=traj.t_star)
    assert restored.breakdown
    assert restored.t_star == traj.t_star
    assert restored.times[-1] == traj.t_star
