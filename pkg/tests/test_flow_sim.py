import numpy as np
import pytest
from numpy.testing import assert_allclose

from services.catalog import catalog, get_algebra
from services.errors import PreconditionError
from services.flow_sim import (
    integrate_flow,
    verify_heat_law,
    verify_monotone_scalar,
    verify_rv_monotonicity,
    verify_self_similarity,
    verify_soliton_evolution,
    verify_volume_law,
    zero_pattern_drift,
)
from services.metric_geometry import is_flat
from services.two_step import solvable_extension


def test_heis3_follows_soliton_law(heis3):
    traj = integrate_flow(heis3, 1.0, 1e-3)
    assert not traj.breakdown
    assert len(traj) == 1001
    assert traj.times[-1] == pytest.approx(1.0)
    check = verify_soliton_evolution(traj, 1.5)
    assert not check.degenerate
    assert check.deviation <= 1e-4


def test_heat_law_converges_at_fourth_order(heis3):
    coarse = verify_heat_law(integrate_flow(heis3, 0.5, 1e-2))
    fine = verify_heat_law(integrate_flow(heis3, 0.5, 5e-3))
    assert coarse.nondecreasing and fine.nondecreasing
    assert coarse.residual / fine.residual >= 8.0


def test_abelian_flow_is_constant():
    traj = integrate_flow(get_algebra("abelian3"), 1.0, 1e-2)
    assert_allclose(traj.metrics, np.broadcast_to(np.eye(3), traj.metrics.shape))
    assert_allclose(traj.scalars, 0.0)
    check = verify_soliton_evolution(traj, 0.0)
    assert check.degenerate
    assert check.message.startswith("steady/flat")


def test_backward_flow(heis3):
    traj = integrate_flow(heis3, -0.2, 1e-3)
    assert not traj.breakdown
    assert traj.times[-1] == pytest.approx(-0.2)
    assert verify_soliton_evolution(traj, 1.5).deviation <= 1e-4


def test_backward_flow_breaks_down(heis3, caplog):
    traj = integrate_flow(heis3, -0.5, 1e-3)
    assert traj.breakdown
    assert -1.0 / 3.0 - 1e-3 < traj.t_star < -0.25
    assert traj.t_star == traj.times[-1]
    assert "curvature blow-up reached at t*=" in caplog.text


@pytest.mark.parametrize("name", ["heis3", "sol3", "sl2r"])
def test_rv_invariant_increases(name):
    traj = integrate_flow(get_algebra(name), 0.2, 1e-3)
    check = verify_rv_monotonicity(traj)
    assert check.min_slope > 0
    assert check.mismatch <= 1e-3
    assert check.consistent


def test_rv_invariant_constant_on_einstein_extension():
    hyperbolic = solvable_extension(get_algebra("abelian2"), np.eye(2), 1.0).extended
    check = verify_rv_monotonicity(integrate_flow(hyperbolic, 0.2, 1e-3))
    assert abs(check.min_slope) <= 1e-6


def test_soliton_preserves_shape_and_volume_law(heis3):
    traj = integrate_flow(heis3, 0.2, 1e-3)
    assert verify_self_similarity(traj) <= 1e-6
    assert verify_volume_law(traj) <= 1e-6
    assert verify_monotone_scalar(traj)
    assert zero_pattern_drift(traj) <= 1e-12


def test_sol3_scalar_increases(sol3):
    traj = integrate_flow(sol3, 0.5, 1e-2)
    assert verify_monotone_scalar(traj)
    assert verify_heat_law(traj).nondecreasing


def test_integration_arguments_are_validated(heis3):
    with pytest.raises(PreconditionError):
        integrate_flow(heis3, 1.0, 0.0)
    with pytest.raises(PreconditionError):
        integrate_flow(heis3, 0.0, 1e-3)


def test_short_trajectory_rejects_heat_law(heis3):
    traj = integrate_flow(heis3, 1e-2, 1e-2)
    assert len(traj) == 2
    with pytest.raises(PreconditionError, match="3 trajectory points"):
        verify_heat_law(traj)


def test_heis3_scalar_satisfies_evolution_ode(heis3):
    check = verify_soliton_evolution(integrate_flow(heis3, 0.5, 1e-3), 1.5)
    assert check.ode_residual is not None
    assert check.ode_residual <= 1e-6


def test_sol3_with_wrong_lambda_deviates(sol3):
    traj = integrate_flow(sol3, 1.0, 1e-2)
    assert verify_soliton_evolution(traj, 2.0).deviation <= 1e-4
    assert verify_soliton_evolution(traj, 1.0).deviation > 0.1


def test_sl2r_heat_law():
    check = verify_heat_law(integrate_flow(get_algebra("sl2r"), 0.2, 1e-3))
    assert check.residual <= 1e-3
    assert check.nondecreasing


def test_stretched_heis3_metric_stays_self_similar(heis3):
    traj = integrate_flow(heis3.with_metric(np.diag([1.0, 2.0, 1.0])), 0.2, 1e-3)
    assert verify_self_similarity(traj) <= 1e-3


@pytest.mark.parametrize("entry", catalog(), ids=lambda entry: entry.name)
def test_scalar_strictly_increases_unless_flat(entry):
    mla = entry.build()
    if is_flat(mla):
        pytest.skip("flat metrics are fixed points")
    assert verify_monotone_scalar(integrate_flow(mla, 0.1, 1e-2))
