from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st
from numpy.testing import assert_allclose

from services.catalog import get_algebra
from services.errors import InconsistencyError, PreconditionError
import services.two_step as two_step
from services.lie_core import LieAlgebra
from services.metric_geometry import MetricLieAlgebra
from services.soliton_solver import SolitonType, Verdict, gradient_obstruction, solve_nilsoliton
from services.two_step import (
    decompose_two_step,
    find_einstein_scale,
    is_einstein,
    is_htype,
    is_nonsingular,
    j_pairing_residual,
    rebuild_brackets,
    ricci_kernel_two_step,
    solvable_extension,
)

HTYPE = ["heis3", "heis5", "qheis7"]


def test_heis3_j_map(heis3):
    dec = decompose_two_step(heis3)
    assert dec.center_dim == 1
    assert_allclose(dec.z_basis[:, 0], [0, 0, 1], atol=1e-12)
    assert_allclose(dec.j_maps[0], [[0, -1], [1, 0]], atol=1e-12)
    assert j_pairing_residual(dec) <= 1e-12


def test_stretched_center_is_not_htype(heis3):
    dec = decompose_two_step(heis3.with_metric(np.diag([1.0, 1.0, 4.0])))
    assert_allclose(dec.j_maps[0], [[0, -2], [2, 0]], atol=1e-12)
    assert not is_htype(dec)
    assert is_nonsingular(dec)


@pytest.mark.parametrize("name", HTYPE)
def test_htype_family(name):
    mla = get_algebra(name)
    dec = decompose_two_step(mla)
    assert is_htype(dec)
    assert is_nonsingular(dec)
    assert ricci_kernel_two_step(dec, strict=True).shape[1] == 0
    assert gradient_obstruction(mla).verdict == "not-gradient"
    cert = solve_nilsoliton(mla)
    assert cert.verdict == Verdict.NILSOLITON
    assert cert.soliton_type == SolitonType.EXPANDING


def test_qheis7_center_dimension():
    assert decompose_two_step(get_algebra("qheis7")).center_dim == 3


def test_singular_algebra_has_ricci_kernel():
    dec = decompose_two_step(get_algebra("heis3xR"))
    assert not is_nonsingular(dec)
    assert not is_htype(dec)
    kernel = ricci_kernel_two_step(dec, strict=True)
    assert kernel.shape == (4, 1)
    assert_allclose(np.abs(kernel[:, 0]), [0, 0, 0, 1], atol=1e-12)


def test_odd_complement_is_singular():
    # [e1,e2] = e4, [e1,e3] = e5 : dim v = 3
    alg = LieAlgebra.from_brackets(5, [(0, 1, 3, 1.0), (0, 2, 4, 1.0)], name="odd")
    dec = decompose_two_step(MetricLieAlgebra(alg))
    assert dec.v_basis.shape[1] == 3
    assert not is_nonsingular(dec)


def test_decomposition_requires_two_step(nil4):
    with pytest.raises(PreconditionError, match="class 2"):
        decompose_two_step(nil4)
    with pytest.raises(PreconditionError):
        decompose_two_step(get_algebra("abelian3"))


@pytest.mark.parametrize("name", ["heis5", "qheis7", "heis3xR"])
def test_rebuild_brackets(name):
    mla = get_algebra(name)
    assert_allclose(rebuild_brackets(decompose_two_step(mla)).structure, mla.alg.structure, atol=1e-12)


def test_rebuild_brackets_with_general_metric(heis3, rng):
    A = rng.normal(size=(3, 3))
    mla = heis3.with_metric(A @ A.T + 3.0 * np.eye(3))
    assert_allclose(rebuild_brackets(decompose_two_step(mla)).structure, heis3.alg.structure, atol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1), st.sampled_from([(4, 2), (4, 3), (6, 2)]))
def test_random_two_step_j_maps(seed, shape):
    m, p = shape
    rng = np.random.default_rng(seed)
    J = rng.normal(size=(p, m, m))
    J = J - np.transpose(J, (0, 2, 1))
    brackets = [
        (a_idx, b_idx, m + a, float(J[a, b_idx, a_idx]))
        for a in range(p)
        for a_idx in range(m)
        for b_idx in range(a_idx + 1, m)
    ]
    alg = LieAlgebra.from_brackets(m + p, brackets, name="random")
    dec = decompose_two_step(MetricLieAlgebra(alg))
    assert_allclose(dec.j_maps, J, atol=1e-9)
    assert_allclose(rebuild_brackets(dec).structure, alg.structure, atol=1e-9)


def test_heis3_einstein_extension(heis3):
    result = find_einstein_scale(heis3, np.diag([1.0, 1.0, 2.0]))
    assert result.found
    assert result.residual <= 1e-7
    assert result.scale == pytest.approx(0.5, abs=1e-6)
    check = is_einstein(solvable_extension(heis3, np.diag([1.0, 1.0, 2.0]), result.scale).extended)
    assert check.is_einstein
    assert check.lambda_einstein == pytest.approx(-1.5, abs=1e-6)


def test_nil4_einstein_scale(nil4):
    result = find_einstein_scale(nil4, np.diag([0.5, 1.0, 1.5, 2.0]))
    assert result.found
    assert result.scale == pytest.approx(1.0 / np.sqrt(5.0), abs=1e-6)


def test_abelian_extension_is_hyperbolic_space():
    extension = solvable_extension(get_algebra("abelian2"), np.eye(2), 1.0)
    assert extension.extended.dim == 3
    check = is_einstein(extension.extended)
    assert check.is_einstein
    assert check.lambda_einstein == pytest.approx(-2.0, abs=1e-7)


def test_extension_structure(heis3):
    D = np.diag([1.0, 1.0, 2.0])
    extended = solvable_extension(heis3, D, 0.5).extended
    # [H, e3] = 0.5 * D e3
    assert_allclose(extended.alg.structure[3, 2], [0, 0, 1.0, 0])
    assert_allclose(extended.metric, np.eye(4))


def test_wrong_derivation_has_no_einstein_scale(heis3, caplog):
    result = find_einstein_scale(heis3, np.diag([1.0, 0.0, 1.0]))
    assert not result.found
    assert result.message == "no Einstein extension at this D"
    assert "no Einstein extension" in caplog.text


def test_extension_preconditions(heis3, sol3):
    with pytest.raises(PreconditionError, match="positive"):
        solvable_extension(heis3, np.diag([1.0, 1.0, 2.0]), 0.0)
    with pytest.raises(PreconditionError, match="not a derivation"):
        solvable_extension(heis3, np.diag([1.0, 0.0, 0.0]), 1.0)
    with pytest.raises(PreconditionError, match="nilpotent"):
        solvable_extension(sol3, np.eye(3), 1.0)
    with pytest.raises(PreconditionError, match="3x3"):
        solvable_extension(heis3, np.eye(2), 1.0)


def test_zero_derivation_has_no_einstein_scale(heis3):
    result = find_einstein_scale(heis3, np.zeros((3, 3)))
    assert not result.found
    assert result.residual > 0.1


def test_kernel_disagreement_raises_in_strict_mode(heis3, monkeypatch):
    original = two_step.curvature

    def vanishing_ricci(mla):
        package = original(mla)
        return replace(package, ricci_endo=np.zeros_like(package.ricci_endo))

    monkeypatch.setattr(two_step, "curvature", vanishing_ricci)
    dec = decompose_two_step(heis3)
    assert ricci_kernel_two_step(dec).shape[1] == 0
    with pytest.raises(InconsistencyError, match="disagrees") as excinfo:
        ricci_kernel_two_step(dec, strict=True)
    assert excinfo.value.exit_code == 1
