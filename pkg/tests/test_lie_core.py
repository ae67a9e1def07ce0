import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st
from numpy.testing import assert_allclose

from services.catalog import get_algebra, heis3, nil4, sl2r, sol3
from services.errors import ValidationError
from services.lie_core import (
    LieAlgebra,
    abelian,
    ad,
    bracket,
    center,
    change_basis,
    check_jacobi,
    derivation_algebra,
    derivation_residual,
    derived_series,
    direct_sum,
    is_derivation,
    is_solvable,
    is_unimodular,
    lower_central_series,
    trace_form,
    validate_algebra,
)


def test_heis3_bracket_and_jacobi():
    alg = heis3()
    assert_allclose(bracket(alg, [1, 0, 0], [0, 1, 0]), [0, 0, 1])
    assert_allclose(bracket(alg, [0, 1, 0], [1, 0, 0]), [0, 0, -1])
    assert check_jacobi(alg) == 0.0


def test_ad_matches_bracket():
    alg = nil4()
    x = np.array([1.0, 2.0, -1.0, 0.5])
    y = np.array([0.0, 1.0, 3.0, 2.0])
    assert_allclose(ad(alg, x) @ y, bracket(alg, x, y))


def test_antisymmetry_violation_reports_index():
    c = np.zeros((3, 3, 3))
    c[0, 1, 2] = 1.0
    with pytest.raises(ValidationError) as excinfo:
        LieAlgebra(c)
    assert excinfo.value.index in ((0, 1, 2), (1, 0, 2))


def test_from_brackets_rejects_nonzero_self_bracket():
    with pytest.raises(ValidationError):
        LieAlgebra.from_brackets(2, [(0, 0, 1, 1.0)])


def test_jacobi_failure_names_triple():
    broken = LieAlgebra.from_brackets(3, [(0, 1, 2, 1.0), (0, 2, 0, 1.0)], name="broken")
    assert check_jacobi(broken) > 0.5
    with pytest.raises(ValidationError) as excinfo:
        validate_algebra(broken)
    assert "Jacobi" in str(excinfo.value)
    assert len(excinfo.value.index) == 3


def test_heis3_with_extra_e1_e3_bracket_is_still_a_lie_algebra():
    # [[e1,e2],e3] + [[e2,e3],e1] + [[e3,e1],e2] = 0 + 0 + [-e2,e2]
    alg = LieAlgebra.from_brackets(3, [(0, 1, 2, 1.0), (0, 2, 1, 1.0)], name="heis3+")
    assert check_jacobi(alg) <= 1e-12
    assert validate_algebra(alg) is alg


def test_unimodularity():
    assert is_unimodular(heis3())
    assert is_unimodular(sol3())
    assert is_unimodular(sl2r())
    milnor = get_algebra("milnor(1,0,0,2)").alg
    assert not is_unimodular(milnor)
    assert_allclose(trace_form(milnor), [3.0, 0.0, 0.0])


def test_lower_central_series():
    assert lower_central_series(heis3()).dims == [3, 1, 0]
    assert lower_central_series(heis3()).nilpotency_class == 2
    series = lower_central_series(nil4())
    assert series.dims == [4, 2, 1, 0]
    assert series.nilpotency_class == 3
    assert lower_central_series(abelian(3)).nilpotency_class == 1
    assert not lower_central_series(sol3()).is_nilpotent
    assert lower_central_series(sl2r()).describe() == "not nilpotent"


def test_solvability():
    assert derived_series(sol3()) == [3, 2, 0]
    assert is_solvable(sol3())
    assert is_solvable(heis3())
    assert not is_solvable(sl2r())


def test_center():
    z = center(heis3())
    assert z.shape == (3, 1)
    assert_allclose(np.abs(z[:, 0]), [0, 0, 1], atol=1e-12)
    assert center(sl2r()).shape[1] == 0
    assert center(direct_sum(heis3(), abelian(1))).shape[1] == 2


def test_derivation_algebra_dimensions():
    assert derivation_algebra(heis3()).dimension == 6
    assert derivation_algebra(abelian(3)).dimension == 9
    # sl(2,R) 는 모든 미분이 내부 미분
    assert derivation_algebra(sl2r()).dimension == 3


def test_derivation_basis_elements_are_derivations(tol):
    der = derivation_algebra(nil4(), tol)
    for B in der.basis:
        assert derivation_residual(nil4(), B) <= tol.tol_alg
    assert is_derivation(heis3(), np.diag([1.0, 1.0, 2.0]))
    assert not is_derivation(heis3(), np.diag([1.0, 0.0, 0.0]))


@pytest.mark.parametrize("build", [heis3, nil4, sl2r, sol3])
def test_derivations_close_under_commutator(build):
    alg = build()
    basis = derivation_algebra(alg).basis
    worst = max(
        derivation_residual(alg, A @ B - B @ A) for A in basis for B in basis
    )
    assert worst <= 1e-9


def test_inner_derivations_are_derivations():
    alg = sl2r()
    for k in range(3):
        assert is_derivation(alg, ad(alg, np.eye(3)[k]))


def test_direct_sum_blocks():
    alg = direct_sum(heis3(), abelian(1), name="heis3xR")
    assert alg.dim == 4
    assert alg.name == "heis3xR"
    assert_allclose(alg.structure[:3, :3, :3], heis3().structure)
    assert not alg.structure[3].any()


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_change_basis_preserves_jacobi_and_dimensions(seed):
    rng = np.random.default_rng(seed)
    frame = rng.normal(size=(4, 4)) + 4.0 * np.eye(4)
    alg = change_basis(nil4(), frame)
    assert check_jacobi(alg) <= 1e-9
    assert lower_central_series(alg).dims == [4, 2, 1, 0]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["heis3xR", "nil4", "sl2r", "milnor(1,0,0,2)"]), st.permutations(range(4)))
def test_jacobi_invariant_under_permutation(name, perm):
    from services.lie_core import permute_basis

    alg = get_algebra(name).alg
    perm = [p for p in perm if p < alg.dim]
    permuted = permute_basis(alg, perm)
    assert check_jacobi(permuted) == pytest.approx(check_jacobi(alg), abs=1e-15)
    assert lower_central_series(permuted).dims == lower_central_series(alg).dims
