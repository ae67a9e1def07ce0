import numpy as np
import pytest
from numpy.testing import assert_allclose

from services.catalog import catalog, catalog_names, get_algebra, get_entry, milnor
from services.errors import CatalogError, ValidationError
from services.lie_core import bracket, check_jacobi


def test_catalog_order():
    assert catalog_names() == [
        "abelian2", "abelian3", "heis3", "heis3xR", "heis5", "nil4", "qheis7",
        "sol3", "sl2r", "e2", "milnor(1,0,0,1)", "milnor(1,0,0,2)",
    ]


def test_every_entry_builds_with_identity_metric():
    for entry in catalog():
        mla = entry.build()
        assert mla.name == entry.name
        assert_allclose(mla.metric, np.eye(mla.dim))
        assert check_jacobi(mla.alg) <= 1e-12


def test_named_brackets():
    e = np.eye(4)
    assert_allclose(bracket(get_algebra("heis3").alg, e[0, :3], e[1, :3]), e[2, :3])
    nil4 = get_algebra("nil4").alg
    assert_allclose(bracket(nil4, e[0], e[1]), e[2])
    assert_allclose(bracket(nil4, e[0], e[2]), e[3])
    sl2r = get_algebra("sl2r").alg
    h, x, y = np.eye(3)
    assert_allclose(bracket(sl2r, h, x), 2 * x)
    assert_allclose(bracket(sl2r, h, y), -2 * y)
    assert_allclose(bracket(sl2r, x, y), h)
    e2 = get_algebra("e2").alg
    assert_allclose(bracket(e2, np.eye(3)[2], np.eye(3)[0]), np.eye(3)[1])
    assert_allclose(bracket(e2, np.eye(3)[2], np.eye(3)[1]), -np.eye(3)[0])


def test_quaternionic_heisenberg():
    mla = get_algebra("qheis7")
    assert mla.dim == 7


def test_parametric_names():
    assert get_algebra("abelian5").dim == 5
    assert get_entry("milnor(1, 0, 0, 2)").name == "milnor(1,0,0,2)"
    assert get_entry("milnor(0.5,0,0,1)").name == "milnor(0.5,0,0,1)"


def test_milnor_parameter_constraints():
    with pytest.raises(ValidationError):
        milnor(1.0, 0.0, 0.0, -1.0)
    with pytest.raises(ValidationError):
        milnor(1.0, 1.0, 1.0, 1.0)


def test_unknown_name_lists_valid_names():
    with pytest.raises(CatalogError) as excinfo:
        get_entry("nosuch")
    assert "heis3" in str(excinfo.value)
    assert excinfo.value.exit_code == 2
    with pytest.raises(CatalogError):
        get_entry("milnor(a,0,0,1)")
