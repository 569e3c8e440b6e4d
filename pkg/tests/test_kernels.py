import numpy as np
import pytest

from mopchr import kernels
from mopchr.functionals import FamilySpec
from mopchr.lattice import lattice_from_system
from mopchr.numerics import REAL
from mopchr.recurrence import JacobiData, galant_one_step

pytestmark = pytest.mark.skipif(not kernels.HAVE_COMPILED, reason="compiled kernels not built")


def _values(lat):
    return [(lat.a(n, j), lat.b(n, j)) for n in lat.cells for j in range(lat.r)]


def test_compiled_lattice_matches_pure(monkeypatch):
    sys_ = FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0).system(REAL)
    fast = lattice_from_system(sys_, 12)
    monkeypatch.setattr(kernels, "compiled", None)
    slow = lattice_from_system(sys_, 12)
    assert not slow.array_mode and fast.array_mode
    for (a1, b1), (a2, b2) in zip(_values(fast), _values(slow)):
        assert (a1 is None) == (a2 is None) and (b1 is None) == (b2 is None)
        if a1 is not None:
            assert a1 == pytest.approx(a2, rel=1e-13, abs=1e-15)
        if b1 is not None:
            assert b1 == pytest.approx(b2, rel=1e-13, abs=1e-15)


def test_compiled_galant_matches_pure(monkeypatch):
    L = 30
    jd = JacobiData([2.0 * n + 1.5 for n in range(L + 1)], [0.0] + [n * (n + 0.5) for n in range(1, L + 1)])
    fast = galant_one_step(jd, -0.7, L)
    monkeypatch.setattr(kernels, "compiled", None)
    slow = galant_one_step(jd, -0.7, L)
    np.testing.assert_allclose(fast.b, slow.b, rtol=1e-14)
    np.testing.assert_allclose(fast.a, slow.a, rtol=1e-14)
