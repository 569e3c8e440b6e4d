import csv
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mopchr.functionals import FamilySpec
from mopchr.lattice import lattice_from_system, type2_coeffs
from mopchr.numerics import Poly
from mopchr.zeros import (CSV_COLUMNS, NonConverged, ToleranceAmbiguous, Verdict, corollary_chain,
                          interlace, interlacing_suite, mesh, mesh_suite, relations_for, roots, write_csv)


def rs(vals):
    return roots(Poly.from_roots([F(v) for v in vals]))


def test_linear_root():
    r = roots(Poly.from_roots([F(3, 7)]))
    assert r.values[0] == pytest.approx(3 / 7, abs=1e-15)


def test_quadratic_roots():
    r = roots(Poly([2, -4, 1]))
    assert r.real and r.simple
    np.testing.assert_allclose(r.values, [2 - math.sqrt(2), 2 + math.sqrt(2)], rtol=1e-14)
    assert r.method == "bisection"


def test_charlier_p22_roots_real():
    sys_ = FamilySpec("charlier", a=["3/10", "17/10"]).system()
    P = type2_coeffs(lattice_from_system(sys_, 4), (2, 2))
    r = roots(P)
    assert r.real and len(r) == 4
    assert max(r.residuals) < 1e-9


def test_complex_and_float_roots():
    r = roots(Poly([1.0, 0.0, 1.0]))
    assert not r.real
    np.testing.assert_allclose(sorted(r.values, key=lambda z: z.imag), [-1j, 1j], atol=1e-14)
    r = roots(Poly([0.0, 0.0, -2.0, 1.0]))
    assert r.multiplicities == (2, 1) and r.values[1] == pytest.approx(2.0)


def test_constant_rejected():
    with pytest.raises(ValueError):
        roots(Poly([3]))


def test_nonconverged_on_tight_tolerance():
    # Wilkinson-type polynomial in floats cannot be polished to 1e-30
    p = Poly.from_roots([float(k) for k in range(1, 16)])
    with pytest.raises(NonConverged):
        roots(p, polish_tol=1e-30)


def test_interlace_examples():
    u, v = rs([0]), rs([-1, 1])
    assert interlace(u, v) is Verdict.STRICT_ABOVE
    assert interlace(v, u) is Verdict.STRICT_BELOW
    assert interlace(u, v).interlaced
    # x (x - 2) against the Laguerre P_2 = x^2 - 4x + 2
    assert interlace(rs([0, 2]), roots(Poly([2, -4, 1]))) is Verdict.STRICT_BELOW
    w = roots(Poly([2, -4, 1]))
    assert interlace(w, w) is Verdict.NO


def test_interlace_failures():
    assert interlace(rs([0, 1]), rs([2, 3])) is Verdict.NO
    assert interlace(rs([0]), rs([1, 2, 3])) is Verdict.NO
    assert interlace(roots(Poly([1.0, 0.0, 1.0])), rs([0])) is Verdict.NO
    res = interlace(rs([0, 2]), rs([1]), detail=True)
    assert res.ok and res.min_margin == pytest.approx(1.0)


def test_tolerance_band():
    u = roots(Poly.from_roots([0.0, 1.0]))
    v = roots(Poly.from_roots([1.0 + 1e-12]))
    with pytest.raises(ToleranceAmbiguous):
        interlace(u, v)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(-50, 50), min_size=3, max_size=7, unique=True))
def test_alternating_sets_interlace(points):
    pts = sorted(points)
    u = rs(pts[0::2])
    v = rs(pts[1::2])
    assert interlace(u, v) is Verdict.STRICT_BELOW
    assert interlace(v, u) is Verdict.STRICT_ABOVE


def test_mesh():
    assert mesh(rs([0, F(3, 2), 4])) == pytest.approx(1.5)
    with pytest.raises(ValueError):
        mesh(rs([1]))


def test_relations_cover_family_items():
    spec = FamilySpec("angelesco_jacobi", alpha=0, beta=0, gamma=0, a=-1)
    kinds = {r.kind for r in relations_for(spec, 4)}
    assert kinds == {"II", "I"}
    assert relations_for(FamilySpec("charlier", a=[1, 2]), 4)


def test_interlacing_and_mesh_suites_small():
    rep = interlacing_suite(FamilySpec("charlier", a=[1, 2]), 4)
    assert rep["ok"] and rep["min_margin"] > 1e-9
    m = mesh_suite(FamilySpec("krawtchouk", N=10, p=["1/4", "2/3"]), 6)
    assert m["ok"] and m["min_mesh"] > 1


def test_corollary_chain():
    sys_ = FamilySpec("laguerre1", alpha=[0, "1/2"]).system()
    rep = corollary_chain(sys_, 0, 4)
    assert rep["ok"]


def test_csv_output(tmp_path):
    rep = interlacing_suite(FamilySpec("charlier", a=[1, 2]), 3)
    path = tmp_path / "z.csv"
    write_csv([rep], path)
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == len(rep["rows"]) + 1
