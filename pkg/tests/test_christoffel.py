from fractions import Fraction as F

import pytest

from mopchr.christoffel import (RootHit, TransformSpec, augment_system, kernel_identities, repeated_transform,
                                transform_nnrr, transform_type1_det, transform_type1_onestep,
                                transform_type2_det, transform_type2_iterated, transform_type2_onestep,
                                typeICC_residual)
from mopchr.functionals import ExplicitMoments, FamilySpec, MopSystem
from mopchr.lattice import lattice_from_system, type1_solve, type2_coeffs, type2_oracle
from mopchr.numerics import REAL, Poly
from mopchr.recurrence import jacobi_from_moments


def laguerre(alpha=0):
    return FamilySpec("laguerre1", alpha=[alpha]).system()


@pytest.fixture(scope="module")
def charlier():
    sys_ = FamilySpec("charlier", a=[1, 2]).system()
    return sys_, lattice_from_system(sys_, 8)


def test_augment_appends_expected_functionals():
    nu = laguerre()
    aug = augment_system(nu, TransformSpec.from_roots([F(3)]))
    assert aug.r == 2 and [aug.moment(1, n) for n in range(4)] == [1, 3, 9, 27]
    aug = augment_system(nu, TransformSpec.from_roots(["1j", "-1j"]))
    jd = jacobi_from_moments(aug.functionals[1], 3)
    assert jd.support_size == 2
    assert type2_oracle(MopSystem([aug.functionals[1]], "complex"), (2,)) == Poly([1, 0, 1])
    aug = augment_system(nu, TransformSpec.from_roots([0], [2]))
    omega = MopSystem([aug.functionals[1]])
    assert type2_oracle(omega, (2,)) == Poly([0, 0, 1])


def test_nnrr_laguerre_shift_by_x():
    sl = transform_nnrr(laguerre(), TransformSpec.from_roots([0]), dmax=10)
    for n in range(10):
        assert sl.b((n,), 0) == 2 * n + 2
        if n:
            assert sl.a((n,), 0) == n * (n + 1)


def test_nnrr_laguerre_confluent_square():
    sl = transform_nnrr(laguerre(), TransformSpec.from_roots([0], [2]), dmax=8)
    fact = [1]
    for k in range(1, 30):
        fact.append(fact[-1] * k)
    oracle = jacobi_from_moments(ExplicitMoments([F(fact[n + 2], 2) for n in range(20)]), 8)
    for n in range(8):
        assert sl.b((n,), 0) == oracle.b[n] == 2 * n + 3
        if n:
            assert sl.a((n,), 0) == oracle.a[n] == n * (n + 2)


def test_nnrr_jacobi_pineiro_matches_oracle():
    nu = FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0).system()
    t = TransformSpec.from_roots([2])
    sl = transform_nnrr(nu, t, dmax=4)
    hat = nu.modified(t.phi)
    for k in [(1, 0), (1, 1), (2, 1), (2, 2)]:
        assert type2_coeffs(sl, k) == type2_oracle(hat, k)


def test_onestep_formula():
    nu = laguerre()
    lat = lattice_from_system(nu, 6)
    assert transform_type2_onestep(lat, (0,), 0, 0) == Poly([1])
    assert transform_type2_onestep(lat, (1,), 0, 0) == Poly([-2, 1])
    with pytest.raises(RootHit):
        transform_type2_onestep(lat, (1,), 0, 1)


def test_det_formula_reductions(charlier):
    nu, lat = charlier
    t = TransformSpec.from_roots([5])
    for k in [(1, 1), (2, 0), (2, 3)]:
        assert transform_type2_det(lat, k, t) == transform_type2_onestep(lat, k, 0, 5)
    lag = laguerre()
    llat = lattice_from_system(lag, 10)
    t2 = TransformSpec.from_roots([0], [2])
    alpha2 = laguerre(2)
    for n in range(6):
        assert transform_type2_det(llat, (n,), t2) == type2_oracle(alpha2, (n,))


def test_det_matches_nnrr_on_jacobi_pineiro():
    nu = FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0).system()
    t = TransformSpec.from_roots([2, 3])
    lat = lattice_from_system(nu, 6)
    sl = transform_nnrr(nu, t, dmax=3)
    assert transform_type2_det(lat, (1, 1), t) == type2_coeffs(sl, (1, 1))


def test_iterated_matches_det(charlier):
    nu, lat = charlier
    t = TransformSpec.from_roots([5, 7])
    polys = {k: type2_coeffs(lat, k) for k in lat.cells if sum(k) <= 6}
    it = transform_type2_iterated(polys, t.root_list, 4)
    for k in [(1, 1), (2, 2), (0, 3)]:
        assert it[k] == transform_type2_det(lat, k, t)


def test_type1_formulas(charlier):
    nu, _ = charlier
    t = TransformSpec.from_roots([5])
    hat = nu.modified(t.phi)
    k = (1, 1)
    assert transform_type1_det(nu, k, t).max_diff(type1_solve(hat, k)) == 0
    for k in [(1, 0), (0, 1), (2, 1)]:
        assert transform_type1_onestep(nu, k, 5).max_diff(type1_solve(hat, k)) == 0
    res, _delta = typeICC_residual(nu, (2, 1), 0, 5)
    assert res == 0
    assert all(p.is_zero() for p in transform_type1_onestep(nu, (0, 0), 5).polys)


def test_kernel_identities_exact(charlier):
    nu, lat = charlier
    rep = kernel_identities(nu, lat, (2, 1), -1)
    assert rep["christoffel"] == 0 and rep["type2"] == 0
    rep0 = kernel_identities(nu, lat, (0, 0), -1)
    assert rep0["christoffel"] == 0 and rep0["type2"] == 0


def test_kernel_identities_float():
    nu = FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0).system(REAL)
    lat = lattice_from_system(nu, 6)
    rep = kernel_identities(nu, lat, (2, 2), 5)
    assert rep["christoffel_rel"] < 1e-8 and rep["type2_rel"] < 1e-8


def test_repeated_transform():
    lag = laguerre()
    x = TransformSpec.from_roots([0])
    slabs = repeated_transform(lag, [x, x, x], 10)
    for s, L in enumerate(slabs, start=1):
        for n in range(10):
            assert L.b((n,), 0) == 2 * n + s + 1
            if n:
                assert L.a((n,), 0) == n * (n + s)
    one = repeated_transform(lag, [x], 8)[0]
    direct = transform_nnrr(lag, x, dmax=8)
    for n in range(8):
        assert one.b((n,), 0) == direct.b((n,), 0)


def test_transform_spec_canonical_order():
    t = TransformSpec.from_roots([7, 5, 7])
    assert t.roots == (5, 7) and t.mults == (1, 2) and t.m == 3
    assert t.phi == Poly.from_roots([5, 7, 7])
    assert TransformSpec.from_json(t.to_json()) == t
