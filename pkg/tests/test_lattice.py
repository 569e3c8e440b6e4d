from fractions import Fraction as F

import pytest

from mopchr.functionals import FamilySpec, MopSystem, PointMasses, finite_functional_from_roots
from mopchr.lattice import (BREAKDOWN, cc_fill, cc_residuals, cd_kernel, cd_residual, lattice_from_system,
                            nnr_cor_residual, normality, oracle_a, oracle_b, perfectness_scan,
                            step_line_path, type1_cor_residual, type1_normalization, type1_residual,
                            type1_solve, type2_coeffs, type2_oracle)
from mopchr.numerics import REAL, Poly, SingularMatrixError
from mopchr.recurrence import Breakdown, jacobi_from_moments


@pytest.fixture(scope="module")
def charlier():
    sys_ = FamilySpec("charlier", a=[1, 2]).system()
    return sys_, lattice_from_system(sys_, 7)


def test_single_functional_lattice_is_jacobi_data():
    f = FamilySpec("charlier", a=[1]).component(0)
    jd = jacobi_from_moments(f, 8)
    lat = cc_fill([jd], dmax=6)
    for n in range(6):
        assert lat.b((n,), 0) == jd.b[n]
        if n:
            assert lat.a((n,), 0) == jd.a[n]


def test_coefficients_match_moment_oracle(charlier):
    sys_, lat = charlier
    for n in lat.cells:
        if sum(n) == 0 or sum(n) > 5:
            continue
        for i in range(2):
            if n[i]:
                assert lat.a(n, i) == oracle_a(sys_, n, i)
            assert lat.b(n, i) == oracle_b(sys_, n, i)


def test_exact_residuals_vanish(charlier):
    _, lat = charlier
    rep = cc_residuals(lat)
    assert all(rep[k]["max"] == 0 for k in ("CC1", "CC2", "CC3", "alt_k"))
    assert rep["CC1"]["count"] > 0


def test_float_residuals_small():
    sys_ = FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0).system(REAL)
    rep = cc_residuals(lattice_from_system(sys_, 10))
    assert max(rep[k]["max"] for k in ("CC1", "CC2", "CC3")) < 1e-10


def test_corrupted_cell_is_localized():
    sys_ = FamilySpec("charlier", a=[1, 2]).system()
    lat = lattice_from_system(sys_, 6)
    bad = (2, 1)
    lat.set_b(bad, 0, lat.b(bad, 0) + 1)
    rep = cc_residuals(lat)
    hits = [rep[k]["argmax"][0] for k in ("CC1", "CC2", "CC3") if rep[k]["max"] != 0]
    assert hits
    for n in hits:
        assert sum(abs(x - y) for x, y in zip(n, bad)) <= 1


def test_type2_basics(charlier):
    sys_, lat = charlier
    assert type2_coeffs(lat, (0, 0)) == Poly([1])
    for j in range(2):
        e = tuple(int(i == j) for i in range(2))
        assert type2_coeffs(lat, e) == Poly([-lat.b((0, 0), j), 1])
    assert type2_coeffs(lat, (2, 1)) == type2_oracle(sys_, (2, 1))
    assert type2_oracle(sys_, (1, 1)) == type2_coeffs(lat, (1, 1))
    assert type2_oracle(sys_, (0, 0)) == Poly([1])


def test_oracle_singular_beyond_support():
    sys_ = FamilySpec("krawtchouk", N=3, p=["1/4", "2/3"]).system()
    with pytest.raises(SingularMatrixError):
        type2_oracle(sys_, (5, 0))
    assert not normality(sys_, (5, 0))
    assert normality(sys_, (0, 0))


def test_nearest_neighbour_corollary(charlier):
    _, lat = charlier
    for n in [(1, 1), (2, 0), (0, 3), (2, 2)]:
        assert nnr_cor_residual(lat, n, 0, 1) == 0


def test_type1_solutions(charlier):
    sys_, lat = charlier
    A0 = type1_solve(sys_, (0, 0))
    assert all(p.is_zero() for p in A0.polys)
    A = type1_solve(sys_, (1, 0))
    assert A.polys[0] == Poly([F(1) / sys_.moment(0, 0)]) and A.polys[1].is_zero()
    for n in [(1, 1), (2, 1), (3, 2)]:
        assert type1_normalization(sys_, type1_solve(sys_, n), n) == 1
    assert type1_residual(sys_, lat, (1, 1), 1) == 0
    assert type1_cor_residual(sys_, lat, (2, 2), 0, 1) == 0


def test_type1_float_residual():
    sys_ = FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0).system(REAL)
    lat = lattice_from_system(sys_, 7)
    for n in [(1, 1), (3, 2), (2, 4)]:
        A = type1_solve(sys_, n)
        assert type1_residual(sys_, lat, n, 0) / max(1.0, A.max_norm()) < 1e-9


def test_cd_kernel(charlier):
    sys_, lat = charlier
    K = cd_kernel(lat, sys_, (0, 1), [(0, 0), (0, 1)])
    assert K.grids[1][0, 0] == F(1) / sys_.moment(1, 0)
    for n in [(1, 1), (2, 1), (3, 3)]:
        assert cd_residual(lat, sys_, n) == 0
    # path independence in a perfect system
    n = (2, 2)
    other = [(0, 0), (1, 0), (2, 0), (2, 1), (2, 2)]
    K1, K2 = cd_kernel(lat, sys_, n), cd_kernel(lat, sys_, n, other)
    assert all((g1 == g2).all() for g1, g2 in zip(K1.grids, K2.grids))


def test_step_line_path():
    assert step_line_path((2, 1)) == [(0, 0), (1, 0), (1, 1), (2, 1)]


def test_perfectness(charlier):
    sys_, lat = charlier
    assert perfectness_scan(sys_, 6)["perfect"]
    aj = FamilySpec("angelesco_jacobi", alpha=0, beta=0, gamma=0, a=-1).system()
    assert perfectness_scan(aj, 5)["perfect"]


def test_half_weight_pair_is_not_perfect():
    # nu = Dirac at 0 and omega at +-i with w0 = 1/2: Re P_1(i) = 0 kills (1, 1)
    nu = PointMasses([F(0), F(1), F(-1)], [1, 1, 1])
    omega = finite_functional_from_roots([1j, -1j], [0.5, 0.5])
    sys_ = MopSystem([nu, omega], "complex")
    assert not normality(sys_, (1, 1))
    omega = finite_functional_from_roots([1j, -1j], [0.25, 0.75])
    assert normality(MopSystem([nu, omega], "complex"), (1, 1))


def test_strict_and_marking_modes():
    sys_ = FamilySpec("krawtchouk", N=10, p=["1/4", "2/3"]).system()
    lat = lattice_from_system(sys_, 12, strict=False)
    marked = [n for n, s in lat.status.items() if s == BREAKDOWN]
    assert marked and all(not normality(sys_, n) for n in marked)
    with pytest.raises(Breakdown):
        lattice_from_system(sys_, 12, strict=True)


def test_parallel_fill_matches_serial():
    sys_ = FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0).system(REAL)
    a = lattice_from_system(sys_, 10)
    b = lattice_from_system(sys_, 10, workers=4)
    assert a.to_json() == b.to_json()
