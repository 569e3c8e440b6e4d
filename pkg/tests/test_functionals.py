from fractions import Fraction as F

import pytest

from mopchr.functionals import (DomainError, ExplicitMoments, FamilySpec, MopSystem, PointMasses,
                                apply_polynomial, canonical_roots, finite_functional_from_roots, moment,
                                parse_family_shorthand, poch, stirling2_row, system_from_json)
from mopchr.numerics import COMPLEX, RATIONAL, REAL, Poly
from mopchr.recurrence import jacobi_from_moments


def test_dirac_moments():
    z0 = F(2, 3)
    f = PointMasses([z0], [1])
    assert [moment(f, n) for n in range(6)] == [z0 ** n for n in range(6)]


def test_conjugate_pair_moments():
    f = finite_functional_from_roots([1j, -1j], [0.25, 0.75])
    c = f.moments(3)
    assert c[0] == 1 and c[1] == -0.5j and c[2] == -1


def test_charlier_moments_are_bell_numbers():
    f = FamilySpec("charlier", a=[1]).component(0)
    assert f.moments(6) == [1, 1, 2, 5, 15, 52]


def test_discrete_family_moments_match_point_sums():
    for spec in (FamilySpec("krawtchouk", N=6, p=["1/3"]),
                 FamilySpec("hahn", alpha=["1/2"], beta=1, N=5)):
        f = spec.component(0)
        pts = spec._impl.points(0)
        for n in range(8):
            assert f.moment(n) == sum(w * x ** n for x, w in pts)
        assert f.support_size == len(pts)


def test_laguerre_moments():
    f = FamilySpec("laguerre1", alpha=[0]).component(0)
    assert f.moments(6) == [1, 1, 2, 6, 24, 120]
    g = FamilySpec("laguerre1", alpha=["1/2"]).component(0)
    # Gamma(n + 3/2) / Gamma(3/2) = (3/2)_n
    assert [g.moment(n) for n in range(5)] == [poch(F(3, 2), n) for n in range(5)]


def test_stirling_row():
    assert stirling2_row(4) == (0, 1, 7, 6, 1)


def test_identity_modifier_keeps_moments():
    f = FamilySpec("charlier", a=[1]).component(0)
    assert apply_polynomial(f, Poly([1])) is f


def test_modifier_by_x_shifts_laguerre_moments():
    f = FamilySpec("laguerre1", alpha=[0]).component(0)
    g = apply_polynomial(f, Poly.x())
    fact = [1, 1, 2, 6, 24, 120, 720]
    assert [g.moment(n) for n in range(6)] == fact[1:7]


def test_modifier_annihilates_support_point():
    f = PointMasses([F(1), F(2)], [F(1), F(1)])
    g = apply_polynomial(f, Poly([-1, 1]))
    assert [g.moment(n) for n in range(6)] == [2 ** n for n in range(6)]
    assert g.support_size == 1


def test_single_root_is_dirac():
    f = finite_functional_from_roots([F(3)])
    assert [f.moment(n) for n in range(5)] == [3 ** n for n in range(5)]


def test_confluent_double_root_gives_x_squared():
    f = finite_functional_from_roots([0, 0])
    sys_ = MopSystem([f])
    from mopchr.lattice import type2_oracle
    assert type2_oracle(sys_, (2,)) == Poly([0, 0, 1])


def test_zero_weight_rejected():
    with pytest.raises(DomainError):
        finite_functional_from_roots([1, 2], [0, 1])


def test_domain_errors():
    with pytest.raises(DomainError):
        FamilySpec("charlier", a=[1, -2])
    with pytest.raises(DomainError):
        FamilySpec("krawtchouk", N=5, p=[F(3, 2)])
    with pytest.raises(DomainError):
        FamilySpec("meixner2", beta=[1, 2], c=F(1, 2))
    with pytest.raises(DomainError):
        FamilySpec("nonsense", a=[1])


def test_canonical_roots_sorted_and_grouped():
    assert canonical_roots([2, 1j, -1j, 2]) == [(-1j, 1), (1j, 1), (2, 2)]


def test_shorthand_parsing():
    spec = parse_family_shorthand("charlier:a=1,2")
    assert spec.name == "charlier" and spec.r == 2
    assert spec.params["a"] == (1, 2)
    spec = parse_family_shorthand("hahn:alpha=[0,1/2];beta=1;N=8")
    assert spec.params["alpha"] == (0, F(1, 2)) and spec.params["N"] == 8


def test_system_from_json_variants():
    s = system_from_json({"functionals": [{"family": "charlier", "a": [1, 2]}]})
    assert s.r == 2 and s.field is RATIONAL
    s = system_from_json({"functionals": [{"moments": ["1", "1/2", "1/3"]}]})
    assert s.moment(0, 2) == F(1, 3)
    s = system_from_json({"functionals": [{"points": [[0, 1], [0, -1]], "weights": [0.25, 0.75]}]})
    assert s.field is COMPLEX
    with pytest.raises(DomainError):
        system_from_json({"backend": "quaternion", "functionals": [{"moments": [1]}]})


def test_backends():
    spec = FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0)
    # rational alpha and beta give rational Beta-function moments
    assert spec.system().field is RATIONAL
    assert spec.system(REAL).moment(1, 1) / spec.system(REAL).moment(1, 0) == pytest.approx(0.6)
    with pytest.raises(DomainError):
        FamilySpec("jacobi_hermite", gamma=0).system(RATIONAL)
    assert FamilySpec("charlier", a=[1, 2]).system("float").moment(0, 3) == 5.0


def test_explicit_moments_support():
    f = ExplicitMoments([1, 2, 4, 8], support_size=1)
    jd = jacobi_from_moments(f, 1)
    assert jd.b[0] == 2
