from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mopchr.functionals import ExplicitMoments, FamilySpec, PointMasses, finite_functional_from_roots
from mopchr.numerics import Poly
from mopchr.recurrence import (Breakdown, JacobiData, QuasiDefiniteViolation, galant_one_step,
                               jacobi_from_moments, kernel_poly, moments_from_jacobi, three_term_polys)

BELL = [1, 1, 2, 5, 15, 52]


def laguerre(alpha, L):
    b = [2 * n + alpha + 1 for n in range(L)]
    a = [0] + [n * (n + alpha) for n in range(1, L)]
    return JacobiData(b, a)


def test_dirac_has_support_one():
    t = F(7, 3)
    jd = jacobi_from_moments(PointMasses([t], [1]), 4)
    assert jd.support_size == 1 and jd.b[0] == t


def test_charlier_coefficients():
    jd = jacobi_from_moments(FamilySpec("charlier", a=[1]).component(0), 7)
    assert jd.b == [n + 1 for n in range(7)]
    assert jd.a[1:] == [n for n in range(1, 7)]


def test_conjugate_pair_data():
    jd = jacobi_from_moments(finite_functional_from_roots([1j, -1j], [0.25, 0.75]), 3)
    assert jd.support_size == 2
    assert jd.b[:2] == [-0.5j, 0.5j]
    # <P_1, P_1> / <P_0, P_0> with P_1 = x + i/2
    assert jd.a[1] == -0.75


def test_quasi_definite_violation():
    # Delta_1 = 0 while Delta_2 != 0
    with pytest.raises(QuasiDefiniteViolation):
        jacobi_from_moments(ExplicitMoments([0, 1, 0, 1, 0, 1, 0]), 3)


def test_moments_from_jacobi():
    zero = JacobiData([F(0)] * 4, [F(0)] * 4)
    assert moments_from_jacobi(zero, F(1), 6) == [1, 0, 0, 0, 0, 0]
    charlier = JacobiData([F(n + 1) for n in range(4)], [F(n) for n in range(4)])
    assert moments_from_jacobi(charlier, F(1), 6) == BELL
    conj = jacobi_from_moments(finite_functional_from_roots([1j, -1j], [0.25, 0.75]), 3)
    c = moments_from_jacobi(conj, 1, 4)
    assert c[1] == -0.5j


@settings(max_examples=25, deadline=None)
@given(st.lists(st.fractions(-5, 5, max_denominator=6), min_size=4, max_size=4),
       st.lists(st.fractions(F(1, 4), 5, max_denominator=6), min_size=3, max_size=3))
def test_favard_roundtrip(b, a):
    jd = JacobiData(list(b), [F(0)] + list(a))
    c = moments_from_jacobi(jd, F(1), 8)
    back = jacobi_from_moments(ExplicitMoments(c), 4)
    assert back.b == jd.b and back.a == jd.a


def test_three_term_polys():
    P = three_term_polys(laguerre(0, 4), 2)
    assert P[0] == Poly([1])
    assert P[2] == Poly([2, -4, 1])


def test_galant_laguerre_shift():
    hat = galant_one_step(laguerre(F(0), 22), 0, 21)
    assert hat.b[:21] == [2 * n + 2 for n in range(21)]
    assert hat.a[1:21] == [n * (n + 1) for n in range(1, 21)]
    # independent check against moments (n + 1)!
    fact = [1]
    for k in range(1, 30):
        fact.append(fact[-1] * k)
    oracle = jacobi_from_moments(ExplicitMoments(fact[1:]), 10)
    assert oracle.b == hat.b[:10] and oracle.a == hat.a[:10]


def test_galant_deltas_are_ratios():
    jd = laguerre(F(1, 2), 8)
    z0 = F(-3, 2)
    hat = galant_one_step(jd, z0, 6)
    P = three_term_polys(jd, 7)
    for n, d in enumerate(hat.delta[:6]):
        assert d == P[n + 1](z0) / P[n](z0)


def test_galant_dirac_keeps_b0():
    t = F(2)
    jd = jacobi_from_moments(PointMasses([t], [1]), 2)
    hat = galant_one_step(jd, F(-1))
    assert hat.b[0] == t and hat.support_size == 1


def test_galant_symmetric_breakdown():
    sym = JacobiData([F(0)] * 5, [F(0)] + [F(1)] * 4)
    with pytest.raises(Breakdown) as err:
        galant_one_step(sym, 0, 3)
    assert err.value.index == 0


def test_kernel_poly():
    jd = laguerre(F(0), 6)
    assert kernel_poly(jd, F(3), 1, c0=F(2)) == Poly([F(1, 2)])
    K = kernel_poly(jd, F(-1), 4)
    P = three_term_polys(jd, 4)
    # reproducing property: <K_n(z0, .), P_k> = P_k(z0) for k < n, with Laguerre alpha = 0 moments
    fact = [1, 1, 2, 6, 24, 120, 720, 5040]

    def pair(p, q):
        r = p * q
        return sum(c * fact[i] for i, c in enumerate(r.coeffs))
    for k in range(4):
        assert pair(K, P[k]) == P[k](F(-1))


def test_christoffel_darboux_identity():
    jd = laguerre(F(1, 3), 8)
    n = 5
    P = three_term_polys(jd, n)
    hn = 1
    for k in range(1, n):
        hn *= jd.a[k]
    x, y = F(2, 7), F(-5, 3)
    lhs = kernel_poly(jd, y, n)(x) * (x - y)
    rhs = (P[n](x) * P[n - 1](y) - P[n - 1](x) * P[n](y)) / hn
    assert lhs == rhs
