from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mopchr.numerics import (COMPLEX, RATIONAL, REAL, Poly, SingularMatrixError, coerce, determinant,
                             field_of, is_zero, poly_derivative, poly_eval, scalar_from_json,
                             scalar_to_json, solve_linear)

F = Fraction
rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


def test_constant_poly_evaluates_to_constant():
    assert poly_eval(Poly([1]), 7) == 1


def test_laguerre_p2_at_zero():
    p = Poly([2, -4, 1])
    assert poly_eval(p, 0) == 2


def test_root_evaluation():
    z0 = F(3, 7)
    assert poly_eval(Poly.from_roots([z0]), z0) == 0


def test_derivatives():
    assert poly_derivative(Poly([2, -4, 1])) == Poly([-4, 2])
    assert poly_derivative(Poly([2, -4, 1]), 0) == Poly([2, -4, 1])
    assert poly_derivative(Poly([0, 0, 0, 1]), 2) == Poly([0, 6])


def test_mixed_scalar_variants_rejected():
    with pytest.raises(TypeError):
        poly_eval(Poly([F(1), F(2)]), 0.5)


def test_poly_arithmetic_and_division():
    a = Poly.from_roots([1, 2, 3])
    b = Poly.from_roots([2])
    q, r = divmod(a, b)
    assert r.is_zero()
    assert q == Poly.from_roots([1, 3])
    assert a.degree == 3 and a.lead == 1


def test_identity_solve():
    v = [F(1, 2), F(-3), F(7, 5)]
    eye = [[F(int(i == j)) for j in range(3)] for i in range(3)]
    assert solve_linear(eye, v) == v


def test_charlier_hankel_solve_matches_gram_schmidt():
    c = [1, 1, 2, 5, 15, 52]
    H = [[F(c[i + j]) for j in range(3)] for i in range(3)]
    rhs = [-F(c[i + 3]) for i in range(3)]
    low = solve_linear(H, rhs)
    P3 = Poly(low + [F(1)])
    # Gram-Schmidt oracle: monic P3 orthogonal to 1, x, x^2 under c
    for k in range(3):
        assert sum(P3[i] * c[i + k] for i in range(4)) == 0
    # three-term recurrence with b_n = n + 1, a_n = n
    x = Poly.x()
    P = [Poly([1]), x - 1]
    for n in (1, 2):
        P.append(P[n] * (x - (n + 1)) - P[n - 1] * n)
    assert P3 == P[3]


def test_repeated_row_is_singular():
    A = [[F(1), F(2), F(3)], [F(4), F(5), F(6)], [F(1), F(2), F(3)]]
    with pytest.raises(SingularMatrixError):
        solve_linear(A, [F(1), F(2), F(3)])
    with pytest.raises(SingularMatrixError):
        solve_linear([[1.0, 2.0], [1.0, 2.0]], [1.0, 0.0])


def test_determinants():
    assert determinant([[F(7, 3)]]) == F(7, 3)
    t = F(5, 2)
    assert determinant([[F(1), t], [t, t * t]]) == 0
    assert determinant([[F(2), F(1)], [F(1), F(3)]]) == 5
    assert determinant([[2.0, 1.0], [1.0, 3.0]]) == pytest.approx(5.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(rationals, min_size=3, max_size=3), min_size=3, max_size=3),
       st.lists(rationals, min_size=3, max_size=3))
def test_exact_solve_roundtrip(A, x):
    rhs = [sum(a * b for a, b in zip(row, x)) for row in A]
    if determinant(A) == 0:
        return
    assert solve_linear(A, rhs) == x


@settings(max_examples=40, deadline=None)
@given(st.lists(rationals, min_size=1, max_size=6), rationals)
def test_horner_matches_power_sum(coeffs, x):
    p = Poly(coeffs)
    assert poly_eval(p, x) == sum(c * x ** k for k, c in enumerate(coeffs))


def test_coerce_and_json_roundtrip():
    assert coerce("3/4", RATIONAL) == F(3, 4)
    assert coerce(0.3, RATIONAL) == F(3, 10)
    assert coerce([0, 1], COMPLEX) == 1j
    with pytest.raises(ValueError):
        coerce([0, 1], REAL)
    for x, fld in ((F(-5, 3), RATIONAL), (2.5, REAL), (1 - 2j, COMPLEX)):
        assert scalar_from_json(scalar_to_json(x), fld) == x
    assert scalar_to_json(F(4)) == "4"


def test_fields_and_zero_test():
    assert field_of(F(1)) is RATIONAL and field_of(1.0) is REAL and field_of(1j) is COMPLEX
    assert RATIONAL.join(REAL) is REAL and REAL.join(COMPLEX) is COMPLEX
    assert is_zero(F(0)) and not is_zero(F(1, 10 ** 30))
    assert is_zero(1e-14, scale=10.0) and not is_zero(1e-6)
