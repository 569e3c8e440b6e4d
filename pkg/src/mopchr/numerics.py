"""Scalar fields, dense polynomials and small dense linear algebra.

Three scalar variants are supported and represented by plain Python
objects:

* exact rationals  -> :class:`fractions.Fraction` (ints are accepted)
* real floats      -> :class:`float`
* complex floats   -> :class:`complex`

Every module downstream works with these directly; :class:`Field`
only records which variant is active and how to compare for zero.
"""
from __future__ import annotations

import math
import os
import warnings
from fractions import Fraction
from functools import reduce
from numbers import Rational
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

__all__ = [
    "Field", "RATIONAL", "REAL", "COMPLEX", "eps_rel", "field_of",
    "field_of_values", "coerce", "is_zero", "Poly", "poly_eval",
    "poly_derivative", "SingularMatrixError", "solve_linear", "determinant",
    "scalar_to_json", "scalar_from_json", "max_abs",
]

_DEFAULT_EPS = 1e-10


def eps_rel() -> float:
    """Relative comparison tolerance (``MOPCHR_EPS`` overrides 1e-10)."""
    raw = os.environ.get("MOPCHR_EPS")
    if raw is None or not raw.strip():
        return _DEFAULT_EPS
    return float(raw)


class Field:
    """Tag for the active scalar variant."""

    __slots__ = ("name", "exact")

    def __init__(self, name: str, exact: bool):
        self.name = name
        self.exact = exact

    def __repr__(self):
        return f"Field({self.name!r})"

    def __reduce__(self):
        return (_field_by_name, (self.name,))

    @property
    def zero(self):
        return {"rational": Fraction(0), "float": 0.0, "complex": 0j}[self.name]

    @property
    def one(self):
        return {"rational": Fraction(1), "float": 1.0, "complex": 1 + 0j}[self.name]

    def coerce(self, x):
        return coerce(x, self)

    def join(self, other: "Field") -> "Field":
        """Smallest field containing both (rational < float < complex)."""
        order = ["rational", "float", "complex"]
        return _field_by_name(max(self.name, other.name, key=order.index))


RATIONAL = Field("rational", True)
REAL = Field("float", False)
COMPLEX = Field("complex", False)
_FIELDS = {f.name: f for f in (RATIONAL, REAL, COMPLEX)}


def _field_by_name(name: str) -> Field:
    try:
        return _FIELDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}") from None


def field_of(x) -> Field:
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Rational):
        return RATIONAL
    if isinstance(x, (float, np.floating)):
        return REAL
    if isinstance(x, (complex, np.complexfloating)):
        return COMPLEX
    raise TypeError(f"not a scalar: {x!r}")


def field_of_values(values: Iterable) -> Field:
    return reduce(Field.join, (field_of(v) for v in values), RATIONAL)


def _parse_rational(text: str) -> Fraction:
    return Fraction(text.strip())


def coerce(x, field: Field):
    """Convert ``x`` into the scalar variant of ``field``.

    Strings such as ``"3/4"`` or ``"0.25"`` and two-element ``[re, im]``
    lists are accepted.  Floats are converted to rationals through their
    decimal repr so that ``0.3`` becomes ``3/10``.
    """
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ValueError(f"complex literal needs two entries: {x!r}")
        re, im = (coerce(v, REAL) for v in x)
        if field is COMPLEX:
            return complex(re, im)
        if im != 0:
            raise ValueError(f"complex value {x!r} in a real backend")
        return coerce(re, field)
    if isinstance(x, str):
        s = x.strip()
        if "j" in s:
            x = complex(s)
        elif "/" in s or field is RATIONAL:
            x = _parse_rational(s)
        else:
            x = float(s)
    if field is RATIONAL:
        if isinstance(x, Fraction):
            return x
        if isinstance(x, (int, np.integer)):
            return Fraction(int(x))
        if isinstance(x, (float, np.floating)):
            if not math.isfinite(x):
                raise ValueError("non-finite value in rational backend")
            return Fraction(repr(float(x)))
        if isinstance(x, Rational):
            return Fraction(x.numerator, x.denominator)
        if isinstance(x, (complex, np.complexfloating)):
            raise TypeError("complex scalars are float-only")
        raise TypeError(f"cannot coerce {x!r} to a rational")
    if field is REAL:
        if isinstance(x, (complex, np.complexfloating)):
            if x.imag != 0:
                raise ValueError(f"complex value {x!r} in a real backend")
            return float(x.real)
        return float(x)
    return complex(x)


def is_zero(x, scale=1.0, eps: float | None = None) -> bool:
    """Exact zero test for rationals, scaled tolerance test otherwise."""
    if isinstance(x, Rational):
        return x == 0
    tol = eps_rel() if eps is None else eps
    return abs(x) <= tol * max(abs(scale), 1e-300)


def max_abs(values: Iterable) -> float:
    m = 0.0
    for v in values:
        m = max(m, abs(v))
    return m


def _check_compatible(a, b):
    fa, fb = field_of(a), field_of(b)
    if fa.exact != fb.exact:
        raise TypeError(f"mixed scalar variants: {fa.name} and {fb.name}")


class Poly:
    """Dense polynomial with ascending coefficients.

    Trailing zeros are stripped on construction (exact zeros only, so a
    float polynomial keeps its nominal degree until :meth:`trim`).  The
    zero polynomial has an empty coefficient tuple and degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = list(coeffs)
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    @classmethod
    def x(cls, field: Field = RATIONAL) -> "Poly":
        return cls((field.zero, field.one))

    @classmethod
    def const(cls, c) -> "Poly":
        return cls((c,))

    @classmethod
    def from_roots(cls, roots: Iterable, field: Field | None = None) -> "Poly":
        roots = list(roots)
        if field is None:
            field = field_of_values(roots) if roots else RATIONAL
        p = cls((field.one,))
        for z in roots:
            p = p * cls((-coerce(z, field), field.one))
        return p

    # -- basic queries -------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self):
        return self.coeffs[-1] if self.coeffs else 0

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self):
        return f"Poly({list(self.coeffs)!r})"

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    # -- arithmetic ------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Poly):
            other = Poly((other,))
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self[k] + other[k] for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other):
        if not isinstance(other, Poly):
            other = Poly((other,))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            return Poly(c * other for c in self.coeffs)
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Poly(c / scalar for c in self.coeffs)

    def mul_x(self, k: int = 1) -> "Poly":
        """Multiply by x**k."""
        if not self.coeffs:
            return self
        return Poly((0,) * k + self.coeffs)

    def __divmod__(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return Poly(), Poly(rem)
        q = [0] * (dq + 1)
        lead = other.coeffs[-1]
        m = len(other.coeffs) - 1
        for k in range(dq, -1, -1):
            t = rem[k + m] / lead if lead != 1 else rem[k + m]
            q[k] = t
            if t != 0:
                for i, c in enumerate(other.coeffs):
                    rem[k + i] -= t * c
            rem[k + m] = 0 * t
        return Poly(q), Poly(rem[:m])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    # -- evaluation and calculus ------------------------------------------
    def __call__(self, x):
        return poly_eval(self, x)

    def derivative(self, order: int = 1) -> "Poly":
        return poly_derivative(self, order)

    def monic(self) -> "Poly":
        if not self.coeffs:
            raise ZeroDivisionError("zero polynomial has no monic form")
        lead = self.coeffs[-1]
        return Poly(c / lead for c in self.coeffs)

    def shift(self, h) -> "Poly":
        """Return the polynomial ``x -> p(x + h)`` (Taylor shift)."""
        c = list(self.coeffs)
        n = len(c)
        for i in range(n - 1):
            for k in range(n - 2, i - 1, -1):
                c[k] += h * c[k + 1]
        return Poly(c)

    def map(self, fn) -> "Poly":
        return Poly(fn(c) for c in self.coeffs)

    def trim(self, rel: float) -> "Poly":
        """Drop trailing coefficients below ``rel * max|coeff|``."""
        if not self.coeffs:
            return self
        cut = rel * max_abs(self.coeffs)
        c = list(self.coeffs)
        while c and abs(c[-1]) <= cut:
            c.pop()
        return Poly(c)

    def max_diff(self, other: "Poly") -> float:
        """Coefficientwise max-abs difference, as a float."""
        n = max(len(self), len(other))
        return max((abs(self[k] - other[k]) for k in range(n)), default=0.0)

    def scale(self) -> float:
        return float(max_abs(self.coeffs)) if self.coeffs else 0.0

    def to_field(self, field: Field) -> "Poly":
        return Poly(coerce(c, field) for c in self.coeffs)


def poly_eval(p: Poly, x):
    """Horner evaluation of ``p`` at ``x``.

    Mixing exact rationals with floating point values raises
    ``TypeError``; floats and complex values mix freely.
    """
    c = p.coeffs
    if not c:
        return 0 * x
    _check_compatible(c[-1], x)
    acc = c[-1]
    for k in range(len(c) - 2, -1, -1):
        acc = acc * x + c[k]
    return acc


def poly_derivative(p: Poly, order: int = 1) -> Poly:
    if order < 0:
        raise ValueError("derivative order must be non-negative")
    c = list(p.coeffs)
    for _ in range(order):
        c = [k * c[k] for k in range(1, len(c))]
    return Poly(c)


class SingularMatrixError(ArithmeticError):
    """Raised when elimination meets a zero (or negligible) pivot."""

    def __init__(self, pivot_index: int):
        super().__init__(f"singular matrix at pivot {pivot_index}")
        self.pivot_index = pivot_index


def _is_exact_matrix(A) -> bool:
    return all(isinstance(v, Rational) for row in A for v in row)


def _integer_rows(A, rhs=None):
    """Scale each row by the lcm of its denominators.

    Returns integer rows, the optional integer rhs column and the product
    of the row multipliers (needed to recover the determinant).
    """
    rows, out_rhs, mult = [], [], 1
    for i, row in enumerate(A):
        vals = [Fraction(v) for v in row]
        if rhs is not None:
            vals.append(Fraction(rhs[i]))
        den = 1
        for v in vals:
            den = den * v.denominator // math.gcd(den, v.denominator)
        ints = [v.numerator * (den // v.denominator) for v in vals]
        if rhs is not None:
            out_rhs.append(ints.pop())
        rows.append(ints)
        mult *= den
    return rows, (out_rhs if rhs is not None else None), mult


def _bareiss(M, ncols):
    """In-place fraction-free elimination on the first ``ncols`` columns.

    Returns the sign of the row permutation.  Raises SingularMatrixError
    when no nonzero pivot is available.
    """
    n = len(M)
    sign = 1
    prev = 1
    for k in range(n):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k] != 0:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                raise SingularMatrixError(k)
        pk = M[k][k]
        rowk = M[k]
        for i in range(k + 1, n):
            rowi = M[i]
            mik = rowi[k]
            for j in range(k + 1, len(rowi)):
                rowi[j] = (pk * rowi[j] - mik * rowk[j]) // prev
            rowi[k] = 0
        prev = pk
    return sign


def _float_matrix(A):
    arr = np.array([[v for v in row] for row in A])
    if arr.dtype.kind not in "fc":
        arr = arr.astype(complex if any(isinstance(v, complex) for row in A for v in row) else float)
    return arr


def _pivot_floor(arr) -> float:
    n = arr.shape[0]
    scale = float(np.max(np.abs(arr))) if arr.size else 0.0
    return max(n, 1) * np.finfo(float).eps * scale


def _lu(arr):
    # singularity is judged by the pivot floor, so scipy's warning is noise
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        return scipy.linalg.lu_factor(arr, check_finite=False)


def solve_linear(A: Sequence[Sequence], rhs: Sequence) -> list:
    """Solve ``A x = rhs``.

    Exact input goes through integer Bareiss elimination after clearing
    row denominators; float input uses LU with partial pivoting.  A pivot
    that is exactly zero (exact) or below ``n * machine_eps * max|A|``
    (float) raises :class:`SingularMatrixError`.
    """
    n = len(A)
    if any(len(row) != n for row in A) or len(rhs) != n:
        raise ValueError("solve_linear needs a square system")
    if n == 0:
        return []
    if _is_exact_matrix(A) and all(isinstance(v, Rational) for v in rhs):
        M, b, _ = _integer_rows(A, rhs)
        for i in range(n):
            M[i].append(b[i])
        _bareiss(M, n)
        x = [Fraction(0)] * n
        for i in range(n - 1, -1, -1):
            s = Fraction(M[i][n])
            for j in range(i + 1, n):
                s -= M[i][j] * x[j]
            x[i] = s / M[i][i]
        return x
    arr = _float_matrix(A)
    lu, piv = _lu(arr)
    floor = _pivot_floor(arr)
    diag = np.abs(np.diag(lu))
    bad = np.nonzero(diag <= floor)[0]
    if bad.size:
        raise SingularMatrixError(int(bad[0]))
    rhs_arr = np.array(list(rhs), dtype=lu.dtype if lu.dtype.kind == "c" else None)
    x = scipy.linalg.lu_solve((lu, piv), rhs_arr, check_finite=False)
    if x.dtype.kind == "c":
        return [complex(v) for v in x]
    return [float(v) for v in x]


def determinant(A: Sequence[Sequence], with_condition: bool = False):
    """Determinant of a square matrix.

    Parameters
    ----------
    with_condition : bool
        When true return ``(value, ill_conditioned)``.  The flag is always
        False for exact input; for floats it is set when the smallest LU
        pivot is below ``eps_rel() * max|A|``.
    """
    n = len(A)
    if any(len(row) != n for row in A):
        raise ValueError("determinant needs a square matrix")
    if n == 0:
        return (Fraction(1), False) if with_condition else Fraction(1)
    if _is_exact_matrix(A):
        M, _, mult = _integer_rows(A)
        try:
            sign = _bareiss(M, n)
        except SingularMatrixError:
            val = Fraction(0)
        else:
            val = Fraction(sign * M[n - 1][n - 1], mult)
        return (val, False) if with_condition else val
    arr = _float_matrix(A)
    lu, piv = _lu(arr)
    d = np.diag(lu)
    swaps = int(np.sum(piv != np.arange(n)))
    val = np.prod(d) * (-1) ** swaps
    val = complex(val) if arr.dtype.kind == "c" else float(val)
    if not with_condition:
        return val
    scale = float(np.max(np.abs(arr)))
    return val, bool(np.min(np.abs(d)) < eps_rel() * scale)


def scalar_to_json(x):
    """Rational -> "p/q", float -> float, complex -> [re, im]."""
    if isinstance(x, Rational):
        x = Fraction(x)
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else f"{x.numerator}"
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    return float(x)


def scalar_from_json(v, field: Field):
    return coerce(v, field)
