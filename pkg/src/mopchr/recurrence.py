"""Single-functional machinery: Jacobi data, three-term recurrence,
the one-step Christoffel (Galant) recursion and kernel polynomials."""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import mpmath

from . import kernels
from .functionals import MP_DPS, MomentFunctional
from .numerics import REAL, Field, Poly, coerce, eps_rel, field_of, field_of_values

__all__ = [
    "JacobiData", "QuasiDefiniteViolation", "Breakdown", "jacobi_from_moments",
    "moments_from_jacobi", "three_term_polys", "galant_one_step", "kernel_poly",
    "EPS_BREAKDOWN",
]

EPS_BREAKDOWN = 1e-12


class QuasiDefiniteViolation(ArithmeticError):
    """Hankel determinants vanish in a pattern incompatible with L_N."""

    def __init__(self, n: int):
        super().__init__(f"quasi-definiteness violated at n={n}")
        self.n = n


class Breakdown(ArithmeticError):
    """A recursion met a zero divisor; ``index`` locates it."""

    def __init__(self, index, detail: str = ""):
        msg = f"breakdown at {index}"
        super().__init__(msg + (f": {detail}" if detail else ""))
        self.index = index
        self.detail = detail


@dataclass
class JacobiData:
    """Monic three-term recurrence coefficients.

    ``b[n]`` for n >= 0 and ``a[n]`` for n >= 1 (``a[0]`` is a zero
    placeholder).  ``support_size`` is None for an infinite sequence;
    otherwise the lists stop at index N-1.
    """

    b: list
    a: list
    support_size: int | None = None
    c0: object = 1
    delta: list = dc_field(default_factory=list)

    def __post_init__(self):
        if len(self.a) != len(self.b):
            raise ValueError("a and b must have equal length (a[0] is a placeholder)")

    @property
    def L(self) -> int:
        return len(self.b)

    @property
    def field(self) -> Field:
        return field_of_values(list(self.b) + list(self.a[1:]))

    def a_at(self, n: int):
        """a_n with the convention a_N = 0 for finite support."""
        if n < len(self.a):
            return self.a[n]
        if self.support_size is not None and n >= self.support_size:
            return 0 * self.b[0]
        raise IndexError(f"a_{n} beyond truncation {self.L}")

    def b_at(self, n: int):
        if n < len(self.b):
            return self.b[n]
        raise IndexError(f"b_{n} beyond truncation {self.L}")

    def to_field(self, field: Field) -> "JacobiData":
        cv = lambda v: coerce(v, field)
        return JacobiData([cv(v) for v in self.b], [cv(v) for v in self.a], self.support_size,
                          cv(self.c0), [cv(v) for v in self.delta])

    def truncate(self, L: int) -> "JacobiData":
        return JacobiData(self.b[:L], self.a[:L], self.support_size, self.c0, self.delta[:L])


def _stieltjes(c, L, is_zero):
    """Recurrence coefficients from moments ``c`` via the monic sequence.

    Works over any field.  Uses the identities <P_n,P_n> = <P_n, x^n>
    and <x P_n, P_n> = <P_n, x^{n+1}> + p_{n-1} <P_n, x^n>.
    Returns (b, a, N) with N the detected support size or None.
    """
    zero = c[0] * 0
    if c[0] == 0:
        raise QuasiDefiniteViolation(0)
    pair = lambda P, k: sum((pi * c[i + k] for i, pi in enumerate(P)), zero)
    scale = lambda P, k: sum((abs(pi * c[i + k]) for i, pi in enumerate(P)), abs(zero))
    b, a = [], [zero]
    prev, cur = [], [c[0] / c[0]]
    h_prev = None
    for n in range(L + 1):
        if 2 * n >= len(c):
            break
        h = pair(cur, n)
        if is_zero(h, scale(cur, n)):
            # P_n annihilates the functional iff every available moment vanishes
            for k in range(n + 1, len(c) - n):
                if not is_zero(pair(cur, k), scale(cur, k)):
                    raise QuasiDefiniteViolation(n + 1)
            if n == 0:
                raise QuasiDefiniteViolation(0)
            return b, a[:n], n
        if n == L:
            break
        if 2 * n + 1 >= len(c):
            break
        pn1 = cur[n - 1] if n >= 1 else zero
        bn = (pair(cur, n + 1) + pn1 * h) / h
        b.append(bn)
        if n >= 1:
            a.append(h / h_prev)
        # P_{n+1} = (x - b_n) P_n - a_n P_{n-1}
        nxt = [zero] + list(cur)
        for i, v in enumerate(cur):
            nxt[i] -= bn * v
        if n >= 1:
            an = a[n]
            for i, v in enumerate(prev):
                nxt[i] -= an * v
        prev, cur, h_prev = cur, nxt, h
    return b, a[:len(b)], None


def jacobi_from_moments(f: MomentFunctional, L: int, field: Field | None = None) -> JacobiData:
    """Jacobi coefficients b_0..b_{L-1}, a_1..a_{L-1} of ``f``.

    Exact functionals are processed in rational arithmetic and converted
    to ``field`` at the end.  Float functionals that expose high precision
    moments are processed at ``MP_DPS`` digits before rounding, which
    avoids the ill-conditioning of raw moments in double precision.
    Finite support is detected when <P_N, P_N> vanishes.
    """
    if L < 1:
        raise ValueError("L must be at least 1")
    target = field or f.field
    count = 2 * L + 1
    if f.field.exact:
        c = _available_moments(f, count)
        b, a, N = _stieltjes(c, L, lambda v, s: v == 0)
        c0 = c[0]
    elif f.field is REAL and f.has_hp():
        with mpmath.workdps(MP_DPS):
            c = [f.moment_mp(n) for n in range(count)]
            tol = mpmath.mpf(10) ** (-(MP_DPS * 3) // 5)
            b, a, N = _stieltjes(c, L, lambda v, s: abs(v) <= tol * max(s, tol))
            b = [float(v) for v in b]
            a = [float(v) for v in a]
            c0 = float(c[0])
    else:
        c = _available_moments(f, count)
        tol = eps_rel()
        b, a, N = _stieltjes(c, L, lambda v, s: abs(v) <= tol * max(s, 1e-300))
        c0 = c[0]
    jd = JacobiData(list(b), list(a), N, c0)
    return jd.to_field(target) if target is not f.field or not f.field.exact else jd


def _available_moments(f, count):
    out = []
    for n in range(count):
        try:
            out.append(f.moment(n))
        except Exception:
            if n < 2:
                raise
            break
    return out


def moments_from_jacobi(j: JacobiData, c0, L: int) -> list:
    """First ``L`` moments c_n = c0 (J^n)_{00} of the monic Jacobi matrix."""
    if c0 == 0:
        raise ValueError("c0 must be nonzero")
    size = j.L if j.support_size is None else min(j.L, j.support_size)
    if j.support_size is None and L > 2 * size:
        raise ValueError(f"only {2 * size} moments are determined by {size} coefficients")
    zero = c0 * 0
    u = [zero] * size
    u[0] = zero + 1
    out = []
    for _ in range(L):
        out.append(c0 * u[0])
        # row vector times J: J[i][i] = b_i, J[i][i+1] = 1, J[i+1][i] = a_{i+1}
        nu = [zero] * size
        for i in range(size):
            v = u[i] * j.b[i]
            if i > 0:
                v += u[i - 1]
            if i + 1 < size:
                v += u[i + 1] * j.a[i + 1]
            nu[i] = v
        u = nu
    return out


def three_term_polys(j: JacobiData, n_max: int) -> list:
    """Monic P_0..P_{n_max} from the recurrence."""
    limit = j.L if j.support_size is None else j.support_size
    if n_max > limit:
        raise ValueError(f"n_max={n_max} exceeds available data ({limit})")
    one = j.b[0] * 0 + 1 if j.b else Fraction(1)
    x = Poly((one * 0, one))
    polys = [Poly((one,))]
    if n_max == 0:
        return polys
    polys.append(x - j.b[0])
    for n in range(1, n_max):
        polys.append((x - j.b[n]) * polys[n] - polys[n - 1] * j.a[n])
    return polys


def galant_one_step(j: JacobiData, z0, L: int | None = None) -> JacobiData:
    """Jacobi data of (x - z0) mu.

    Follows d_0 = z0 - b_0, bh_0 = b_0 - a_1/d_0 and for n >= 1
    d_n = bh_{n-1} - b_n + d_{n-1}, ah_n = a_n d_n/d_{n-1},
    bh_n = b_n + (ah_n - a_{n+1})/d_n, where d_n = P_{n+1}(z0)/P_n(z0).
    The deltas are kept in the ``delta`` attribute of the result.
    """
    field = j.field.join(field_of(z0))
    N = j.support_size
    if N is not None:
        max_L = N
    else:
        max_L = j.L - 1
    if L is None:
        L = max_L
    if L > max_L:
        raise ValueError(f"L={L} needs more input coefficients (at most {max_L})")
    b = [coerce(v, field) for v in j.b[:L]]
    a = [coerce(j.a_at(n), field) for n in range(L + 1)]
    z = coerce(z0, field)
    kern = kernels.for_field(field)
    bh, ah, delta, fail = kern.galant(b, a, z, L, field.exact, EPS_BREAKDOWN)
    bh = [coerce(v, field) for v in bh]
    ah = [coerce(v, field) for v in ah]
    delta = [coerce(v, field) for v in delta]
    if ah:
        ah[0] = field.zero
    support = N
    if fail >= 0:
        if N is not None and fail == N - 1 and fail == L - 1:
            # z0 is a support point: the transformed functional loses it
            support = N - 1
        else:
            raise Breakdown(fail, "z0 is (numerically) a zero of P_{n+1}")
    c0 = coerce(j.c0, field)
    return JacobiData(bh, ah, support, c0 * (b[0] - z) if b else c0, delta)


def kernel_poly(j: JacobiData, z0, n: int, c0=None) -> Poly:
    """K_n(z0, x) = sum_{k<n} P_k(z0) P_k(x) / <P_k, P_k>."""
    c0 = j.c0 if c0 is None else c0
    polys = three_term_polys(j, max(n - 1, 0))
    out = Poly()
    h = c0
    for k in range(n):
        if k >= 1:
            h = h * j.a[k]
        if h == 0:
            raise Breakdown(k, "vanishing norm")
        out = out + polys[k] * (polys[k](z0) / h)
    return out
