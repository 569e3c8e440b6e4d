"""Multi-index machinery.

The compatibility-condition (CC) fill produces every nearest neighbour
recurrence coefficient of a system from the Jacobi data of its
marginals.  Moment-matrix solves for type I and type II polynomials are
kept independent of the fill so they can serve as oracles.
"""
from __future__ import annotations

import contextlib
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from . import kernels
from .functionals import MP_DPS, MopSystem
from .numerics import (RATIONAL, Field, Poly, SingularMatrixError, coerce, eps_rel,
                       field_of_values, scalar_to_json, solve_linear)
from .numerics import _lu
from .recurrence import EPS_BREAKDOWN, Breakdown, JacobiData, jacobi_from_moments

__all__ = [
    "NnrrLattice", "TypeIVector", "CDKernel", "cc_fill", "lattice_from_system", "cc_residuals",
    "type2_coeffs", "type2_oracle", "oracle_a", "oracle_b", "type1_solve", "type1_residual",
    "type1_cor_residual", "nnr_cor_residual", "normality", "cd_kernel", "cd_residual",
    "perfectness_scan", "step_line_path", "NORMAL", "BOUNDARY", "BREAKDOWN",
]

NORMAL, BOUNDARY, BREAKDOWN = "normal", "boundary", "breakdown"


def _unit(r, j):
    return tuple(1 if i == j else 0 for i in range(r))


def _add(n, j, s=1):
    return n[:j] + (n[j] + s,) + n[j + 1:]


def _compositions(d: int, r: int):
    if r == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in _compositions(d - first, r - 1):
            yield (first,) + rest


def index_set(r: int, Nvec, dmax: int) -> list:
    """All n with |n| <= dmax and n_j <= N_j, grouped by level."""
    levels = []
    for d in range(dmax + 1):
        lvl = [n for n in _compositions(d, r)
               if all(N is None or n[i] <= N for i, N in enumerate(Nvec))]
        levels.append(sorted(lvl))
    return levels


class NnrrLattice:
    """Dense storage of a_{n,j} and b_{n,j} over the truncated index simplex.

    Undefined entries read as ``None``.  Values are stored in flat
    buffers indexed by ``cell * r + axis``: Python lists for the exact
    backend, float64 or complex128 arrays otherwise.
    """

    def __init__(self, r: int, Nvec: Sequence, dmax: int, field: Field):
        self.r = r
        self.Nvec = tuple(Nvec)
        self.dmax = dmax
        self.field = field
        levels = index_set(r, self.Nvec, dmax)
        self.cells = [n for lvl in levels for n in lvl]
        self.level_bounds = []
        start = 0
        for lvl in levels:
            self.level_bounds.append((start, start + len(lvl)))
            start += len(lvl)
        self.pos = {n: i for i, n in enumerate(self.cells)}
        size = len(self.cells) * r
        self.kern = kernels.for_field(field)
        self.array_mode = self.kern is not kernels.pure
        if self.array_mode:
            dt = np.complex128 if field.name == "complex" else np.float64
            self.undef = complex("nan") if dt is np.complex128 else float("nan")
            self._a = np.full(size, self.undef, dtype=dt)
            self._b = np.full(size, self.undef, dtype=dt)
        else:
            self.undef = None
            self._a = [None] * size
            self._b = [None] * size
        self.status = {}
        self.events = []
        self.marginals = []
        self._polys = {}
        self.meta = {}

    # -- access ---------------------------------------------------------
    def __contains__(self, n) -> bool:
        return tuple(n) in self.pos

    def _read(self, buf, c, j):
        v = buf[c * self.r + j]
        if self.array_mode:
            v = v.item()
            if v != v:
                return None
        return v

    def a(self, n, j):
        c = self.pos.get(tuple(n))
        return None if c is None else self._read(self._a, c, j)

    def b(self, n, j):
        c = self.pos.get(tuple(n))
        return None if c is None else self._read(self._b, c, j)

    def set_a(self, n, j, value):
        self._a[self.pos[tuple(n)] * self.r + j] = self.undef if value is None else value
        self._polys.clear()

    def set_b(self, n, j, value):
        self._b[self.pos[tuple(n)] * self.r + j] = self.undef if value is None else value
        self._polys.clear()

    def delta(self, n, j, l):
        """delta_{n,j,l} = b_{n,l} - b_{n,j}."""
        bl, bj = self.b(n, l), self.b(n, j)
        return None if bl is None or bj is None else bl - bj

    def is_normal(self, n) -> bool:
        return self.status.get(tuple(n)) in (NORMAL, BOUNDARY)

    @property
    def zero(self):
        return self.field.zero

    def _tiny(self, den, s1, s2) -> bool:
        if self.field.exact:
            return den == 0
        return abs(den) <= EPS_BREAKDOWN * max(abs(s1), abs(s2), 1.0)

    # -- export -----------------------------------------------------------
    def to_json(self) -> list:
        out = []
        exact = self.field.exact
        for n in self.cells:
            a = [self.a(n, j) for j in range(self.r)]
            b = [self.b(n, j) for j in range(self.r)]
            enc = lambda v: None if v is None else scalar_to_json(v)
            row = {"n": list(n), "a": [enc(v) for v in a], "b": [enc(v) for v in b],
                   "status": self.status.get(n)}
            if exact:
                row["a_float"] = [None if v is None else float(v) for v in a]
                row["b_float"] = [None if v is None else float(v) for v in b]
            out.append(row)
        return out

    def slab(self, axis: int, value: int) -> "NnrrLattice":
        """Sub-lattice over the remaining axes at n_axis = value.

        Coefficients along ``axis`` are dropped; the result has r-1 axes.
        """
        r2 = self.r - 1
        keep = [i for i in range(self.r) if i != axis]
        Nvec = tuple(self.Nvec[i] for i in keep)
        sub = NnrrLattice(r2, Nvec, self.dmax - value, self.field)
        for n in sub.cells:
            full = n[:axis] + (value,) + n[axis:]
            if full not in self.pos:
                continue
            for jj, j in enumerate(keep):
                va, vb = self.a(full, j), self.b(full, j)
                if va is not None:
                    sub._a[sub.pos[n] * r2 + jj] = va
                if vb is not None:
                    sub._b[sub.pos[n] * r2 + jj] = vb
            st = self.status.get(full)
            if st is not None:
                sub.status[n] = st
        sub.events = [e for e in self.events if e[1][axis] == value]
        return sub

    def __repr__(self):
        return f"NnrrLattice(r={self.r}, Nvec={self.Nvec}, dmax={self.dmax}, field={self.field.name})"


def _canonical_k(n, j):
    for k, nk in enumerate(n):
        if k != j and nk > 0:
            return k
    return None


def _run_phase(fn, lat, rows, workers):
    """Run a kernel phase over ``rows``, optionally split across threads.

    Every row writes a distinct cell and reads only data finalized in an
    earlier phase, so the chunked run is bit-identical to a serial one.
    """
    if not rows:
        return []
    exact = lat.field.exact
    args = (lat._a, lat._b, lat.r)
    if not workers or workers <= 1 or len(rows) < 2 * workers:
        return list(fn(*args, rows, exact, EPS_BREAKDOWN, lat.undef))
    size = math.ceil(len(rows) / workers)
    chunks = [rows[i:i + size] for i in range(0, len(rows), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(lambda ch: fn(*args, ch, exact, EPS_BREAKDOWN, lat.undef), chunks))
    failed = []
    for i, part in enumerate(parts):
        failed.extend(i * size + p for p in part)
    return failed


def _alt_a(lat, n, j, skip):
    for k in range(lat.r):
        if k in (j, skip) or n[k] == 0:
            continue
        p = _add(n, k, -1)
        q = _add(p, j, -1)
        vals = (lat.a(p, j), lat.b(p, j), lat.b(p, k), lat.b(q, j), lat.b(q, k))
        if any(v is None for v in vals):
            continue
        ap, bpj, bpk, bqj, bqk = vals
        if ap == 0:
            return ap, k
        den = bqj - bqk
        if lat._tiny(den, bqj, bqk):
            continue
        return ap * (bpj - bpk) / den, k
    return None, None


def _alt_b(lat, n, j, skip):
    for k in range(lat.r):
        if k in (j, skip) or n[k] == 0:
            continue
        p = _add(n, k, -1)
        s = _add(p, j)
        bpj, bpk = lat.b(p, j), lat.b(p, k)
        an = [lat.a(n, i) for i in range(lat.r)]
        as_ = [lat.a(s, i) for i in range(lat.r)]
        if bpj is None or bpk is None or None in an or None in as_:
            continue
        den = bpk - bpj
        if lat._tiny(den, bpk, bpj):
            continue
        return bpj + (sum(an, lat.zero) - sum(as_, lat.zero)) / den, k
    return None, None


def cc_fill(marginals: Sequence[JacobiData], Nvec: Sequence | None = None, dmax: int = 8,
            field: Field | None = None, strict: bool = True, workers: int | None = None) -> NnrrLattice:
    """Fill all NNRR coefficients with |n| <= dmax.

    Parameters
    ----------
    marginals : sequence of JacobiData
        Recurrence data of each functional, up to degree ``dmax``.
    Nvec : sequence, optional
        Support sizes (None for infinite); taken from the marginals when
        omitted.
    strict : bool
        Raise :class:`Breakdown` at the first vanishing divisor.  With
        ``strict=False`` the cell is left undefined, its index is marked
        and the failure is logged in ``lattice.events``.
    workers : int, optional
        Thread count for the per-level phases.  The result does not
        depend on it.

    Notes
    -----
    Level |n| = d is filled in two phases.  First
    ``a_{n,j} = a_{p,j} (b_{p,j} - b_{p,k}) / (b_{q,j} - b_{q,k})`` with
    ``p = n - e_k`` and ``q = p - e_j``; then
    ``b_{n,j} = b_{p,j} + (sum_i a_{n,i} - sum_i a_{s,i}) / (b_{p,k} - b_{p,j})``
    with ``s = n + e_j - e_k``.  k is the smallest axis other than j with
    ``n_k > 0``; other choices are tried only when that divisor vanishes.
    """
    r = len(marginals)
    if r == 0:
        raise ValueError("need at least one marginal")
    if field is None:
        field = RATIONAL
        for m in marginals:
            field = field.join(m.field)
    margs = [m.to_field(field) for m in marginals]
    if Nvec is None:
        Nvec = [m.support_size for m in margs]
    Nvec = tuple(None if N is None else int(N) for N in Nvec)
    for j, (m, N) in enumerate(zip(margs, Nvec)):
        need = dmax if N is None else min(dmax, N - 1)
        if m.L < need + 1:
            raise ValueError(f"marginal {j} has {m.L} coefficients, need {need + 1}")
    lat = NnrrLattice(r, Nvec, dmax, field)
    lat.marginals = margs
    zero = field.zero
    cells, pos = lat.cells, lat.pos

    def fail(kind, n, j, k, detail):
        lat.events.append((kind, n, j, k, detail))
        if strict:
            raise Breakdown((n, j, k), f"{kind}-step: {detail}")

    for d, (lo, hi) in enumerate(lat.level_bounds):
        # a-phase
        rows = []
        for c in range(lo, hi):
            n = cells[c]
            for j in range(r):
                nj, N = n[j], Nvec[j]
                if nj == 0 or (N is not None and nj == N):
                    lat._a[c * r + j] = zero
                elif nj == d:
                    lat._a[c * r + j] = margs[j].a_at(nj)
                else:
                    k = _canonical_k(n, j)
                    p = _add(n, k, -1)
                    rows.append((c, j, k, pos[p], pos[_add(p, j, -1)]))
        failed = _run_phase(lat.kern.cc_a_phase, lat, rows, workers)
        bad = set()
        for f in failed:
            c, j, k = rows[f][:3]
            n = cells[c]
            val, k2 = _alt_a(lat, n, j, k)
            if val is None:
                bad.add(c)
                fail("a", n, j, k, "vanishing or undefined delta")
            else:
                lat._a[c * r + j] = val
        for c in range(lo, hi):
            n = cells[c]
            if c in bad:
                for j in range(r):
                    lat._a[c * r + j] = lat.undef
                lat.status[n] = BREAKDOWN
            elif any(N is not None and n[i] == N for i, N in enumerate(Nvec)):
                lat.status[n] = BOUNDARY
            else:
                lat.status[n] = NORMAL
        # b-phase
        rows = []
        for c in range(lo, hi):
            n = cells[c]
            if c in bad:
                continue
            for j in range(r):
                N = Nvec[j]
                if N is not None and n[j] >= N:
                    continue
                k = _canonical_k(n, j)
                if k is None:
                    lat._b[c * r + j] = margs[j].b_at(n[j])
                    continue
                p = _add(n, k, -1)
                s = _add(p, j)
                rows.append((c, j, k, pos[p], pos[s]))
        failed = _run_phase(lat.kern.cc_b_phase, lat, rows, workers)
        for f in failed:
            c, j, k = rows[f][:3]
            n = cells[c]
            val, k2 = _alt_b(lat, n, j, k)
            if val is None:
                fail("b", n, j, k, "vanishing or undefined delta")
            else:
                lat._b[c * r + j] = val
    return lat


def lattice_from_system(sys: MopSystem, dmax: int, strict: bool = True,
                        workers: int | None = None) -> NnrrLattice:
    """Compute marginal Jacobi data and run :func:`cc_fill`."""
    margs = [jacobi_from_moments(f, dmax + 1, field=sys.field) for f in sys.functionals]
    Nvec = []
    for f, m in zip(sys.functionals, margs):
        N = m.support_size
        if N is None and f.support_size is not None and f.support_size <= dmax:
            N = f.support_size
        Nvec.append(N)
    return cc_fill(margs, Nvec, dmax, sys.field, strict=strict, workers=workers)


# ---------------------------------------------------------------------------
# residuals


class _Max:
    def __init__(self, exact):
        self.value = Fraction(0) if exact else 0.0
        self.scaled = 0.0
        self.where = None
        self.count = 0

    def update(self, res, scale, where):
        self.count += 1
        mag = abs(res)
        sc = float(mag) / max(float(scale), 1.0)
        if mag > self.value:
            self.value = mag
            self.where = where
        self.scaled = max(self.scaled, sc)

    def report(self):
        return {"max": self.value, "max_scaled": self.scaled, "argmax": self.where,
                "count": self.count}


def cc_residuals(lat: NnrrLattice) -> dict:
    """Residuals of the three compatibility conditions.

    Every admissible (n, j, l) with all entries stored is checked.  The
    ``alt_k`` entry recomputes each interior a and b through every
    non-canonical neighbour k and compares with the stored value.
    ``max`` is absolute; ``max_scaled`` divides by max(1, |terms|).
    """
    exact = lat.field.exact
    r = lat.r
    cc1, cc2, cc3, alt = (_Max(exact) for _ in range(4))
    A, B = lat.a, lat.b
    for n in lat.cells:
        for j in range(r):
            for l in range(r):
                if j == l:
                    continue
                nl, nj = _add(n, l), _add(n, j)
                b_nl_j, b_nj_l = B(nl, j), B(nj, l)
                b_n_j, b_n_l = B(n, j), B(n, l)
                if None not in (b_nl_j, b_nj_l, b_n_j, b_n_l):
                    res = b_nl_j - b_nj_l - (b_n_j - b_n_l)
                    cc1.update(res, max(abs(b_nl_j), abs(b_nj_l), abs(b_n_j), abs(b_n_l)),
                               (n, j, l))
                    sa_l = [A(nl, i) for i in range(r)]
                    sa_j = [A(nj, i) for i in range(r)]
                    if None not in sa_l and None not in sa_j:
                        t1, t2 = b_n_l * b_nl_j, b_n_j * b_nj_l
                        s1, s2 = sum(sa_l, lat.zero), sum(sa_j, lat.zero)
                        res = t1 - t2 - (s1 - s2)
                        cc2.update(res, max(abs(t1), abs(t2), abs(s1), abs(s2)), (n, j, l))
                if n[j] > 0:
                    m = _add(n, j, -1)
                    vals = (A(nl, j), B(m, j), B(m, l), A(n, j), b_n_j, b_n_l)
                    if None not in vals:
                        a1, bmj, bml, a0, bj, bl = vals
                        t1, t2 = a1 * (bmj - bml), a0 * (bj - bl)
                        cc3.update(t1 - t2, max(abs(t1), abs(t2)), (n, j, l))
        # alternative neighbours
        for j in range(r):
            canon = _canonical_k(n, j)
            for k in range(r):
                if k == j or k == canon or n[k] == 0:
                    continue
                if n[j] > 0 and n[j] != lat.Nvec[j]:
                    stored = A(n, j)
                    p = _add(n, k, -1)
                    q = _add(p, j, -1)
                    vals = (A(p, j), B(p, j), B(p, k), B(q, j), B(q, k))
                    if stored is not None and None not in vals:
                        ap, bpj, bpk, bqj, bqk = vals
                        t1, t2 = stored * (bqj - bqk), ap * (bpj - bpk)
                        alt.update(t1 - t2, max(abs(t1), abs(t2)), (n, j, k, "a"))
                stored = B(n, j)
                p = _add(n, k, -1)
                s = _add(p, j)
                bpj, bpk = B(p, j), B(p, k)
                an = [A(n, i) for i in range(r)]
                as_ = [A(s, i) for i in range(r)]
                if stored is not None and None not in (bpj, bpk) and None not in an + as_:
                    t1 = (stored - bpj) * (bpk - bpj)
                    t2 = sum(an, lat.zero) - sum(as_, lat.zero)
                    alt.update(t1 - t2, max(abs(t1), abs(t2)), (n, j, k, "b"))
    return {"CC1": cc1.report(), "CC2": cc2.report(), "CC3": cc3.report(),
            "alt_k": alt.report()}


# ---------------------------------------------------------------------------
# type II polynomials


def type2_coeffs(lat: NnrrLattice, n) -> Poly:
    """Monic P_n generated by the nearest neighbour recurrence.

    All P_m with m <= n are built bottom-up (and cached on the lattice)
    through P_m = (x - b_{p,j}) P_p - sum_i a_{p,i} P_{p-e_i}, p = m - e_j,
    using the smallest axis j with a usable b_{p,j}.
    """
    n = tuple(n)
    if n not in lat.pos:
        raise KeyError(f"{n} outside the lattice")
    cache = lat._polys
    if n in cache:
        return cache[n]
    one = lat.field.one
    box = sorted(itertools.product(*(range(v + 1) for v in n)), key=lambda m: (sum(m), m))
    for m in box:
        if m in cache:
            continue
        if sum(m) == 0:
            cache[m] = Poly((one,))
            continue
        done = False
        for j in range(lat.r):
            if m[j] == 0:
                continue
            p = _add(m, j, -1)
            bpj = lat.b(p, j)
            if bpj is None:
                continue
            P = cache[p]
            acc = P.mul_x() - P * bpj
            ok = True
            for i in range(lat.r):
                if p[i] == 0:
                    continue
                ai = lat.a(p, i)
                if ai is None:
                    ok = False
                    break
                if ai != 0:
                    acc = acc - cache[_add(p, i, -1)] * ai
            if ok:
                cache[m] = acc
                done = True
                break
        if not done:
            raise Breakdown(m, "no recurrence route reaches this index")
    return cache[n]


def _check_support(sys: MopSystem, n):
    for j, (nj, N) in enumerate(zip(n, sys.Nvec)):
        if N is not None and nj > N:
            raise SingularMatrixError(j)


def _type2_system(sys: MopSystem, n, moments=None):
    moments = moments or sys.moments
    N = sum(n)
    rows, rhs = [], []
    for j, nj in enumerate(n):
        if nj == 0:
            continue
        c = moments(j, N + nj)
        for k in range(nj):
            rows.append(c[k:k + N])
            rhs.append(-c[N + k])
    return rows, rhs


def _high_precision(sys: MopSystem) -> bool:
    return not sys.field.exact and all(f.has_hp() for f in sys.functionals)


def _mp_moments(sys):
    return lambda j, count: [sys.functionals[j].moment_mp(i) for i in range(count)]


def _mp_solve_raw(rows, rhs) -> list:
    """Solve at the working precision; raise when fewer than ten digits survive.

    Singularity means a 1-norm condition number above 10^(MP_DPS - 10).
    """
    M = mpmath.matrix(rows)
    try:
        inv = mpmath.inverse(M)
    except ZeroDivisionError:
        raise SingularMatrixError(0) from None
    if mpmath.mnorm(M, 1) * mpmath.mnorm(inv, 1) > mpmath.mpf(10) ** (MP_DPS - 10):
        raise SingularMatrixError(0)
    return list(mpmath.lu_solve(M, mpmath.matrix(rhs)))


def _mp_solve(rows, rhs, field):
    """Solve at MP_DPS digits and round to ``field``."""
    if not rows:
        return []
    conv = complex if field.name == "complex" else float
    return [conv(v) for v in _mp_solve_raw(rows, rhs)]


def _solve_moment_system(sys, build):
    """Run ``build(moments)`` and solve the resulting square system.

    Float systems whose functionals provide accurate high precision
    moments are solved at MP_DPS digits, then rounded; this keeps the
    moment oracles usable where double precision Hankel systems are too
    ill-conditioned.
    """
    if _high_precision(sys):
        with mpmath.workdps(MP_DPS):
            rows, rhs = build(_mp_moments(sys))
            return _mp_solve(rows, rhs, sys.field)
    rows, rhs = build(sys.moments)
    return solve_linear(rows, rhs)


def type2_oracle(sys: MopSystem, n) -> Poly:
    """Monic type II polynomial from the stacked Hankel system.

    Raises SingularMatrixError when n is not normal.
    """
    n = tuple(n)
    if len(n) != sys.r:
        raise ValueError("index length does not match the system")
    _check_support(sys, n)
    sol = _solve_moment_system(sys, lambda mom: _type2_system(sys, n, mom))
    return Poly(list(sol) + [sys.field.one])


def _pair(sys, j, P: Poly, k: int):
    """<P, x^k>_j."""
    if not P.coeffs:
        return sys.field.zero
    c = sys.moments(j, k + len(P.coeffs))
    return sum((pi * c[i + k] for i, pi in enumerate(P.coeffs)), sys.field.zero)


def _oracle_ops(sys: MopSystem):
    """(poly, pair, finish) used by the coefficient oracles.

    For float systems with high precision moments the polynomials and
    pairings are carried at MP_DPS digits (call inside ``workdps``), since
    the pairings cancel heavily.  ``finish`` rounds the result.
    """
    if not _high_precision(sys):
        return (lambda n: type2_oracle(sys, n).coeffs,
                lambda j, c, k: _pair(sys, j, Poly(c), k),
                lambda v: v)

    def poly(n):
        _check_support(sys, n)
        rows, rhs = _type2_system(sys, n, _mp_moments(sys))
        if not rows:
            return [mpmath.mpf(1)]
        return _mp_solve_raw(rows, rhs) + [mpmath.mpf(1)]

    def pair(j, c, k):
        f = sys.functionals[j]
        return mpmath.fsum(ci * f.moment_mp(i + k) for i, ci in enumerate(c))

    conv = complex if sys.field.name == "complex" else float
    return poly, pair, conv


def _oracle_context(sys):
    return mpmath.workdps(MP_DPS) if _high_precision(sys) else contextlib.nullcontext()


def _oracle_a(ops, n, i):
    poly, pair, _ = ops
    num = pair(i, poly(n), n[i])
    den = pair(i, poly(_add(n, i, -1)), n[i] - 1)
    return num / den


def oracle_a(sys: MopSystem, n, i):
    """a_{n,i} = <P_n, x^{n_i}>_i / <P_{n-e_i}, x^{n_i-1}>_i (0 when n_i = 0)."""
    n = tuple(n)
    if n[i] == 0:
        return sys.field.zero
    with _oracle_context(sys):
        ops = _oracle_ops(sys)
        return ops[2](_oracle_a(ops, n, i))


def oracle_b(sys: MopSystem, n, j):
    """b_{n,j} by projecting the recurrence onto x^{n_j} under the j-th functional.

    b = (<x P_n, x^{n_j}> - sum_i a_{n,i} <P_{n-e_i}, x^{n_j}>) / <P_n, x^{n_j}>,
    all pairings taken with respect to functional j.
    """
    n = tuple(n)
    with _oracle_context(sys):
        ops = _oracle_ops(sys)
        poly, pair, finish = ops
        P = poly(n)
        num = pair(j, P, n[j] + 1)
        for i in range(sys.r):
            if n[i] == 0:
                continue
            ai = _oracle_a(ops, n, i)
            if ai != 0:
                num -= ai * pair(j, poly(_add(n, i, -1)), n[j])
        return finish(num / pair(j, P, n[j]))


def nnr_cor_residual(lat: NnrrLattice, n, j, l) -> object:
    """P_{n+e_l} - P_{n+e_j} - (b_{n,j} - b_{n,l}) P_n, coefficient max norm."""
    n = tuple(n)
    res = (type2_coeffs(lat, _add(n, l)) - type2_coeffs(lat, _add(n, j))
           - type2_coeffs(lat, n) * (lat.b(n, j) - lat.b(n, l)))
    return _maxnorm(res.coeffs, lat.field.exact)


def _maxnorm(values, exact):
    m = Fraction(0) if exact else 0.0
    for v in values:
        if abs(v) > m:
            m = abs(v)
    return m


# ---------------------------------------------------------------------------
# type I


@dataclass
class TypeIVector:
    """Vector (A^(1), ..., A^(r)) of polynomials."""

    polys: list
    normalized: bool = True

    @classmethod
    def zeros(cls, r: int) -> "TypeIVector":
        return cls([Poly() for _ in range(r)], False)

    @property
    def r(self) -> int:
        return len(self.polys)

    def __add__(self, other):
        return TypeIVector([p + q for p, q in zip(self.polys, other.polys)], False)

    def __sub__(self, other):
        return TypeIVector([p - q for p, q in zip(self.polys, other.polys)], False)

    def __mul__(self, scalar):
        return TypeIVector([p * scalar for p in self.polys], False)

    __rmul__ = __mul__

    def mul_x(self) -> "TypeIVector":
        return TypeIVector([p.mul_x() for p in self.polys], False)

    def __call__(self, x) -> list:
        return [p(x) for p in self.polys]

    def max_norm(self):
        exact = all(isinstance(c, Fraction) for p in self.polys for c in p.coeffs)
        return _maxnorm([c for p in self.polys for c in p.coeffs], exact)

    def max_diff(self, other) -> float:
        return max((p.max_diff(q) for p, q in zip(self.polys, other.polys)), default=0.0)


def type1_solve(sys: MopSystem, n) -> TypeIVector:
    """Type I vector normalized so that sum_j <A^(j), x^{|n|-1}>_j = 1."""
    n = tuple(n)
    r = sys.r
    N = sum(n)
    if N == 0:
        return TypeIVector.zeros(r)
    _check_support(sys, n)

    def build(moments):
        mom = [moments(j, N + n[j] - 1) if n[j] else [] for j in range(r)]
        rows = []
        for k in range(N):
            row = []
            for j in range(r):
                row.extend(mom[j][i + k] for i in range(n[j]))
            rows.append(row)
        rhs = [0] * N
        rhs[-1] = 1
        return rows, rhs

    sol = _solve_moment_system(sys, build)
    if sys.field.exact:
        sol = [coerce(v, sys.field) for v in sol]
    polys, at = [], 0
    for j in range(r):
        polys.append(Poly(sol[at:at + n[j]]))
        at += n[j]
    return TypeIVector(polys, True)


def type1_normalization(sys: MopSystem, A: TypeIVector, n):
    """sum_j <A^(j), x^{|n|-1}>_j."""
    N = sum(n)
    return sum((_pair(sys, j, A.polys[j], N - 1) for j in range(sys.r)), sys.field.zero)


def type1_residual(sys: MopSystem, lat: NnrrLattice, n, j):
    """x A_n - A_{n-e_j} - b_{n-e_j,j} A_n - sum_i a_{n,i} A_{n+e_i} (max norm)."""
    n = tuple(n)
    An = type1_solve(sys, n)
    m = _add(n, j, -1)
    res = An.mul_x() - type1_solve(sys, m) - An * lat.b(m, j)
    for i in range(sys.r):
        ai = lat.a(n, i)
        if ai is None:
            raise Breakdown(n, f"a_{{n,{i}}} not stored")
        if ai != 0:
            res = res - type1_solve(sys, _add(n, i)) * ai
    return res.max_norm()


def type1_cor_residual(sys: MopSystem, lat: NnrrLattice, n, j, l):
    """A_{n-e_l} - A_{n-e_j} - (b_{n-e_j,j} - b_{n-e_l,l}) A_n (max norm)."""
    n = tuple(n)
    mj, ml = _add(n, j, -1), _add(n, l, -1)
    res = (type1_solve(sys, ml) - type1_solve(sys, mj)
           - type1_solve(sys, n) * (lat.b(mj, j) - lat.b(ml, l)))
    return res.max_norm()


# ---------------------------------------------------------------------------
# normality


def normality(sys: MopSystem, n, detail: bool = False):
    """Whether det M_n != 0.

    Exact systems use an exact determinant.  Float systems decide by the
    smallest LU pivot against ``n * machine_eps * max|M|``; with
    ``detail=True`` the pair ``(normal, ill_conditioned)`` is returned, the
    flag marking a smallest pivot below ``eps_rel() * max|M|``.
    """
    n = tuple(n)
    try:
        _check_support(sys, n)
    except SingularMatrixError:
        return (False, False) if detail else False
    if sum(n) == 0:
        return (True, False) if detail else True
    rows, _ = _type2_system(sys, n)
    if sys.field.exact:
        from .numerics import determinant
        ok = determinant(rows) != 0
        return (ok, False) if detail else ok
    arr = np.array(rows, dtype=complex if sys.field.name == "complex" else float)
    lu, _piv = _lu(arr)
    scale = float(np.max(np.abs(arr))) or 1.0
    piv = float(np.min(np.abs(np.diag(lu))))
    ok = piv > arr.shape[0] * np.finfo(float).eps * scale
    ill = piv < eps_rel() * scale
    return (ok, ill) if detail else ok


# ---------------------------------------------------------------------------
# Christoffel-Darboux kernel


def step_line_path(n) -> list:
    """Indices from 0 to n, incrementing axes cyclically while room remains."""
    n = tuple(n)
    cur = [0] * len(n)
    path = [tuple(cur)]
    while tuple(cur) != n:
        for j in range(len(n)):
            if cur[j] < n[j]:
                cur[j] += 1
                path.append(tuple(cur))
    return path


class CDKernel:
    """Vector of bivariate polynomials; ``grids[i][p, q]`` multiplies x^p y^q."""

    def __init__(self, grids: list, field: Field):
        self.grids = grids
        self.field = field

    @property
    def r(self):
        return len(self.grids)

    def at_x(self, x0) -> list:
        """Polynomials in y obtained by fixing x = x0."""
        out = []
        for g in self.grids:
            coeffs = []
            for q in range(g.shape[1]):
                acc = self.field.zero
                for p in range(g.shape[0] - 1, -1, -1):
                    acc = acc * x0 + g[p, q]
                coeffs.append(acc)
            out.append(Poly(coeffs))
        return out

    def at_y(self, y0) -> list:
        """Polynomials in x obtained by fixing y = y0."""
        out = []
        for g in self.grids:
            coeffs = []
            for p in range(g.shape[0]):
                acc = self.field.zero
                for q in range(g.shape[1] - 1, -1, -1):
                    acc = acc * y0 + g[p, q]
                coeffs.append(acc)
            out.append(Poly(coeffs))
        return out

    def __call__(self, x, y) -> list:
        return [p(y) for p in self.at_x(x)]


def _outer_add(grid, P: Poly, A: Poly, scale=1):
    for p, cp in enumerate(P.coeffs):
        if cp == 0:
            continue
        for q, cq in enumerate(A.coeffs):
            grid[p, q] += cp * cq * scale


def _grid(shape, field):
    g = np.empty(shape, dtype=object)
    g.fill(field.zero)
    return g


def cd_kernel(lat: NnrrLattice, sys: MopSystem, n, path: Sequence | None = None) -> CDKernel:
    """K_n(x, y) = sum_k P_{n_k}(x) A_{n_{k+1}}(y) along ``path`` (step-line by default)."""
    n = tuple(n)
    path = [tuple(m) for m in (path or step_line_path(n))]
    if path[0] != (0,) * len(n) or path[-1] != n:
        raise ValueError("path must run from 0 to n")
    for u, v in zip(path, path[1:]):
        if sum(v) - sum(u) != 1 or any(b < a for a, b in zip(u, v)):
            raise ValueError("path must move by unit steps")
    N = sum(n)
    shape = (max(N, 1), max(n) if max(n) > 0 else 1)
    grids = [_grid(shape, sys.field) for _ in range(sys.r)]
    for u, v in zip(path, path[1:]):
        P = type2_coeffs(lat, u)
        A = type1_solve(sys, v)
        for i in range(sys.r):
            _outer_add(grids[i], P, A.polys[i])
    return CDKernel(grids, sys.field)


def cd_residual(lat: NnrrLattice, sys: MopSystem, n, path: Sequence | None = None):
    """Coefficient max norm of the Christoffel-Darboux formula residual.

    (x - y) K_n(x, y) - P_n(x) A_n(y) + sum_j a_{n,j} P_{n-e_j}(x) A_{n+e_j}(y).
    """
    n = tuple(n)
    K = cd_kernel(lat, sys, n, path)
    N = sum(n)
    shape = (N + 2, max(n) + 2)
    exact = sys.field.exact
    out = []
    Pn = type2_coeffs(lat, n)
    An = type1_solve(sys, n)
    extra = []
    for j in range(sys.r):
        aj = lat.a(n, j)
        if aj is None:
            raise Breakdown(n, f"a_{{n,{j}}} not stored")
        if aj != 0:
            extra.append((aj, type2_coeffs(lat, _add(n, j, -1)), type1_solve(sys, _add(n, j))))
    for i in range(sys.r):
        g = _grid(shape, sys.field)
        Kg = K.grids[i]
        for p in range(Kg.shape[0]):
            for q in range(Kg.shape[1]):
                v = Kg[p, q]
                g[p + 1, q] += v
                g[p, q + 1] -= v
        _outer_add(g, Pn, An.polys[i], -1)
        for aj, P, A in extra:
            _outer_add(g, P, A.polys[i], aj)
        out.append(_maxnorm(g.ravel().tolist(), exact))
    return _maxnorm(out, exact)


# ---------------------------------------------------------------------------
# perfectness


def perfectness_scan(sys: MopSystem, dmax: int, lat: NnrrLattice | None = None) -> dict:
    """Normality of every admissible |n| <= dmax plus the b-difference check.

    Returns a report with the non-normal indices (sorted by level), the
    (n, j, l) where a stored delta_{n,j,l} vanishes, and an overall flag.
    """
    if lat is None:
        lat = lattice_from_system(sys, dmax, strict=False)
    non_normal, ill = [], []
    for n in lat.cells:
        ok, flag = normality(sys, n, detail=True)
        if not ok:
            non_normal.append(n)
        if flag:
            ill.append(n)
    zero_delta = []
    for n in lat.cells:
        for j in range(lat.r):
            for l in range(j + 1, lat.r):
                bj, bl = lat.b(n, j), lat.b(n, l)
                if bj is None or bl is None:
                    continue
                if lat._tiny(bl - bj, bl, bj):
                    zero_delta.append((n, j, l))
    return {
        "perfect": not non_normal and not zero_delta,
        "checked": len(lat.cells),
        "non_normal": non_normal,
        "first_failure": non_normal[0] if non_normal else None,
        "zero_delta": zero_delta,
        "ill_conditioned": ill,
        "breakdown_events": len(lat.events),
    }


def field_of_lattice(lat: NnrrLattice) -> Field:
    vals = [v for n in lat.cells for j in range(lat.r) for v in (lat.a(n, j), lat.b(n, j))
            if v is not None]
    return field_of_values(vals)


def coerce_index(n, r: int) -> tuple:
    n = tuple(int(v) for v in n)
    if len(n) != r or any(v < 0 for v in n):
        raise ValueError(f"bad multi-index {n} for r={r}")
    return n


