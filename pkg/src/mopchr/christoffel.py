"""Multi-step Christoffel transforms of multiple orthogonality systems.

The default route appends a finite functional whose degree-m orthogonal
polynomial is Phi and reads the transformed coefficients off the slab
n_r = m of one CC fill.  Determinantal formulas for both types and the
iterated one-step formula are independent verification paths.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .functionals import (DomainError, MopSystem, finite_functional_from_roots, random_weights)
from .lattice import (NnrrLattice, TypeIVector, _add, cc_fill, cd_kernel, lattice_from_system,
                      type1_solve, type2_coeffs, type2_oracle)
from .numerics import (COMPLEX, RATIONAL, Field, Poly, coerce, determinant, eps_rel, field_of,
                       field_of_values)
from .recurrence import Breakdown, JacobiData, jacobi_from_moments

__all__ = [
    "TransformSpec", "RootHit", "DegenerateD", "BoundaryViolation", "augment_system",
    "transform_nnrr", "transform_type2_onestep", "transform_type2_iterated", "transform_type2_det",
    "transform_type1_det", "transform_type1_onestep", "typeICC_residual", "kernel_identities",
    "repeated_transform", "step_shifts", "RETRY_SEED",
]

RETRY_SEED = 20240601


class RootHit(ArithmeticError):
    """P_k(z0) vanishes, so the one-step transform does not exist at k."""

    def __init__(self, k, z0):
        super().__init__(f"P_{k} vanishes at z0={z0}")
        self.k = k
        self.z0 = z0


class DegenerateD(ArithmeticError):
    """The normalizing determinant vanishes: (k, m) is not normal."""

    def __init__(self, k):
        super().__init__(f"normalizing determinant vanishes at k={k}")
        self.k = k


class BoundaryViolation(ArithmeticError):
    """a_{(k,m),r} on the augmented slab is not zero."""


def _parse_root(z):
    if isinstance(z, (list, tuple)):
        return coerce(z, COMPLEX)
    if isinstance(z, str):
        s = z.strip()
        if "j" in s:
            return complex(s)
        return coerce(s, RATIONAL)
    if isinstance(z, float) and z.is_integer():
        return coerce(z, RATIONAL)
    return z


@dataclass(frozen=True)
class TransformSpec:
    """Phi given by its distinct roots (canonical order) and multiplicities.

    ``weights`` (one per distinct root) and ``taylor_weights`` (one list
    per distinct root, length = multiplicity) choose the appended finite
    functional; by default every weight is 1.
    """

    roots: tuple
    mults: tuple
    weights: tuple | None = None
    taylor_weights: tuple | None = None
    dmax: int = 8

    @classmethod
    def from_roots(cls, roots: Sequence, mults: Sequence | None = None,
                   weights: Sequence | None = None, dmax: int = 8,
                   taylor_weights: Sequence | None = None) -> "TransformSpec":
        if not roots:
            raise DomainError("Phi needs at least one root")
        vals = [_parse_root(z) for z in roots]
        fld = field_of_values(vals)
        vals = [coerce(z, fld) for z in vals]
        mults = [1] * len(vals) if mults is None else [int(m) for m in mults]
        if len(mults) != len(vals) or any(m < 1 for m in mults):
            raise DomainError("multiplicities must be positive and match the roots")
        grouped: dict = {}
        order = []
        for z, m in zip(vals, mults):
            if z not in grouped:
                order.append(z)
                grouped[z] = 0
            grouped[z] += m
        key = lambda z: (complex(z).real, complex(z).imag)
        perm = sorted(range(len(order)), key=lambda i: key(order[i]))
        rts = tuple(order[i] for i in perm)
        ms = tuple(grouped[z] for z in rts)
        if weights is not None:
            if len(weights) != len(order):
                raise DomainError("one weight per distinct root is required")
            weights = tuple(weights[i] for i in perm)
            if any(w == 0 for w in weights):
                raise DomainError("weights must be nonzero")
        if taylor_weights is not None:
            taylor_weights = tuple(tuple(taylor_weights[i]) for i in perm)
        if dmax < 0:
            raise DomainError("dmax must be non-negative")
        return cls(rts, ms, weights, taylor_weights, int(dmax))

    @classmethod
    def from_json(cls, obj: dict) -> "TransformSpec":
        phi = obj.get("phi", obj)
        if "roots" not in phi:
            raise DomainError("transform spec needs phi.roots")
        return cls.from_roots(phi["roots"], phi.get("mults"), obj.get("weights"),
                              int(obj.get("dmax", 8)))

    @property
    def m(self) -> int:
        return sum(self.mults)

    @property
    def field(self) -> Field:
        return field_of_values(self.roots)

    @property
    def groups(self) -> list:
        return list(zip(self.roots, self.mults))

    @property
    def root_list(self) -> list:
        """Roots repeated by multiplicity, canonical order."""
        return [z for z, m in self.groups for _ in range(m)]

    @property
    def phi(self) -> Poly:
        return Poly.from_roots(self.root_list, self.field)

    def with_taylor_weights(self, tw) -> "TransformSpec":
        return TransformSpec(self.roots, self.mults, None, tuple(tuple(w) for w in tw), self.dmax)

    def to_json(self) -> dict:
        from .numerics import scalar_to_json
        out = {"phi": {"roots": [scalar_to_json(z) for z in self.roots], "mults": list(self.mults)},
               "dmax": self.dmax}
        if self.weights is not None:
            out["weights"] = [scalar_to_json(w) for w in self.weights]
        return out


def _block_functional(t: TransformSpec, field: Field | None = None):
    fld = t.field if field is None else field.join(t.field)
    return finite_functional_from_roots(list(t.roots), list(t.weights) if t.weights else None,
                                        mults=list(t.mults), field=fld,
                                        taylor_weights=t.taylor_weights)


def augment_system(nu: MopSystem, t: TransformSpec) -> MopSystem:
    """(nu, mu_r) with mu_r the finite functional whose degree-m polynomial is Phi."""
    return nu.extend(_block_functional(t, nu.field))


# ---------------------------------------------------------------------------
# augmented-system route


def _check_boundary(lat: NnrrLattice, m: int) -> float:
    r = lat.r
    worst = 0.0
    for n in lat.cells:
        if n[r - 1] != m:
            continue
        v = lat.a(n, r - 1)
        if v is None:
            continue
        if lat.field.exact:
            if v != 0:
                raise BoundaryViolation(f"a_{{{n},r}} = {v}")
        else:
            worst = max(worst, abs(v))
            if abs(v) > eps_rel():
                raise BoundaryViolation(f"|a_{{{n},r}}| = {abs(v)}")
    return worst


def transform_nnrr(nu: MopSystem, t: TransformSpec, dmax: int | None = None, strict: bool = True,
                   workers: int | None = None, retry: bool = True) -> NnrrLattice:
    """NNRR lattice of Phi * nu over r-1 axes with |k| <= dmax.

    The augmented system is filled to depth dmax + m.  In strict mode a
    breakdown triggers one retry with seeded pseudo-random rational
    weights on the appended functional.  In non-strict mode the retry is
    kept only when it reduces the number of breakdown events.

    The returned lattice carries ``meta`` entries: the augmented lattice
    and system, the weights used and the boundary check value.
    """
    dmax = t.dmax if dmax is None else dmax
    m = t.m
    depth = dmax + m

    def build(spec):
        aug = augment_system(nu, spec)
        return aug, lattice_from_system(aug, depth, strict=strict, workers=workers)

    used = "default"
    try:
        aug, lat = build(t)
    except Breakdown:
        if not (strict and retry):
            raise
        t = t.with_taylor_weights(random_weights(t.groups, RETRY_SEED))
        aug, lat = build(t)
        used = "random"
    else:
        if not strict and retry and lat.events:
            t2 = t.with_taylor_weights(random_weights(t.groups, RETRY_SEED))
            aug2, lat2 = build(t2)
            if len(lat2.events) < len(lat.events):
                aug, lat, t, used = aug2, lat2, t2, "random"
    boundary = _check_boundary(lat, m)
    slab = lat.slab(nu.r, m)
    slab.meta.update({"augmented": lat, "system": aug, "spec": t, "weights": used,
                      "boundary_max": boundary})
    return slab


# ---------------------------------------------------------------------------
# type II formulas


def _tiny_value(v, ref) -> bool:
    if isinstance(v, int) or field_of(v).exact:
        return v == 0
    return abs(v) <= eps_rel() * max(abs(ref), 1e-300)


def _eval_scale(P: Poly, z) -> float:
    az = abs(z)
    return sum(abs(c) * az ** i for i, c in enumerate(P.coeffs))


def _divide_linear(P: Poly, z0) -> Poly:
    """Quotient of P by (x - z0); the remainder is dropped."""
    q, _ = divmod(P, Poly((-z0, z0 * 0 + 1)))
    return q


def transform_type2_onestep(lat: NnrrLattice, k, j: int, z0) -> Poly:
    """Monic type II polynomial of (x - z0) nu at k.

    P^_k = [P_{k+e_j} - (P_{k+e_j}(z0) / P_k(z0)) P_k] / (x - z0).
    """
    k = tuple(k)
    z0 = coerce(z0, lat.field.join(field_of(z0)))
    Pk = type2_coeffs(lat, k)
    Pk = Pk.to_field(lat.field.join(field_of(z0)))
    v = Pk(z0)
    if _tiny_value(v, _eval_scale(Pk, z0)):
        raise RootHit(k, z0)
    Q = type2_coeffs(lat, _add(k, j)).to_field(lat.field.join(field_of(z0)))
    return _divide_linear(Q - Pk * (Q(z0) / v), z0)


def transform_type2_iterated(polys: dict, roots: Sequence, kmax: int) -> dict:
    """Apply the one-step formula once per root (with multiplicity).

    ``polys`` maps multi-indices to type II polynomials of the starting
    system for all |k| <= kmax + len(roots).  Returns a map over |k| <= kmax;
    entries are None where P_k(z) vanished at some stage or no neighbour
    was available.
    """
    cur = dict(polys)
    for z in roots:
        nxt = {}
        top = max(sum(k) for k in cur) - 1
        for k, Pk in cur.items():
            if sum(k) > top:
                continue
            if Pk is None:
                nxt[k] = None
                continue
            fld = field_of_values(list(Pk.coeffs) + [z])
            zz = coerce(z, fld)
            Pk = Pk.to_field(fld)
            v = Pk(zz)
            if _tiny_value(v, _eval_scale(Pk, zz)):
                nxt[k] = None
                continue
            res = None
            for j in range(len(k)):
                Q = cur.get(_add(k, j))
                if Q is None:
                    continue
                Q = Q.to_field(fld)
                res = _divide_linear(Q - Pk * (Q(zz) / v), zz)
                break
            nxt[k] = res
        cur = nxt
    return {k: P for k, P in cur.items() if sum(k) <= kmax}


def step_shifts(r: int, count: int, k=None, Nvec=None, cap: int | None = None) -> list:
    """Shifts s_0 = 0, ..., s_count along the step-line from k.

    Axes are visited cyclically; an axis is skipped while k + s would
    exceed its support size or ``cap``.  When every axis is blocked the
    cycle continues regardless (finite-support substitution handles it).
    """
    k = (0,) * r if k is None else tuple(k)
    Nvec = (None,) * r if Nvec is None else tuple(Nvec)
    s = [0] * r
    out = [tuple(s)]
    axis = 0
    for _ in range(count):
        chosen = None
        for t in range(r):
            j = (axis + t) % r
            N = Nvec[j]
            if N is not None and k[j] + s[j] + 1 > N:
                continue
            if cap is not None and s[j] + 1 > cap:
                continue
            chosen = j
            break
        if chosen is None:
            chosen = axis % r
        s[chosen] += 1
        out.append(tuple(s))
        axis = chosen + 1
    return out


def _value_rows(polys: Sequence[Poly], groups, fld) -> list:
    """Rows P^{(d)}(z)/d! for each root z and d below its multiplicity."""
    rows = []
    for z, mult in groups:
        zz = coerce(z, fld)
        for d in range(mult):
            row = []
            for P in polys:
                Q = P.derivative(d) if d else P
                row.append(Q.to_field(fld)(zz) / math.factorial(d))
            rows.append(row)
    return rows


def _minors(rows: list, ncols: int) -> list:
    """Determinants of ``rows`` with column c removed, for every c."""
    out = []
    for c in range(ncols):
        sub = [[row[i] for i in range(ncols) if i != c] for row in rows]
        out.append(determinant(sub))
    return out


def _bordered(polys: Sequence[Poly], rows: list, phi: Poly, index, fld) -> Poly:
    minors = _minors(rows, len(polys))
    D = minors[0]
    scale = max((abs(v) for v in minors), default=0.0)
    if (fld.exact and D == 0) or (not fld.exact and abs(D) <= eps_rel() * max(scale, 1e-300)):
        raise DegenerateD(index)
    acc = Poly()
    for c, (P, M) in enumerate(zip(polys, minors)):
        if M != 0:
            acc = acc + P.to_field(fld) * (M if c % 2 == 0 else -M)
    q, _rem = divmod(acc, phi.to_field(fld))
    return q / D


def _poly_or_substitute(lat: NnrrLattice, idx, degree: int) -> Poly:
    if idx in lat.pos:
        return type2_coeffs(lat, idx)
    if all(N is not None for N in lat.Nvec):
        K = tuple(lat.Nvec)
        if K in lat.pos:
            return type2_coeffs(lat, K).mul_x(degree - sum(K))
    raise Breakdown(idx, "index outside the lattice and no substitute available")


def transform_type2_det(lat: NnrrLattice, k, t: TransformSpec, shifts: Sequence | None = None) -> Poly:
    """Bordered-determinant formula for the type II polynomial of Phi * nu.

    Columns are P_{k+s_m}, ..., P_{k+s_0}; rows are the polynomial row and
    the values at the roots (derivative rows for repeated roots).  Indices
    beyond finite support sizes are replaced by x^{|k|+j-|K|} P_K.
    """
    k = tuple(k)
    m = t.m
    if shifts is None:
        shifts = step_shifts(lat.r, m, k, lat.Nvec)
    shifts = [tuple(s) for s in shifts]
    if len(shifts) != m + 1 or any(sum(s) != i for i, s in enumerate(shifts)):
        raise ValueError("need shifts s_0..s_m with |s_i| = i")
    fld = lat.field.join(t.field)
    polys = []
    for i in range(m, -1, -1):
        idx = tuple(a + b for a, b in zip(k, shifts[i]))
        polys.append(_poly_or_substitute(lat, idx, sum(k) + i))
    rows = _value_rows(polys, t.groups, fld)
    return _bordered(polys, rows, t.phi, k, fld)


# ---------------------------------------------------------------------------
# type I formulas


def _component_rows(vecs: Sequence[TypeIVector], groups, fld) -> list:
    rows = []
    r = vecs[0].r
    for z, mult in groups:
        zz = coerce(z, fld)
        for d in range(mult):
            for i in range(r):
                row = []
                for A in vecs:
                    P = A.polys[i]
                    Q = P.derivative(d) if d else P
                    row.append(Q.to_field(fld)(zz) / math.factorial(d))
                rows.append(row)
    return rows


def _bordered_vector(vecs, rows, phi, index, fld) -> TypeIVector:
    minors = _minors(rows, len(vecs))
    D = minors[0]
    scale = max((abs(v) for v in minors), default=0.0)
    if (fld.exact and D == 0) or (not fld.exact and abs(D) <= eps_rel() * max(scale, 1e-300)):
        raise DegenerateD(index)
    r = vecs[0].r
    out = []
    for j in range(r):
        acc = Poly()
        for c, (A, M) in enumerate(zip(vecs, minors)):
            if M != 0:
                acc = acc + A.polys[j].to_field(fld) * (M if c % 2 == 0 else -M)
        q, _ = divmod(acc, phi.to_field(fld))
        out.append(q / D)
    return TypeIVector(out, True)


def transform_type1_det(nu: MopSystem, k, t: TransformSpec,
                        shifts: Sequence | None = None) -> TypeIVector:
    """Type I vector of Phi * nu from the ((r-1)m+1)-size bordered determinant.

    Shifts follow the step-line with every coordinate capped at m.
    """
    k = tuple(k)
    r = nu.r
    if sum(k) == 0:
        return TypeIVector.zeros(r)
    count = r * t.m
    if shifts is None:
        shifts = step_shifts(r, count, k, nu.Nvec, cap=t.m)
    shifts = [tuple(s) for s in shifts]
    if len(shifts) != count + 1 or any(sum(s) != i for i, s in enumerate(shifts)):
        raise ValueError("need shifts s_0..s_{(r-1)m} with |s_i| = i")
    if any(v > t.m for s in shifts for v in s):
        raise ValueError("type I shifts must satisfy s_j <= m")
    fld = nu.field.join(t.field)
    vecs = [type1_solve(nu, tuple(a + b for a, b in zip(k, s))) for s in shifts]
    rows = _component_rows(vecs, t.groups, fld)
    return _bordered_vector(vecs, rows, t.phi, k, fld)


def transform_type1_onestep(nu: MopSystem, k, z0) -> TypeIVector:
    """Type I vector of (x - z0) nu from nearest-neighbour columns.

    Columns A_k, A_{k+e_1}, ..., A_{k+e_{r-1}}; the normalizing
    determinant is built from the neighbour values at z0.
    """
    k = tuple(k)
    r = nu.r
    if sum(k) == 0:
        return TypeIVector.zeros(r)
    t = TransformSpec.from_roots([z0])
    fld = nu.field.join(t.field)
    vecs = [type1_solve(nu, k)] + [type1_solve(nu, _add(k, i)) for i in range(r)]
    rows = _component_rows(vecs, t.groups, fld)
    return _bordered_vector(vecs, rows, t.phi, k, fld)


def typeICC_residual(nu: MopSystem, k, j: int, z0):
    """Check A_k - A^_{k-e_j} = delta A^_k.

    Returns ``(residual, delta)``; delta is fitted from the largest
    coefficient of A^_k and the residual is the coefficient max norm.
    """
    k = tuple(k)
    A = type1_solve(nu, k)
    Ah = transform_type1_onestep(nu, k, z0)
    Ahm = transform_type1_onestep(nu, _add(k, j, -1), z0)
    diff = A - Ahm
    best, pos = None, None
    for i, P in enumerate(Ah.polys):
        for c, v in enumerate(P.coeffs):
            if v != 0 and (best is None or abs(v) > abs(best)):
                best, pos = v, (i, c)
    if best is None:
        raise DegenerateD(k)
    delta = diff.polys[pos[0]][pos[1]] / best
    return (diff - Ah * delta).max_norm(), delta


# ---------------------------------------------------------------------------
# kernel identities


def kernel_identities(sys: MopSystem, lat: NnrrLattice, k, z0) -> dict:
    """Residuals of the kernel identities at k.

    ``christoffel``: K_k(z0, x) + P_k(z0) A^_k(x).
    ``type2``: P_k(z0) K_k(x, z0) - sum_j a_{k,j} P_{k-e_j}(z0) A_{k+e_j}(z0) P^_{k-e_j}(x),
    per component.  ``type2_swapped`` evaluates the same right-hand side
    against K_k(z0, x); it is reported for reference only.
    Keys ending in ``_rel`` divide by the largest coefficient of the
    kernel term, which is the meaningful measure in floating point.
    The transformed polynomials come from moment solves on (x - z0) sys.
    """
    k = tuple(k)
    fld = sys.field.join(field_of(z0))
    z = coerce(z0, fld)
    r = sys.r
    hat = sys.modified(Poly((-z, z * 0 + 1)))
    if sum(k) == 0:
        zero = fld.zero
        return {"christoffel": zero, "type2": zero, "type2_swapped": zero,
                "christoffel_rel": 0.0, "type2_rel": 0.0}
    K = cd_kernel(lat, sys, k)
    Kz_x = [P.to_field(fld) for P in K.at_x(z)]
    Kx_z = [P.to_field(fld) for P in K.at_y(z)]
    Pk = type2_coeffs(lat, k).to_field(fld)
    pk = Pk(z)
    Ah = type1_solve(hat, k)
    res1 = max((_norm(Kz_x[i] + Ah.polys[i] * pk) for i in range(r)), key=abs)
    terms = []
    for j in range(r):
        aj = lat.a(k, j)
        if aj is None:
            raise Breakdown(k, f"a_{{k,{j}}} not stored")
        if aj == 0:
            continue
        km = _add(k, j, -1)
        Pm = type2_coeffs(lat, km).to_field(fld)
        Aj = type1_solve(sys, _add(k, j))
        Phat = type2_oracle(hat, km)
        terms.append((aj * Pm(z), Aj, Phat))
    res2 = res3 = None
    for i in range(r):
        rhs = Poly()
        for coef, Aj, Phat in terms:
            rhs = rhs + Phat * (coef * Aj.polys[i].to_field(fld)(z))
        v2 = _norm(Kx_z[i] * pk - rhs)
        v3 = _norm(Kz_x[i] * pk - rhs)
        res2 = v2 if res2 is None or abs(v2) > abs(res2) else res2
        res3 = v3 if res3 is None or abs(v3) > abs(res3) else res3
    s1 = max(abs(_norm(P)) for P in Kz_x) or 1
    s2 = max(abs(_norm(P * pk)) for P in Kx_z) or 1
    return {"christoffel": res1, "type2": res2, "type2_swapped": res3,
            "christoffel_rel": float(abs(res1) / s1),
            "type2_rel": float(abs(res2) / s2)}


def _norm(P: Poly):
    m = None
    for c in P.coeffs:
        if m is None or abs(c) > m:
            m = abs(c)
    if m is None:
        return 0
    return m


# ---------------------------------------------------------------------------
# repeated transforms


def repeated_transform(nu: MopSystem, specs: Sequence[TransformSpec], dmax: int,
                       strict: bool = True, workers: int | None = None) -> list:
    """Lattices of Phi_1 nu, Phi_1 Phi_2 nu, ... from one extended CC fill.

    The last axis carries the direct sum of the finite Jacobi blocks of
    Phi_1, Phi_2, ...; its a-coefficients vanish at every block boundary.
    The axis is truncated at the last boundary, which leaves every
    coefficient up to that slab unchanged.
    """
    if not specs:
        raise DomainError("need at least one transform spec")
    fld = nu.field
    for t in specs:
        fld = fld.join(t.field)
    b_all, a_all = [], []
    bounds = []
    for t in specs:
        jd = jacobi_from_moments(_block_functional(t, fld), t.m, field=fld)
        if jd.support_size != t.m:
            raise DomainError("block functional does not have the expected size")
        b_all.extend(jd.b)
        a_all.extend([fld.zero] + list(jd.a[1:]))
        bounds.append(len(b_all))
    total = len(b_all)
    block = JacobiData(b_all, a_all, total, fld.one)
    depth = dmax + total
    margs = [jacobi_from_moments(f, depth + 1, field=fld) for f in nu.functionals]
    Nvec = [m.support_size for m in margs] + [total]
    try:
        lat = cc_fill(margs + [block], Nvec, depth, fld, strict=strict, workers=workers)
    except Breakdown as exc:
        idx = exc.index[0] if isinstance(exc.index, tuple) else exc.index
        s = next((i + 1 for i, b in enumerate(bounds) if idx[-1] <= b), len(bounds))
        raise Breakdown((s, exc.index), exc.detail) from exc
    out = []
    for s, M in enumerate(bounds, start=1):
        slab = lat.slab(nu.r, M)
        slab.meta.update({"stage": s, "augmented": lat})
        out.append(slab)
    return out
