"""Polynomial roots, strict interlacing and mesh checks.

Roots of rational polynomials of moderate degree are bracketed by exact
sign evaluation and bisected before a float Newton polish; everything
else goes through a balanced companion eigensolve.  The interlacing
predicate refuses to guess inside its tolerance band.
"""
from __future__ import annotations

import csv
import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
import scipy.linalg

from .functionals import FamilySpec, MopSystem
from .lattice import lattice_from_system, type1_solve, type2_coeffs, type2_oracle
from .numerics import Poly, coerce

__all__ = [
    "RootSet", "Verdict", "NonConverged", "ToleranceAmbiguous", "roots", "interlace", "mesh",
    "interlacing_suite", "mesh_suite", "corollary_chain", "relations_for", "write_csv",
    "CSV_COLUMNS", "TAU", "CLUSTER_TOL",
]

TAU = 1e-9
CLUSTER_TOL = 1e-8
EXACT_MAX_DEGREE = 12
CSV_COLUMNS = ("version", "family", "relation", "index", "j", "verdict", "min_margin", "mesh")
CSV_VERSION = "1"


class NonConverged(ArithmeticError):
    """Newton polishing did not reach the residual tolerance."""

    def __init__(self, index: int, residual: float):
        super().__init__(f"root {index} did not converge (residual {residual:.3e})")
        self.index = index
        self.residual = residual


class ToleranceAmbiguous(ArithmeticError):
    """A root comparison fell inside the interlacing tolerance band."""


class Verdict(enum.Enum):
    STRICT_BELOW = "StrictBelow"      # u owns the smallest zero
    STRICT_ABOVE = "StrictAbove"      # v owns the smallest zero
    INTERLACED = "Interlaced"         # nothing to order (both empty)
    NO = "No"

    @property
    def interlaced(self) -> bool:
        return self is not Verdict.NO


@dataclass
class RootSet:
    """Roots of a polynomial with per-root residuals.

    ``values`` is sorted ascending (by real part, then imaginary part for
    complex sets).  Clustered roots are merged and carry a multiplicity.
    """

    values: np.ndarray
    residuals: np.ndarray
    multiplicities: tuple
    cluster_tolerance: float
    real: bool
    degree: int = 0
    method: str = "companion"

    def __len__(self):
        return len(self.values)

    @property
    def simple(self) -> bool:
        return all(m == 1 for m in self.multiplicities)

    def to_json(self) -> dict:
        vals = [float(v) for v in self.values] if self.real else \
            [[float(v.real), float(v.imag)] for v in self.values]
        return {"values": vals, "residuals": [float(r) for r in self.residuals],
                "multiplicities": list(self.multiplicities), "real": self.real,
                "cluster_tolerance": self.cluster_tolerance, "method": self.method}


# ---------------------------------------------------------------------------
# root finding


def _as_arrays(p: Poly):
    exact = all(isinstance(c, (int, Fraction)) for c in p.coeffs)
    cplx = any(isinstance(c, complex) and c.imag != 0 for c in p.coeffs)
    dtype = complex if cplx else float
    return exact, np.array([dtype(c) for c in p.coeffs], dtype=dtype)


def _companion_roots(c: np.ndarray) -> np.ndarray:
    n = len(c) - 1
    C = np.zeros((n, n), dtype=np.result_type(c.dtype, float))
    C[1:, :-1] = np.eye(n - 1)
    C[:, -1] = -c[:-1] / c[-1]
    # scipy's geev path balances the matrix before the QR iteration
    return scipy.linalg.eigvals(C, overwrite_a=True, check_finite=False)


def _horner(c: np.ndarray, z):
    v = 0 * z + c[-1]
    d = 0 * z
    for a in c[-2::-1]:
        d = d * z + v
        v = v * z + a
    return v, d


def _newton(c, z, steps=8):
    best, best_res = z, abs(_horner(c, z)[0])
    for _ in range(steps):
        v, d = _horner(c, z)
        if d == 0:
            break
        z = z - v / d
        res = abs(_horner(c, z)[0])
        if res < best_res:
            best, best_res = z, res
        else:
            break
    return best


def _sign(p: Poly, x: Fraction) -> int:
    v = p(x)
    return (v > 0) - (v < 0)


def _exact_real_roots(p: Poly, guesses: np.ndarray):
    """Bracket and bisect every root of a rational polynomial.

    Returns None unless ``deg p`` sign changes are found, i.e. unless all
    roots are real and simple.
    """
    n = p.degree
    re = np.sort(guesses.real)
    bound = 1 + max(abs(Fraction(c) / p.lead) for c in p.coeffs[:-1]) if n else Fraction(1)
    cuts = [-bound]
    for a, b in zip(re[:-1], re[1:]):
        cuts.append(Fraction((a + b) / 2))
    cuts.append(bound)
    signs = [_sign(p, x) for x in cuts]
    if 0 in signs:
        return None
    if sum(1 for s, t in zip(signs[:-1], signs[1:]) if s != t) != n:
        return None
    out = []
    for lo, hi, slo in zip(cuts[:-1], cuts[1:], signs[:-1]):
        # stop once the bracket is below double resolution
        width = max(abs(float(lo)), abs(float(hi)), 1.0) * 2.0 ** -60
        while hi - lo > width:
            mid = (lo + hi) / 2
            mid = Fraction(float(mid))      # keep denominators dyadic and short
            if mid <= lo or mid >= hi:
                break
            s = _sign(p, mid)
            if s == 0:
                lo = hi = mid
                break
            if s == slo:
                lo = mid
            else:
                hi = mid
        out.append(float((lo + hi) / 2))
    return np.array(out)


def roots(p: Poly, cluster_tolerance: float = CLUSTER_TOL, polish_tol: float = 1e-9,
          exact_max_degree: int = EXACT_MAX_DEGREE) -> RootSet:
    """Roots of ``p``.

    Parameters
    ----------
    p : Poly
        Degree at least 1.
    cluster_tolerance : float
        Roots closer than this (times ``max(1, |z|)``) are merged; a root
        counts as real when ``|Im z|`` is below the same threshold.
    polish_tol : float
        Largest accepted residual ``|p(z)|`` relative to
        ``sum |c_k| max(|z|, 1)^k``.

    Raises
    ------
    NonConverged
        If some root cannot be polished below ``polish_tol``.
    """
    if p.degree < 1:
        raise ValueError("roots needs a polynomial of degree >= 1")
    exact, c = _as_arrays(p)
    # exact zero roots are split off first
    nz = 0
    while p.coeffs[nz] == 0:
        nz += 1
    q = Poly(p.coeffs[nz:])
    vals = np.zeros(0)
    method = "companion"
    if q.degree >= 1:
        _, cq = _as_arrays(q)
        guesses = _companion_roots(cq)
        vals = None
        if exact and q.degree <= exact_max_degree:
            vals = _exact_real_roots(q, guesses)
            if vals is not None:
                method = "bisection"
        if vals is None:
            vals = np.array([_newton(cq, z) for z in guesses])
    vals = np.concatenate([np.zeros(nz, dtype=vals.dtype), vals])
    absc = np.abs(c)
    res = np.array([abs(_horner(c, z)[0]) for z in vals])
    scale = np.array([abs(_horner(absc, max(abs(z), 1.0))[0]) for z in vals])
    for i, (r, s) in enumerate(zip(res, scale)):
        if r > polish_tol * max(s, 1e-300):
            raise NonConverged(i, float(r / s))
    real = bool(np.all(np.abs(np.imag(vals)) < cluster_tolerance * np.maximum(1.0, np.abs(vals))))
    if real:
        vals = np.real(vals).astype(float)
        order = np.argsort(vals, kind="stable")
    else:
        vals = vals.astype(complex)
        order = np.lexsort((vals.imag, vals.real))
    vals, res = vals[order], res[order]
    merged, mres, mult = [], [], []
    for z, r in zip(vals, res):
        if merged and abs(z - merged[-1]) < cluster_tolerance * max(1.0, abs(z)):
            k = mult[-1]
            merged[-1] = (merged[-1] * k + z) / (k + 1)
            mres[-1] = max(mres[-1], r)
            mult[-1] = k + 1
        else:
            merged.append(z)
            mres.append(r)
            mult.append(1)
    return RootSet(np.array(merged), np.array(mres), tuple(mult), cluster_tolerance, real,
                   p.degree, method)


def _rootset(p: Poly) -> RootSet:
    if p.degree < 1:
        return RootSet(np.zeros(0), np.zeros(0), (), CLUSTER_TOL, True, max(p.degree, 0), "none")
    return roots(p)


# ---------------------------------------------------------------------------
# interlacing and mesh


@dataclass
class InterlaceResult:
    verdict: Verdict
    min_margin: float
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict.interlaced


def interlace(u: RootSet, v: RootSet, tau: float = TAU, detail: bool = False):
    """Strict interlacing of two real root sets.

    Each gap between neighbours of the merged sequence is compared with
    ``tau`` times the local gap (the largest of the adjacent gaps).  A gap
    that is numerically zero means coincident roots and gives ``NO``; a
    positive gap inside the band raises :class:`ToleranceAmbiguous`.

    Returns the verdict, or an :class:`InterlaceResult` with the smallest
    relative margin when ``detail`` is true.
    """
    def done(verdict, margin, reason=""):
        return InterlaceResult(verdict, margin, reason) if detail else verdict

    if not (u.real and v.real):
        return done(Verdict.NO, 0.0, "complex roots")
    if abs(len(u) - len(v)) > 1 or abs(u.degree - v.degree) > 1:
        return done(Verdict.NO, 0.0, "degree difference above one")
    if not (u.simple and v.simple):
        return done(Verdict.NO, 0.0, "multiple root")
    pts = sorted([(float(x), 0) for x in u.values] + [(float(x), 1) for x in v.values])
    if not pts:
        return done(Verdict.INTERLACED, float("inf"))
    xs = np.array([x for x, _ in pts])
    labels = [lab for _, lab in pts]
    gaps = np.diff(xs)
    margin = float("inf")
    for i, g in enumerate(gaps):
        local = max(gaps[max(i - 1, 0):i + 2])
        scale = max(abs(xs[i]), abs(xs[i + 1]), 1.0)
        if g <= 64 * np.finfo(float).eps * scale:
            return done(Verdict.NO, 0.0, "coincident roots")
        rel = float(g / local)
        margin = min(margin, rel)
        if rel < tau:
            raise ToleranceAmbiguous(f"gap {g:.3e} inside the tolerance band at {xs[i]:.6g}")
    if any(a == b for a, b in zip(labels[:-1], labels[1:])):
        return done(Verdict.NO, margin, "no alternation")
    if len(u) != len(v) and labels[0] != (0 if len(u) > len(v) else 1):
        return done(Verdict.NO, margin, "no alternation")
    verdict = Verdict.STRICT_BELOW if labels[0] == 0 else Verdict.STRICT_ABOVE
    return done(verdict, margin)


def mesh(u: RootSet) -> float:
    """Smallest gap between consecutive real roots."""
    if not u.real:
        raise ValueError("mesh needs real roots")
    if len(u) < 2:
        raise ValueError("mesh needs at least two roots")
    if not u.simple:
        return 0.0
    return float(np.min(np.diff(np.asarray(u.values, dtype=float))))


# ---------------------------------------------------------------------------
# family relations

X = Poly((Fraction(0), Fraction(1)))


@dataclass
class Relation:
    """``left(n) ~ right(n)`` over a range of indices.

    ``left`` and ``right`` map (n, j) to a polynomial; ``kind`` is
    "II" or "I" and selects the index range.
    """

    name: str
    left: Callable
    right: Callable
    kind: str = "II"
    uses_j: bool = False
    max_level: int | None = None


class _Polys:
    """Lazy type II / type I polynomials for one family member."""

    def __init__(self, spec: FamilySpec, dmax: int):
        self.spec = spec
        self.sys: MopSystem = spec.system()
        self.dmax = dmax
        self._lat = None
        self._t1 = {}
        self._t2 = {}

    def P(self, n) -> Poly:
        n = tuple(n)
        if n not in self._t2:
            if self.sys.field.exact:
                if self._lat is None:
                    self._lat = lattice_from_system(self.sys, self.dmax + 1, strict=False)
                self._t2[n] = type2_coeffs(self._lat, n)
            else:
                self._t2[n] = type2_oracle(self.sys, n)
        return self._t2[n]

    def A(self, n, j) -> Poly:
        n = tuple(n)
        if n not in self._t1:
            self._t1[n] = type1_solve(self.sys, n)
        return self._t1[n].polys[j]


def _shifted(P: Poly, h) -> Poly:
    """x -> P(x - h)."""
    return P.shift(-h)


def _plus_one(v):
    return tuple(x + 1 for x in v) if isinstance(v, tuple) else v + 1


def _e(n, j):
    return tuple(x + (1 if i == j else 0) for i, x in enumerate(n))


def relations_for(spec: FamilySpec, dmax: int, corrected: bool = True) -> list:
    """Interlacing relations that apply to ``spec``'s family.

    The Hahn family gets two extra relations (``corrected=True``) built
    from the parameter shifts that the weight identities actually give.
    """
    name = spec.name
    base = _Polys(spec, dmax)
    cache = {}

    def member(**changes):
        key = tuple(sorted(changes.items()))
        if key not in cache:
            cache[key] = _Polys(spec.replace(**changes), dmax)
        return cache[key]

    p = spec.params
    rels: list = []

    def pair(label, other, transform=lambda q: q, kind="II", max_level=None):
        """Both halves of a shifted relation: same index and n + e_j."""
        if kind == "II":
            rels.append(Relation(f"{label} ~ P_n", lambda n, j: transform(other().P(n)),
                                 lambda n, j: base.P(n), "II", False, max_level))
            rels.append(Relation(f"{label} ~ P_n+e_j", lambda n, j: transform(other().P(n)),
                                 lambda n, j: base.P(_e(n, j)), "II", True, max_level))
        else:
            rels.append(Relation(f"{label} ~ A_n,j", lambda n, j: other().A(n, j),
                                 lambda n, j: base.A(n, j), "I", True, max_level))
            rels.append(Relation(f"{label} ~ A_n+e_j,j", lambda n, j: other().A(n, j),
                                 lambda n, j: base.A(_e(n, j), j), "I", True, max_level))

    if name == "laguerre1":
        pair("P^{alpha+1}_n", lambda: member(alpha=_plus_one(p["alpha"])))
    elif name == "laguerre2":
        pair("P^{alpha+1}_n", lambda: member(alpha=p["alpha"] + 1))
    elif name == "jacobi_pineiro":
        pair("P^{alpha+1}_n", lambda: member(alpha=_plus_one(p["alpha"])))
        pair("P^{beta+1}_n", lambda: member(beta=p["beta"] + 1))
    elif name == "angelesco_jacobi":
        for key in ("alpha", "beta"):
            pair(f"P^{{{key}+1}}_n", lambda key=key: member(**{key: p[key] + 1}))
        pair("x P^{gamma+1}_n", lambda: member(gamma=p["gamma"] + 1), lambda q: q * X)
        for key in ("alpha", "beta", "gamma"):
            pair(f"A^{{{key}+1}}_n,j", lambda key=key: member(**{key: p[key] + 1}), kind="I")
    elif name == "jacobi_laguerre":
        pair("P^{beta+1}_n", lambda: member(beta=p["beta"] + 1))
        pair("x P^{gamma+1}_n", lambda: member(gamma=p["gamma"] + 1), lambda q: q * X)
        for key in ("beta", "gamma"):
            pair(f"A^{{{key}+1}}_n,j", lambda key=key: member(**{key: p[key] + 1}), kind="I")
    elif name == "jacobi_hermite":
        pair("x P^{gamma+1}_n", lambda: member(gamma=p["gamma"] + 1), lambda q: q * X)
        pair("A^{gamma+1}_n,j", lambda: member(gamma=p["gamma"] + 1), kind="I")
    elif name == "charlier":
        back = lambda n, j: _shifted(base.P(n), 1)
        rels += [
            Relation("P_n(x-1) ~ P_n", back, lambda n, j: base.P(n)),
            Relation("x P_n(x-1) ~ P_n", lambda n, j: back(n, j) * X, lambda n, j: base.P(n)),
            Relation("x P_n(x-1) ~ P_n+e_j", lambda n, j: back(n, j) * X,
                     lambda n, j: base.P(_e(n, j)), "II", True),
        ]
    elif name == "meixner1":
        pair("P^{beta+1}_n(x-1)", lambda: member(beta=p["beta"] + 1), lambda q: _shifted(q, 1))
    elif name == "meixner2":
        pair("P^{beta+1}_n(x-1)", lambda: member(beta=_plus_one(p["beta"])), lambda q: _shifted(q, 1))
    elif name in ("krawtchouk", "hahn"):
        N = int(p["N"])
        lower = lambda: member(N=N - 1)
        pair("P^{N-1}_n(x-1)", lower, lambda q: _shifted(q, 1), max_level=N - 1)
        pair("P^{N-1}_n", lower, max_level=N - 1)
        if name == "hahn" and corrected:
            pair("P^{alpha+1;N-1}_n(x-1)", lambda: member(N=N - 1, alpha=_plus_one(p["alpha"])),
                 lambda q: _shifted(q, 1), max_level=N - 1)
            pair("P^{beta+1;N-1}_n", lambda: member(N=N - 1, beta=p["beta"] + 1),
                 max_level=N - 1)
    return rels


def _indices(r, level):
    if r == 1:
        yield (level,)
        return
    for first in range(level + 1):
        for rest in _indices(r - 1, level - first):
            yield (first,) + rest


def _check(rel: Relation, n, j, tau):
    try:
        left, right = rel.left(n, j), rel.right(n, j)
        res = interlace(_rootset(left), _rootset(right), tau=tau, detail=True)
        verdict, margin, reason = res.verdict.value, res.min_margin, res.reason
    except ToleranceAmbiguous as exc:
        verdict, margin, reason = "Ambiguous", 0.0, str(exc)
    except Exception as exc:  # noqa: BLE001 - every failure is reported, not raised
        verdict, margin, reason = "Error", 0.0, f"{type(exc).__name__}: {exc}"
    return {"relation": rel.name, "index": list(n), "j": j, "verdict": verdict,
            "min_margin": margin, "reason": reason}


def interlacing_suite(spec: FamilySpec, dmax: int, tau: float = TAU, workers: int | None = None,
                      corrected: bool = True) -> dict:
    """Check every applicable interlacing relation for ``|n| <= dmax``.

    Returns a report with one row per (relation, index, j), the failures,
    and the smallest margin seen.  Rows are sorted by relation order,
    then index, then j, whatever the worker count.
    """
    rels = relations_for(spec, dmax, corrected)
    jobs = []
    for ri, rel in enumerate(rels):
        top = dmax if rel.max_level is None else min(dmax, rel.max_level)
        for level in range(top + 1):
            for n in _indices(spec.r, level):
                js = range(spec.r) if rel.uses_j else (None,)
                for j in js:
                    if rel.kind == "I" and n[j] == 0:
                        continue    # A_{n,j} vanishes identically
                    if rel.kind == "II" and not rel.uses_j and level == 0:
                        continue    # constants carry no zeros
                    jobs.append((ri, n, j))
    # the polynomial caches are shared, so fill them serially first when
    # threads are requested; results do not depend on the schedule
    run = lambda job: _check(rels[job[0]], job[1], job[2], tau)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(run, jobs))
    else:
        rows = [run(job) for job in jobs]
    fails = [row for row in rows if row["verdict"] not in ("StrictBelow", "StrictAbove", "Interlaced")]
    margins = [row["min_margin"] for row in rows if row["min_margin"] not in (0.0, float("inf"))]
    return {"family": spec.label(), "dmax": dmax, "tau": tau,
            "relations": [r.name for r in rels], "rows": rows, "failures": fails,
            "min_margin": min(margins) if margins else None, "ok": not fails}


def mesh_suite(spec: FamilySpec, dmax: int, bound: float = 1.0, strict: bool = True,
               tol: float = 1e-9) -> dict:
    """Minimum root gap of every type II polynomial with ``2 <= |n| <= dmax``.

    ``strict`` selects ``mesh > bound - tol``; otherwise ``mesh >= bound - tol``.
    The two differ only at the boundary value itself.
    """
    polys = _Polys(spec, dmax)
    rows = []
    for level in range(2, dmax + 1):
        for n in _indices(spec.r, level):
            try:
                rs = _rootset(polys.P(n))
                m = mesh(rs) if rs.real else float("nan")
            except Exception as exc:  # noqa: BLE001
                rows.append({"index": list(n), "mesh": None, "ok": False, "reason": str(exc)})
                continue
            ok = (m > bound - tol) if strict else (m >= bound - tol)
            rows.append({"index": list(n), "mesh": m, "ok": bool(ok), "reason": ""})
    vals = [r["mesh"] for r in rows if r["mesh"] is not None]
    return {"family": spec.label(), "dmax": dmax, "strict": strict, "rows": rows,
            "min_mesh": min(vals) if vals else None, "ok": all(r["ok"] for r in rows)}


def corollary_chain(sys: MopSystem, z0, dmax: int, tau: float = TAU) -> dict:
    """Check the consequences of ``P_{k+e_j} ~ P_k`` for ``(x - z0) sys``.

    Wherever the hypothesis holds numerically, both
    ``(x - z0) P^_k ~ P_k`` and ``(x - z0) P^_k ~ P_{k+e_j}`` are tested.
    """
    fld = sys.field
    z = coerce(z0, fld)
    lin = Poly((-z, fld.one))
    hat = sys.modified(lin)
    rows = []
    cache = {}

    def P(s, n):
        key = (id(s), n)
        if key not in cache:
            cache[key] = type2_oracle(s, n)
        return cache[key]

    for level in range(1, dmax + 1):
        for k in _indices(sys.r, level):
            for j in range(sys.r):
                kj = _e(k, j)
                hyp = interlace(_rootset(P(sys, kj)), _rootset(P(sys, k)), tau=tau)
                if not hyp.interlaced:
                    rows.append({"index": list(k), "j": j, "hypothesis": False})
                    continue
                lhs = _rootset(P(hat, k) * lin)
                a = interlace(lhs, _rootset(P(sys, k)), tau=tau)
                b = interlace(lhs, _rootset(P(sys, kj)), tau=tau)
                rows.append({"index": list(k), "j": j, "hypothesis": True,
                             "with_P_k": a.value, "with_P_k+e_j": b.value,
                             "ok": a.interlaced and b.interlaced})
    checked = [r for r in rows if r["hypothesis"]]
    return {"z0": str(z0), "rows": rows, "checked": len(checked),
            "ok": all(r["ok"] for r in checked)}


def write_csv(reports: Sequence[dict], path, mesh_by_index: dict | None = None) -> None:
    """One row per (index, relation, verdict, margin, mesh).

    ``mesh_by_index`` maps (family label, index tuple) to the mesh of the
    base polynomial; missing entries are left blank.
    """
    mesh_by_index = mesh_by_index or {}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for rep in reports:
            for row in rep["rows"]:
                m = mesh_by_index.get((rep["family"], tuple(row["index"])))
                w.writerow([CSV_VERSION, rep["family"], row["relation"],
                            " ".join(str(i) for i in row["index"]),
                            "" if row["j"] is None else row["j"], row["verdict"],
                            repr(float(row["min_margin"])), "" if m is None else repr(float(m))])
