"""Verification suites shared by ``mopchr verify`` and the test-suite.

Every suite returns a plain dict report::

    {"suite": name, "ok": bool, "checks": [{"name", "ok", "value", "tol", ...}]}

Reports hold no timings, so identical runs serialize to identical bytes.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .christoffel import (DegenerateD, RootHit, TransformSpec, kernel_identities, repeated_transform, step_shifts,
                          transform_nnrr, transform_type1_det, transform_type1_onestep,
                          transform_type2_det, transform_type2_iterated)
from .functionals import FamilySpec, MopSystem, finite_functional_from_roots
from .lattice import (BREAKDOWN, NnrrLattice, cc_residuals, cd_residual, lattice_from_system, normality,
                      oracle_a, oracle_b, type1_normalization, type1_residual, type1_solve,
                      type2_coeffs, type2_oracle)
from .numerics import REAL, Poly, SingularMatrixError, scalar_to_json
from .recurrence import Breakdown, JacobiData, galant_one_step, jacobi_from_moments
from .zeros import interlacing_suite, mesh_suite

SUITES = ("residuals", "oracle", "transforms", "interlacing", "mesh")

FLOAT_CC_TOL = 1e-10
FLOAT_ORACLE_TOL = 1e-8
FLOAT_TRANSFORM_TOL = 1e-9
FLOAT_TYPE1_TOL = 1e-9
FLOAT_KERNEL_TOL = 1e-8


def criterion_families() -> list:
    """The five reference systems used across the residual and transform checks."""
    return [
        FamilySpec("charlier", a=[1, 2]),
        FamilySpec("meixner1", c=["1/3", "1/2"], beta=2),
        FamilySpec("krawtchouk", N=10, p=["1/4", "2/3"]),
        FamilySpec("hahn", alpha=[0, "1/2"], beta=1, N=8),
        FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0),
    ]


def reference_system(spec: FamilySpec) -> MopSystem:
    # the Jacobi-Pineiro reference runs on the float backend
    return spec.system(REAL) if spec.name == "jacobi_pineiro" else spec.system()


def interlacing_families() -> list:
    """One sampled parameter set per catalog family."""
    return [
        FamilySpec("laguerre1", alpha=[0, "1/2"]),
        FamilySpec("laguerre2", c=[1, 2], alpha=0),
        FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0),
        FamilySpec("angelesco_jacobi", alpha=0, beta=0, gamma=0, a=-1),
        FamilySpec("jacobi_laguerre", beta=0, gamma=0, a=-1),
        FamilySpec("jacobi_hermite", gamma=0),
        FamilySpec("charlier", a=[1, 2]),
        FamilySpec("meixner1", c=["1/3", "1/2"], beta=2),
        FamilySpec("meixner2", beta=[1, "3/2"], c="1/2"),
        FamilySpec("krawtchouk", N=10, p=["1/4", "2/3"]),
        FamilySpec("hahn", alpha=[0, "1/2"], beta=1, N=8),
    ]


MESH_FAMILIES = [  # (spec, strict bound)
    (FamilySpec("charlier", a=[1, 2]), True),
    (FamilySpec("krawtchouk", N=10, p=["1/4", "2/3"]), True),
    (FamilySpec("hahn", alpha=[0, "1/2"], beta=1, N=8), True),
    (FamilySpec("meixner1", c=["1/3", "1/2"], beta=2), False),
    (FamilySpec("meixner2", beta=[1, "3/2"], c="1/2"), False),
]

TRANSFORM_PHIS = [([5], None), ([5, 7], None), ([5], [2])]


def _num(v):
    """JSON rendering of a residual: exact values as "p/q" plus a float."""
    if v is None:
        return None
    if isinstance(v, (int, Fraction)):
        return {"exact": scalar_to_json(Fraction(v)), "float": float(v)}
    return float(abs(v))


def _check(name, ok, value=None, tol=None, **extra) -> dict:
    out = {"name": name, "ok": bool(ok), "value": _num(value), "tol": tol}
    out.update(extra)
    return out


def _report(suite, checks) -> dict:
    return {"suite": suite, "ok": all(c["ok"] for c in checks), "checks": checks}


def _passes(value, exact, tol) -> bool:
    return value == 0 if exact else abs(value) < tol


def _indices(r, top, bottom=0):
    def rec(r, level):
        if r == 1:
            yield (level,)
            return
        for first in range(level + 1):
            for rest in rec(r - 1, level - first):
                yield (first,) + rest
    for level in range(bottom, top + 1):
        yield from rec(r, level)


def _admissible(sys, n):
    return all(N is None or k <= N for k, N in zip(n, sys.Nvec))


def _is_normal(sys, n) -> bool:
    try:
        return normality(sys, n)
    except SingularMatrixError:
        return False


# ---------------------------------------------------------------------------
# residuals


def cc_check(spec: FamilySpec, dmax: int = 12, workers: int | None = None) -> dict:
    """Compatibility-condition residuals of the filled lattice.

    Exact lattices must give exactly 0; float lattices stay below 1e-10.
    Indices marked as breakdown must be non-normal by the moment test.
    """
    sys = reference_system(spec)
    lat = lattice_from_system(sys, dmax, strict=False, workers=workers)
    rep = cc_residuals(lat)
    exact = sys.field.exact
    worst = max((rep[key]["max"] for key in ("CC1", "CC2", "CC3", "alt_k")), key=abs)
    marked = sorted(n for n, s in lat.status.items() if s == BREAKDOWN)
    bad_marks = [list(n) for n in marked if _admissible(sys, n) and _is_normal(sys, n)]
    counts = {k: rep[k]["count"] for k in ("CC1", "CC2", "CC3", "alt_k")}
    ok = _passes(worst, exact, FLOAT_CC_TOL) and not bad_marks
    return _check(f"cc_residuals[{spec.label()}]", ok, worst, 0 if exact else FLOAT_CC_TOL,
                  counts=counts, breakdown=[list(n) for n in marked], normal_but_marked=bad_marks)


def type1_check(spec: FamilySpec, dmax: int = 6) -> dict:
    """Type I normalization and nearest-neighbour residuals at |n| <= dmax."""
    sys = reference_system(spec)
    lat = lattice_from_system(sys, dmax + 1, strict=False)
    exact = sys.field.exact
    worst_norm = 0 if exact else 0.0
    worst_res = 0 if exact else 0.0
    skipped = []
    for n in _indices(sys.r, dmax, 1):
        if not _admissible(sys, n):
            continue
        try:
            A = type1_solve(sys, n)
            dev = type1_normalization(sys, A, n) - 1
            worst_norm = max(worst_norm, abs(dev))
            for j in range(sys.r):
                if n[j] == 0:
                    continue
                res = type1_residual(sys, lat, n, j)
                worst_res = max(worst_res, res / (1 if exact else max(1.0, A.max_norm())))
        except (SingularMatrixError, Breakdown, TypeError):
            if _is_normal(sys, n) and all(
                    _is_normal(sys, tuple(x + (i == j) for i, x in enumerate(n))) for j in range(sys.r)):
                return _check(f"type1[{spec.label()}]", False, None, None,
                              reason=f"normal index {list(n)} failed")
            skipped.append(list(n))
    ok = (worst_norm == 0 if exact else worst_norm < FLOAT_TYPE1_TOL) and \
        _passes(worst_res, exact, FLOAT_TYPE1_TOL)
    return _check(f"type1[{spec.label()}]", ok, max(worst_norm, worst_res),
                  0 if exact else FLOAT_TYPE1_TOL, normalization=_num(worst_norm),
                  recurrence=_num(worst_res), skipped_non_normal=skipped)


def kernel_check(spec: FamilySpec, dmax: int = 6, z0s: Sequence = (-1, 5)) -> dict:
    """Christoffel-Darboux formula and the two kernel identities.

    Float systems are judged by the residual relative to the largest
    kernel coefficient.
    """
    sys = reference_system(spec)
    lat = lattice_from_system(sys, dmax + 1)
    exact = sys.field.exact
    worst = {"cd": 0, "christoffel": 0, "type2": 0}
    for n in _indices(sys.r, dmax, 1):
        cd = cd_residual(lat, sys, n)
        if not exact:
            Pn, An = type2_coeffs(lat, n), type1_solve(sys, n)
            cd = cd / max(1.0, Pn.scale() * An.max_norm())
        worst["cd"] = max(worst["cd"], abs(cd))
        for z0 in z0s:
            rep = kernel_identities(sys, lat, n, z0)
            for key in ("christoffel", "type2"):
                v = abs(rep[key]) if exact else rep[key + "_rel"]
                worst[key] = max(worst[key], v)
    top = max(worst.values())
    ok = _passes(top, exact, FLOAT_KERNEL_TOL)
    return _check(f"kernel[{spec.label()}]", ok, top, 0 if exact else FLOAT_KERNEL_TOL,
                  parts={k: _num(v) for k, v in worst.items()})


def suite_residuals(specs: Sequence[FamilySpec] | None = None, dmax: int = 12,
                    workers: int | None = None) -> dict:
    specs = list(specs or criterion_families())
    checks = [cc_check(s, dmax, workers) for s in specs]
    checks += [type1_check(s, min(dmax, 6)) for s in specs]
    for s in specs:
        if s.name in ("charlier", "jacobi_pineiro"):
            checks.append(kernel_check(s, min(dmax, 6)))
    return _report("residuals", checks)


# ---------------------------------------------------------------------------
# oracle


def oracle_check(sys: MopSystem, label: str, dmax: int, tol: float | None = None) -> dict:
    """Lattice type II polynomials and coefficients against moment solves.

    Indices where the lattice broke down must be non-normal; normal
    indices must match exactly (or within ``tol`` relative for floats).
    """
    exact = sys.field.exact
    lat = lattice_from_system(sys, dmax + 1, strict=False)
    worst = 0 if exact else 0.0
    coef = 0 if exact else 0.0
    skipped, bad = [], []
    for n in _indices(sys.r, dmax):
        if not _admissible(sys, n):
            continue
        try:
            O = type2_oracle(sys, n)
        except SingularMatrixError:
            skipped.append(list(n))
            continue
        try:
            P = type2_coeffs(lat, n)
        except Breakdown:
            bad.append(list(n))
            continue
        d = P.max_diff(O)
        worst = max(worst, d if exact else d / max(1.0, O.scale()))
        if sum(n) == 0:
            continue
        for i in range(sys.r):
            if n[i] == 0:
                continue
            a = lat.a(n, i)
            try:
                ao = oracle_a(sys, n, i)
            except SingularMatrixError:
                continue
            if a is not None:
                coef = max(coef, abs(a - ao) if exact else abs(a - ao) / max(1.0, abs(ao)))
    ok = _passes(max(worst, coef), exact, tol or FLOAT_ORACLE_TOL) and not bad
    return _check(f"oracle[{label}]", ok, max(worst, coef), 0 if exact else (tol or FLOAT_ORACLE_TOL),
                  polys=_num(worst), a_coeffs=_num(coef), non_normal=skipped,
                  normal_but_unreachable=bad)


def b_oracle_check(sys: MopSystem, label: str, dmax: int) -> dict:
    """b coefficients against the full projection formula."""
    exact = sys.field.exact
    lat = lattice_from_system(sys, dmax + 1, strict=False)
    worst = 0 if exact else 0.0
    for n in _indices(sys.r, dmax):
        if not _admissible(sys, n):
            continue
        for j in range(sys.r):
            b = lat.b(n, j)
            if b is None:
                continue
            try:
                bo = oracle_b(sys, n, j)
            except (SingularMatrixError, ZeroDivisionError):
                continue
            worst = max(worst, abs(b - bo) if exact else abs(b - bo) / max(1.0, abs(bo)))
    return _check(f"b_oracle[{label}]", _passes(worst, exact, FLOAT_ORACLE_TOL), worst,
                  0 if exact else FLOAT_ORACLE_TOL)


def suite_oracle(specs: Sequence[FamilySpec] | None = None, dmax: int = 8) -> dict:
    specs = list(specs or criterion_families())
    checks = []
    for s in specs:
        sys = reference_system(s)
        checks.append(oracle_check(sys, s.label(), dmax))
        checks.append(b_oracle_check(sys, s.label(), min(dmax, 5)))
    aj = FamilySpec("angelesco_jacobi", alpha=0, beta=0, gamma=0, a=-1)
    checks.append(oracle_check(aj.system(REAL), aj.label() + ";float", min(dmax, 6)))
    return _report("oracle", checks)


# ---------------------------------------------------------------------------
# transforms


def galant_laguerre_check(alpha, nmax: int = 50) -> dict:
    """One-step shift of the Laguerre recurrence at z0 = 0.

    Input is the closed-form Laguerre data; the expected output is the
    closed form with alpha + 1.
    """
    al = float(Fraction(alpha))
    L = nmax + 1
    b = [2 * n + al + 1 for n in range(L + 1)]
    a = [0.0] + [n * (n + al) for n in range(1, L + 1)]
    hat = galant_one_step(JacobiData(b, a), 0.0, L)
    worst = 0.0
    for n in range(nmax + 1):
        eb = 2 * n + al + 2
        worst = max(worst, abs(hat.b[n] - eb) / eb)
        if n >= 1:
            ea = n * (n + al + 1)
            worst = max(worst, abs(hat.a[n] - ea) / ea)
    return _check(f"galant_laguerre[alpha={alpha}]", worst < 1e-12, worst, 1e-12)


def certify_missing(nu: MopSystem, t: TransformSpec, k, missing) -> str | None:
    """Why an index is missing from some method, or None if unexplained.

    The CC route and the determinantal formula need ``k`` normal for the
    transformed system (and the CC route every index below it); the
    iterated one-step route needs every intermediate system normal up to k.
    """
    hat = nu.modified(t.phi)
    below = [m for m in _indices(nu.r, sum(k)) if all(a <= b for a, b in zip(m, k))]
    reasons = []
    if "nnrr" in missing or "det" in missing:
        bad = [m for m in below if _admissible(hat, m) and not _is_normal(hat, m)]
        if not bad:
            return None
        reasons.append(f"transformed system non-normal at {list(bad[0])}")
    if "iterated" in missing:
        roots = t.root_list
        found = None
        for s in range(1, len(roots) + 1):
            stage = nu.modified(Poly.from_roots(roots[:s], t.field.join(nu.field)))
            bad = [m for m in below if _admissible(stage, m) and not _is_normal(stage, m)]
            if bad:
                found = f"stage {s} non-normal at {list(bad[0])}"
                break
        if found is None:
            return None
        reasons.append(found)
    return "; ".join(reasons)


def transform_agreement(nu: MopSystem, t: TransformSpec, K: int = 6, label: str = "") -> dict:
    """Compare the CC route, the determinantal formula and iterated one-steps.

    At every |k| <= K the defined methods must agree with each other and
    with the moment oracle, and Phi P^_k must equal the augmented
    P_{(k,m)}.  Missing entries are accepted only with a non-normality
    certificate from the moment test.
    """
    exact = nu.field.exact
    lat = lattice_from_system(nu, K + t.m + 1, strict=False)
    sl = transform_nnrr(nu, t, dmax=K, strict=False)
    aug = sl.meta["augmented"]
    base = {k: type2_coeffs(lat, k) for k in lat.cells
            if sum(k) <= K + t.m and lat.status[k] != BREAKDOWN}
    it = transform_type2_iterated(base, t.root_list, K)
    hat = nu.modified(t.phi)
    worst = 0 if exact else 0.0
    excluded, uncertified = [], []
    for k in _indices(nu.r, K):
        got = {}
        try:
            got["nnrr"] = type2_coeffs(sl, k)
        except Breakdown:
            got["nnrr"] = None
        try:
            got["det"] = transform_type2_det(lat, k, t)
        except (DegenerateD, Breakdown, SingularMatrixError):
            got["det"] = None
        got["iterated"] = it.get(k)
        missing = sorted(m for m, p in got.items() if p is None)
        try:
            O = type2_oracle(hat, k)
        except SingularMatrixError:
            O = None
        if missing:
            why = certify_missing(nu, t, k, missing)
            if why is None:
                uncertified.append({"index": list(k), "missing": missing})
                continue
            excluded.append({"index": list(k), "missing": missing, "reason": why})
        defined = [p for p in got.values() if p is not None]
        if not defined:
            continue
        if O is None:
            uncertified.append({"index": list(k), "missing": ["oracle"]})
            continue
        scale = 1 if exact else max(1.0, O.scale())
        for p in defined:
            worst = max(worst, p.max_diff(O) / scale)
        if got["nnrr"] is not None:
            PA = type2_coeffs(aug, k + (t.m,))
            prod = t.phi.to_field(aug.field) * got["nnrr"].to_field(aug.field)
            worst = max(worst, prod.max_diff(PA) / (1 if exact else max(1.0, PA.scale())))
    ok = _passes(worst, exact, FLOAT_TRANSFORM_TOL) and not uncertified
    return _check(f"transform_agreement[{label};phi={_phi_label(t)}]", ok, worst,
                  0 if exact else FLOAT_TRANSFORM_TOL, excluded=excluded, uncertified=uncertified,
                  retry_weights=sl.meta["weights"])


def _phi_label(t: TransformSpec) -> str:
    parts = []
    for z, m in t.groups:
        parts.append(f"(x-{scalar_to_json(z)})" + (f"^{m}" if m > 1 else ""))
    return "".join(parts)


def boundary_zero_check(nu: MopSystem, t: TransformSpec, K: int, label: str) -> dict:
    """a_{n,j} = 0 exactly wherever n_j = 0 or n_j = N_j on the augmented lattice.

    The appended axis has N = m, so this covers a_{(k,m),r} = 0.
    """
    sl = transform_nnrr(nu, t, dmax=K, strict=False)
    lat: NnrrLattice = sl.meta["augmented"]
    bad, count = [], 0
    for n in lat.cells:
        for j in range(lat.r):
            N = lat.Nvec[j]
            if not (n[j] == 0 or (N is not None and n[j] == N)):
                continue
            v = lat.a(n, j)
            if v is None:
                continue
            count += 1
            if v != 0:
                bad.append({"index": list(n), "j": j, "value": _num(v)})
    worst = max((abs(lat.a(tuple(b_["index"]), b_["j"])) for b_ in bad), default=0)
    return _check(f"boundary_zeros[{label};phi={_phi_label(t)}]", not bad, worst, 0,
                  checked=count, nonzero=bad[:10])


def conjugate_pair_check(stated_a1=None) -> list:
    """Recurrence data of the two-point functional at +-i with weights 1/4, 3/4.

    b0 and b1 are compared with -i/2 and i/2.  a1 is compared with
    ``stated_a1`` when given, otherwise with b0*b1 - 1, the value forced by
    x P_1 = P_2 + b1 P_1 + a1 P_0 when P_2 = x^2 + 1.
    """
    f = finite_functional_from_roots([1j, -1j], [0.25, 0.75])
    jd = jacobi_from_moments(f, 2)
    b0, b1, a1 = jd.b[0], jd.b[1], jd.a[1]
    want_b0, want_b1 = -0.5j, 0.5j
    want_a1 = want_b0 * want_b1 - 1 if stated_a1 is None else stated_a1
    return [
        _check("conjugate_pair.b0", b0 == want_b0, abs(b0 - want_b0), 0),
        _check("conjugate_pair.b1", b1 == want_b1, abs(b1 - want_b1), 0),
        _check("conjugate_pair.a1", a1 == want_a1, abs(a1 - want_a1), 0,
               computed=[float(a1.real), float(a1.imag)],
               expected=[float(complex(want_a1).real), float(complex(want_a1).imag)]),
    ]


def conjugate_laguerre_check(dmax: int = 8) -> dict:
    """Laguerre alpha = 0 transformed by x^2 + 1 against the float moment oracle."""
    lag = FamilySpec("laguerre1", alpha=[0]).system(REAL)
    t = TransformSpec.from_roots(["1j", "-1j"], weights=[0.25, 0.75], dmax=dmax)
    sl = transform_nnrr(lag, t)
    orc = lattice_from_system(lag.modified(t.phi), dmax)
    worst = 0.0
    for n in range(dmax):
        va, wa = sl.a((n,), 0), orc.a((n,), 0)
        vb, wb = sl.b((n,), 0), orc.b((n,), 0)
        worst = max(worst, abs(va - wa) / max(1.0, abs(wa)), abs(vb - wb) / max(1.0, abs(wb)))
    return _check("conjugate_pair.laguerre_x2+1", worst < 1e-8, worst, 1e-8,
                  weights=sl.meta["weights"])


def _shift_certificate(nu: MopSystem, t: TransformSpec, k) -> str | None:
    """The type I determinant needs nu normal at every shifted index k + s_i."""
    for s in step_shifts(nu.r, nu.r * t.m, k, nu.Nvec, cap=t.m):
        idx = tuple(a + b for a, b in zip(k, s))
        if not _is_normal(nu, idx):
            return f"original system non-normal at shifted index {list(idx)}"
    return None


def type1_transform_check(spec: FamilySpec, K: int = 6) -> dict:
    """Determinantal and one-step type I formulas against type I solves."""
    nu = reference_system(spec)
    exact = nu.field.exact
    worst = 0 if exact else 0.0
    skipped = []
    for roots, mults in TRANSFORM_PHIS:
        t = TransformSpec.from_roots(roots, mults)
        hat = nu.modified(t.phi)
        for k in _indices(nu.r, K, 1):
            if not _admissible(nu, k):
                continue
            try:
                ref = type1_solve(hat, k)
            except SingularMatrixError:
                skipped.append(list(k))
                continue
            scale = 1 if exact else max(1.0, ref.max_norm())
            try:
                worst = max(worst, ref.max_diff(transform_type1_det(nu, k, t)) / scale)
                if t.m == 1:
                    worst = max(worst, ref.max_diff(transform_type1_onestep(nu, k, roots[0])) / scale)
            except (SingularMatrixError, DegenerateD, RootHit, Breakdown) as exc:
                if certify_missing(nu, t, k, ["det"]) is None and _shift_certificate(nu, t, k) is None:
                    return _check(f"type1_transforms[{spec.label()}]", False, None, None,
                                  reason=f"{type(exc).__name__} at normal index {list(k)}")
                skipped.append(list(k))
    return _check(f"type1_transforms[{spec.label()}]", _passes(worst, exact, FLOAT_TYPE1_TOL),
                  worst, 0 if exact else FLOAT_TYPE1_TOL, skipped=sorted(skipped))


def repeated_check(nmax: int = 15, stages: int = 3) -> dict:
    lag = FamilySpec("laguerre1", alpha=[0]).system()
    slabs = repeated_transform(lag, [TransformSpec.from_roots([0])] * stages, nmax)
    worst = 0
    for s, L in enumerate(slabs, start=1):
        for n in range(nmax + 1):
            worst = max(worst, abs(L.b((n,), 0) - (2 * n + s + 1)))
            if n >= 1:
                worst = max(worst, abs(L.a((n,), 0) - n * (n + s)))
    return _check("repeated_laguerre[x,x,x]", worst < 1e-10, worst, 1e-10)


def suite_transforms(specs: Sequence[FamilySpec] | None = None, K: int = 6) -> dict:
    specs = list(specs or criterion_families())
    checks = [galant_laguerre_check(a) for a in (0, "1/2", 3)]
    for s in specs:
        nu = reference_system(s)
        for roots, mults in TRANSFORM_PHIS:
            t = TransformSpec.from_roots(roots, mults)
            checks.append(transform_agreement(nu, t, K, s.label()))
            checks.append(boundary_zero_check(nu, t, K, s.label()))
        checks.append(type1_transform_check(s, K))
    checks += conjugate_pair_check()
    checks.append(conjugate_laguerre_check())
    checks.append(repeated_check())
    return _report("transforms", checks)


# ---------------------------------------------------------------------------
# zeros


def suite_interlacing(specs: Sequence[FamilySpec] | None = None, dmax: int = 6) -> dict:
    checks = []
    for s in list(specs or interlacing_families()):
        rep = interlacing_suite(s, dmax)
        checks.append(_check(f"interlacing[{s.label()}]", rep["ok"], rep["min_margin"], 1e-9,
                             relations=rep["relations"], rows=len(rep["rows"]),
                             failures=rep["failures"][:20]))
    return _report("interlacing", checks)


def suite_mesh(specs: Sequence | None = None, dmax: int = 8) -> dict:
    checks = []
    for s, strict in list(specs or MESH_FAMILIES):
        rep = mesh_suite(s, dmax, strict=strict)
        bad = [r for r in rep["rows"] if not r["ok"]]
        checks.append(_check(f"mesh[{s.label()}]", rep["ok"], rep["min_mesh"], 1e-9,
                             bound=">1" if strict else ">=1", failures=bad[:20]))
    return _report("mesh", checks)


def run_suite(name: str, specs=None, dmax: int | None = None, workers: int | None = None) -> list:
    """Run one suite (or ``"all"``) and return the list of reports."""
    names = SUITES if name == "all" else (name,)
    out = []
    for nm in names:
        if nm == "residuals":
            out.append(suite_residuals(specs, dmax or 12, workers))
        elif nm == "oracle":
            out.append(suite_oracle(specs, dmax or 8))
        elif nm == "transforms":
            out.append(suite_transforms(specs, dmax or 6))
        elif nm == "interlacing":
            out.append(suite_interlacing(specs, dmax or 6))
        elif nm == "mesh":
            mesh_specs = None if specs is None else [(s, s.name not in ("meixner1", "meixner2"))
                                                     for s in specs]
            out.append(suite_mesh(mesh_specs, dmax or 8))
        else:
            raise ValueError(f"unknown suite {nm!r}")
    return out
