"""Command-line interface.

Subcommands: ``jacobi``, ``nnrr``, ``transform``, ``polys``, ``interlace``
and ``verify``.  Exit status is 0 when every check passes, 1 on a failed
check and 2 on bad input.  JSON output has a fixed key order and no
timestamps, so repeated runs produce identical bytes.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Sequence

from . import __version__
from .christoffel import (DegenerateD, TransformSpec, transform_nnrr, transform_type2_det,
                          transform_type2_iterated)
from .functionals import (DomainError, FamilySpec, MopSystem, parse_family_shorthand, parse_key_values,
                          system_from_json)
from .lattice import BREAKDOWN, lattice_from_system, type1_solve, type2_coeffs, type2_oracle
from .numerics import Poly, SingularMatrixError, eps_rel, scalar_to_json
from .recurrence import Breakdown, QuasiDefiniteViolation, jacobi_from_moments
from .suites import SUITES, certify_missing, run_suite
from .zeros import NonConverged, interlacing_suite, mesh, roots, write_csv

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

# families whose Christoffel transform by x^m is the same family with alpha + m
_ALPHA_SHIFT = {"laguerre1": True, "laguerre2": False, "jacobi_pineiro": True}


class InputError(Exception):
    """Bad command-line input; maps to exit status 2."""


# ---------------------------------------------------------------------------
# parsing helpers


def load_system(text: str, backend: str | None = None):
    """Return (system, FamilySpec or None) from shorthand or a JSON file."""
    if text.endswith(".json") or os.path.isfile(text):
        try:
            with open(text) as fh:
                obj = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read system file {text!r}: {exc}") from None
        if backend:
            obj = dict(obj, backend=backend)
        return system_from_json(obj), None
    spec = parse_family_shorthand(text)
    return spec.system(backend), spec


def parse_phi(text: str, dmax: int) -> TransformSpec:
    """``roots=5,7`` with optional ``mults=...`` and ``weights=...``."""
    kv = parse_key_values(text)
    unknown = set(kv) - {"roots", "mults", "weights"}
    if unknown or "roots" not in kv:
        raise InputError(f"phi must be roots=...[;mults=...][;weights=...], got {text!r}")
    rts = kv["roots"]
    mults = [int(m) for m in kv["mults"]] if "mults" in kv else None
    weights = None
    if "weights" in kv:
        weights = [complex(w) if "j" in w else Fraction(w) for w in kv["weights"]]
    return TransformSpec.from_roots(rts, mults, weights, dmax)


def parse_index(text: str) -> tuple:
    try:
        idx = tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise InputError(f"bad multi-index {text!r}") from None
    if not idx or any(i < 0 for i in idx):
        raise InputError(f"bad multi-index {text!r}")
    return idx


# ---------------------------------------------------------------------------
# JSON rendering


def _exact(v):
    """Integers stay integers, other rationals become "p/q"."""
    if isinstance(v, int) or (isinstance(v, Fraction) and v.denominator == 1):
        return int(v)
    return scalar_to_json(v)


def _float(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    return float(v)


def coeffs_json(P: Poly, exact: bool) -> dict:
    if exact:
        return {"exact": [_exact(c) for c in P.coeffs], "float": [float(c) for c in P.coeffs]}
    return {"float": [_float(c) for c in P.coeffs]}


def _key(k) -> str:
    return ",".join(str(i) for i in k)


def dump(obj, path: str | None, stream=None) -> None:
    text = json.dumps(obj, indent=2, allow_nan=True) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_jacobi(args) -> int:
    system, _ = load_system(args.system, args.backend)
    comps = range(system.r) if args.component is None else [args.component]
    out = []
    for j in comps:
        jd = jacobi_from_moments(system.functionals[j], args.L, field=system.field)
        entry = {"component": j, "support_size": jd.support_size,
                 "b": [scalar_to_json(v) for v in jd.b], "a": [scalar_to_json(v) for v in jd.a]}
        if system.field.exact:
            entry["b_float"] = [float(v) for v in jd.b]
            entry["a_float"] = [float(v) for v in jd.a]
        out.append(entry)
    dump({"command": "jacobi", "system": system.describe(), "L": args.L, "components": out},
         args.output)
    return EXIT_OK


def cmd_nnrr(args) -> int:
    system, _ = load_system(args.system, args.backend)
    lat = lattice_from_system(system, args.dmax, strict=args.strict, workers=args.workers)
    events = [{"kind": e[0], "n": list(e[1]), "j": e[2], "k": e[3]} for e in lat.events]
    dump({"command": "nnrr", "system": system.describe(), "dmax": args.dmax,
          "Nvec": list(lat.Nvec), "cells": lat.to_json(), "events": events}, args.output)
    return EXIT_OK


def _tables(system: MopSystem, t: TransformSpec, dmax: int, methods: Sequence[str]) -> dict:
    lat = lattice_from_system(system, dmax + t.m + 1, strict=False)
    tables: dict = {}
    if "nnrr" in methods:
        sl = transform_nnrr(system, t, dmax=dmax, strict=False)
        tab = {}
        for k in sl.cells:
            try:
                tab[k] = type2_coeffs(sl, k)
            except Breakdown:
                tab[k] = None
        tables["nnrr"] = (tab, sl)
    if "det" in methods:
        tab = {}
        for k in lat.cells:
            if sum(k) > dmax:
                continue
            try:
                tab[k] = transform_type2_det(lat, k, t)
            except (DegenerateD, Breakdown, SingularMatrixError):
                tab[k] = None
        tables["det"] = (tab, None)
    if "onestep" in methods:
        base = {k: type2_coeffs(lat, k) for k in lat.cells if lat.status[k] != BREAKDOWN}
        tables["onestep"] = (transform_type2_iterated(base, t.root_list, dmax), None)
    return tables


def _closed_form(spec: FamilySpec | None, t: TransformSpec, dmax: int):
    """Same-family comparison for Phi = x^m on Laguerre / Jacobi-Pineiro."""
    if spec is None or spec.name not in _ALPHA_SHIFT or any(z != 0 for z in t.roots):
        return None
    m = t.m
    p = spec.params
    alpha = tuple(a + m for a in p["alpha"]) if _ALPHA_SHIFT[spec.name] else p["alpha"] + m
    shifted = spec.replace(alpha=list(alpha) if isinstance(alpha, tuple) else alpha)
    return shifted, lattice_from_system(shifted.system(), dmax)


def cmd_transform(args) -> int:
    system, spec = load_system(args.system, args.backend)
    t = parse_phi(args.phi, args.dmax)
    methods = ("nnrr", "det", "onestep") if args.method == "all" else (args.method,)
    tables = _tables(system, t, args.dmax, methods)
    exact = system.field.join(t.field).exact
    tol = eps_rel()
    out = {"command": "transform", "system": system.describe(), "phi": t.to_json(),
           "method": args.method, "tables": {}}
    for name, (tab, sl) in tables.items():
        entry = {"polys": {_key(k): (None if P is None else coeffs_json(P, exact))
                           for k, P in sorted(tab.items(), key=lambda kv: (sum(kv[0]), kv[0]))}}
        if sl is not None:
            entry["lattice"] = sl.to_json()
            entry["retry_weights"] = sl.meta["weights"]
        out["tables"][name] = entry
    ok = True
    names = list(tables)
    devs, missing = {}, []
    keys = sorted(set().union(*(set(tables[n][0]) for n in names)), key=lambda k: (sum(k), k))
    for a_i, a in enumerate(names):
        for b in names[a_i + 1:]:
            worst = 0 if exact else 0.0
            for k in keys:
                Pa, Pb = tables[a][0].get(k), tables[b][0].get(k)
                if Pa is None or Pb is None:
                    continue
                d = Pa.max_diff(Pb)
                worst = max(worst, d if exact else d / max(1.0, Pb.scale()))
            devs[f"{a}-{b}"] = {"exact": scalar_to_json(worst), "float": float(worst)} if exact \
                else float(worst)
            ok &= (worst == 0) if exact else worst < tol
    for k in keys:
        gone = sorted(n for n in names if tables[n][0].get(k) is None)
        if gone:
            why = certify_missing(system, t, k, ["iterated" if g == "onestep" else g for g in gone])
            missing.append({"index": list(k), "missing": gone, "certificate": why})
            ok &= why is not None
    out["max_deviation"] = devs
    out["missing"] = missing
    cf = _closed_form(spec, t, args.dmax)
    if cf is not None:
        shifted, lat2 = cf
        worst = 0 if exact else 0.0
        for name, (tab, _) in tables.items():
            for k, P in tab.items():
                if P is None or k not in lat2.pos:
                    continue
                d = P.max_diff(type2_coeffs(lat2, k))
                worst = max(worst, d if exact else d / max(1.0, P.scale()))
        out["closed_form"] = {"family": shifted.label(),
                              "max_deviation": scalar_to_json(worst) if exact else float(worst)}
        ok &= (worst == 0) if exact else worst < tol
    out["ok"] = bool(ok)
    dump(out, args.output)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_polys(args) -> int:
    system, _ = load_system(args.system, args.backend)
    idx = parse_index(args.index)
    if len(idx) != system.r:
        raise InputError(f"index has {len(idx)} entries, the system has {system.r} components")
    exact = system.field.exact
    try:
        if args.type == "II":
            polys = [type2_oracle(system, idx)]
        else:
            polys = list(type1_solve(system, idx).polys)
    except SingularMatrixError:
        raise InputError(f"index {list(idx)} is not normal for this system") from None
    if args.emit == "coeffs":
        data = [[_exact(c) if exact else _float(c) for c in P.coeffs] for P in polys]
    else:
        data = []
        for P in polys:
            if P.degree < 1:
                data.append([])
                continue
            rs = roots(P)
            data.append(rs.to_json()["values"])
    payload = data[0] if args.type == "II" else data
    if args.output:
        dump({"command": "polys", "system": system.describe(), "index": list(idx), "type": args.type,
              "emit": args.emit, "data": payload}, args.output)
    print(json.dumps(payload, separators=(",", ":")))
    return EXIT_OK


def _mesh_map(spec: FamilySpec, dmax: int) -> dict:
    system = spec.system()
    lat = lattice_from_system(system, dmax, strict=False) if system.field.exact else None
    out = {}
    for k in sorted(lat.cells if lat else [], key=lambda k: (sum(k), k)):
        if sum(k) < 2 or lat.status[k] == BREAKDOWN:
            continue
        try:
            rs = roots(type2_coeffs(lat, k))
        except (Breakdown, NonConverged):
            continue
        if rs.real:
            out[(spec.label(), k)] = mesh(rs)
    return out


def cmd_interlace(args) -> int:
    spec = parse_family_shorthand(args.system)
    rep = interlacing_suite(spec, args.dmax, workers=args.workers)
    if args.csv:
        write_csv([rep], args.csv, _mesh_map(spec, args.dmax))
    dump(rep, args.output)
    return EXIT_OK if rep["ok"] else EXIT_FAIL


def cmd_verify(args) -> int:
    specs = None
    if args.system:
        specs = [parse_family_shorthand(args.system)]
    reports = run_suite(args.suite, specs, args.dmax, args.workers)
    ok = all(r["ok"] for r in reports)
    failures = [{"suite": r["suite"], "check": c["name"], "value": c["value"]}
                for r in reports for c in r["checks"] if not c["ok"]]
    doc = {"command": "verify", "suite": args.suite, "ok": ok, "failures": failures,
           "reports": reports}
    if args.output:
        dump(doc, args.output)
    for r in reports:
        for c in r["checks"]:
            print(f"{'PASS' if c['ok'] else 'FAIL'} {r['suite']}: {c['name']} value={json.dumps(c['value'])}")
    if failures:
        print(json.dumps({"failures": failures}, separators=(",", ":")))
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------
# argument parser


def _add_system(p, required=True):
    p.add_argument("--system", "--family", dest="system", required=required,
                   help="family shorthand such as charlier:a=1,2, or a JSON system file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mopchr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"mopchr {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write the JSON result here instead of stdout")
    common.add_argument("--backend", choices=("rational", "float", "complex"),
                        help="scalar backend (default: exact when the moments allow it)")
    common.add_argument("--workers", type=int, default=None, help="threads for lattice fills")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("jacobi", parents=[common], help="marginal Jacobi data")
    _add_system(p)
    p.add_argument("--L", type=int, default=10, help="number of recurrence coefficients")
    p.add_argument("--component", type=int, default=None)
    p.set_defaults(func=cmd_jacobi)

    p = sub.add_parser("nnrr", parents=[common], help="nearest-neighbour recurrence lattice")
    _add_system(p)
    p.add_argument("--dmax", type=int, default=8)
    p.add_argument("--strict", action="store_true", help="stop at the first breakdown")
    p.set_defaults(func=cmd_nnrr)

    p = sub.add_parser("transform", parents=[common], help="Christoffel transform")
    _add_system(p)
    p.add_argument("--phi", required=True, help="roots=z1,z2[;mults=...][;weights=...]")
    p.add_argument("--dmax", type=int, default=8)
    p.add_argument("--method", choices=("nnrr", "det", "onestep", "all"), default="all")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("polys", parents=[common], help="type I or type II polynomials")
    _add_system(p)
    p.add_argument("--index", required=True, help="comma separated multi-index")
    p.add_argument("--type", choices=("I", "II"), default="II")
    p.add_argument("--emit", choices=("coeffs", "zeros"), default="coeffs")
    p.set_defaults(func=cmd_polys)

    p = sub.add_parser("interlace", parents=[common], help="interlacing relations of a family")
    _add_system(p)
    p.add_argument("--dmax", type=int, default=6)
    p.add_argument("--csv", help="write one CSV row per checked relation")
    p.set_defaults(func=cmd_interlace)

    p = sub.add_parser("verify", parents=[common], help="run verification suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    _add_system(p, required=False)
    p.add_argument("--dmax", type=int, default=None)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None) is not None and args.workers < 1:
        parser.error("--workers must be positive")
    for name in ("dmax", "L"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            parser.error(f"--{name} must be non-negative")
    try:
        return args.func(args)
    except (InputError, DomainError, QuasiDefiniteViolation, Breakdown, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
