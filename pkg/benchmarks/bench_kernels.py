"""Compare the compiled and pure-Python kernels.

Run with ``python3 benchmarks/bench_kernels.py``.  Each backend is timed in
a fresh interpreter because the kernel module is chosen at import time.
"""
import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, sys, time
from mopchr import FamilySpec, REAL, lattice_from_system, jacobi_from_moments, galant_one_step
from mopchr.kernels import HAVE_COMPILED

dmax, L, reps = (int(v) for v in sys.argv[1:4])
sys_ = FamilySpec("jacobi_pineiro", alpha=[0, "1/2"], beta=0).system(REAL)

def best(fn):
    out = []
    for _ in range(reps):
        t0 = time.perf_counter(); fn(); out.append(time.perf_counter() - t0)
    return min(out)

lattice_from_system(sys_, 4)  # warm caches
j = jacobi_from_moments(sys_.functionals[0], L, REAL)
print(json.dumps({
    "compiled": HAVE_COMPILED,
    "cc_fill": best(lambda: lattice_from_system(sys_, dmax)),
    "galant": best(lambda: galant_one_step(j, -0.5, L - 1)),
}))
"""


def run(pure: bool, dmax: int, L: int, reps: int) -> dict:
    env = dict(os.environ)
    if pure:
        env["MOPCHR_PURE"] = "1"
    else:
        env.pop("MOPCHR_PURE", None)
    out = subprocess.run([sys.executable, "-c", _WORKER, str(dmax), str(L), str(reps)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dmax", type=int, default=24)
    ap.add_argument("--L", type=int, default=40)
    ap.add_argument("--reps", type=int, default=3)
    args = ap.parse_args()
    fast = run(False, args.dmax, args.L, args.reps)
    slow = run(True, args.dmax, args.L, args.reps)
    if not fast["compiled"]:
        print("compiled kernels unavailable; both rows use the pure backend")
    print(f"{'kernel':<10}{'compiled [s]':>14}{'pure [s]':>12}{'speedup':>10}")
    for key in ("cc_fill", "galant"):
        print(f"{key:<10}{fast[key]:>14.4f}{slow[key]:>12.4f}{slow[key] / fast[key]:>10.2f}")


if __name__ == "__main__":
    main()
