"""Time the hot paths under both backends.

    python benchmarks/bench_kernels.py [--repeat 5]

Each backend runs in its own interpreter because the choice is made at
import time from IWALG_DISABLE_NUMBA.  The first call per backend is timed
separately so JIT compilation does not pollute the steady-state numbers.
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
from iwalg import SeriesRing, backend_name, weierstrass_prepare
from iwalg.harness import monsky_counts

repeat = int(sys.argv[1])
cases = {}

def timed(name, fn):
    t = time.perf_counter()
    fn()
    first = time.perf_counter() - t
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    cases[name] = {"first": first, "best": best}

R2 = SeriesRing(3, 16, 2, 24)
t0, t1 = R2.gen(0), R2.gen(1)
f = t1 * t1 + t0 * t1 * 27 + (t0 + 3) * 27
g = (R2.one() + t0) * (R2.one() + t1 * 3) + t0 * t1

R1 = SeriesRing(5, 16, 1, 40, 2)
h = (R1.gen(0) - 5) * (R1.one() + R1.gen(0)) ** 7

timed("mul d=2 D=24", lambda: f * g)
timed("pow level=2 D=40", lambda: h ** 3)
timed("prepare d=2", lambda: weierstrass_prepare(f * g, var=1))
timed("monsky p=3 level<=4", lambda: monsky_counts(SeriesRing(3, 16, 1, 24).gen(0) - 3, 4, 1))
print(json.dumps({"backend": backend_name(), "cases": cases}))
"""


def run(disabled, repeat):
    env = dict(os.environ)
    env.pop("IWALG_DISABLE_NUMBA", None)
    if disabled:
        env["IWALG_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    fast, slow = run(False, args.repeat), run(True, args.repeat)
    print(f"{'case':24} {fast['backend'] + ' first':>14} {fast['backend'] + ' best':>13} {'numpy best':>11} {'speedup':>8}")
    for name, a in fast["cases"].items():
        b = slow["cases"][name]
        print(f"{name:24} {a['first']:14.4f} {a['best']:13.4f} {b['best']:11.4f} {b['best'] / a['best']:8.2f}x")


if __name__ == "__main__":
    main()
