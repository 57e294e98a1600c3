"""Compiled kernels against the numpy fallback.

Part one times each kernel directly on the shapes the solvers produce.
Part two runs the two end-to-end workloads (scalar Picard solve, heat demo)
in subprocesses, once per backend, selected through EPCA_PURE_PYTHON.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from epca import kernels

END_TO_END = r"""
import json, time
from epca import kernels
from epca.evolution import scalar_process, sine_state, standard_drive
from epca.heat import HeatInstance, run_heat_demo
from epca.solver import SolverConfig, picard_solve

out = {"backend": kernels.BACKEND}
t0 = time.perf_counter()
picard_solve(scalar_process(3.0, omega=2), sine_state(1.0, standard_drive), [1.0],
             SolverConfig(h=1 / 64, horizon=64))
out["scalar picard (h=1/64, T=64)"] = time.perf_counter() - t0
t0 = time.perf_counter()
run_heat_demo(HeatInstance(beta=1.0), SolverConfig(h=1 / 64, horizon=100))
out["heat demo (N=16, h=1/64, T=100)"] = time.perf_counter() - t0
print(json.dumps(out))
"""


def best(stmt, repeat):
    return min(timeit.repeat(stmt, number=1, repeat=repeat))


def kernel_table(repeat):
    if kernels.compiled_backend is None:
        sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(0)
    cases = []
    for n, d in ((6400, 1), (6400, 16), (25600, 16)):
        F = np.ascontiguousarray(rng.uniform(0.5, 1.0, (n, d)))
        inc = np.ascontiguousarray(rng.normal(size=(n, d)))
        y0 = np.ones(d)
        cases.append((f"linear_scan n={n} d={d}",
                      lambda b, F=F, inc=inc, y0=y0: b.linear_scan(F, inc, y0)))
    sub = rng.random(6400)
    cases.append(("window_sums n=6400 m=64", lambda b: b.window_sums(sub, 64)))
    vals = rng.random(12800)
    cases.append(("suffix_max n=12800", lambda b: b.suffix_max(vals)))

    rows = []
    for name, fn in cases:
        a = fn(kernels.compiled_backend)
        b = fn(kernels.python_backend)
        assert np.allclose(a, b, rtol=1e-12, atol=1e-12), name
        tc = best(lambda: fn(kernels.compiled_backend), repeat)
        tp = best(lambda: fn(kernels.python_backend), repeat)
        rows.append((name, tc, tp))
    return rows


def end_to_end():
    results = {}
    for label, flag in (("compiled", "0"), ("python", "1")):
        env = dict(os.environ, EPCA_PURE_PYTHON=flag)
        proc = subprocess.run([sys.executable, "-c", END_TO_END], env=env,
                              capture_output=True, text=True, check=True)
        data = json.loads(proc.stdout)
        if data.pop("backend") != label:
            sys.exit(f"subprocess did not select the {label} backend")
        results[label] = data
    return [(k, results["compiled"][k], results["python"][k]) for k in results["compiled"]]


def show(title, rows):
    print(f"\n{title}")
    print(f"{'case':40s} {'compiled':>12s} {'python':>12s} {'speed-up':>9s}")
    for name, tc, tp in rows:
        print(f"{name:40s} {tc * 1e3:10.3f}ms {tp * 1e3:10.3f}ms {tp / tc:8.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=7)
    args = ap.parse_args()
    show("kernels (best of %d)" % args.repeat, kernel_table(args.repeat))
    show("end to end (single run, fresh interpreter)", end_to_end())


if __name__ == "__main__":
    main()
