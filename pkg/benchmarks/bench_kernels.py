"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Times each kernel on representative inputs and one full adaptive run per
backend (the run is executed in a subprocess so the backend is chosen at
import time).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from hp_robust import _pykernels
from hp_robust.polybasis import element_tables

try:
    from hp_robust import _kernels
except ImportError:
    _kernels = None

RUN_SNIPPET = (
    "import time; from hp_robust import example2, adaptive_solve, AdaptiveConfig, BACKEND;"
    "t = time.perf_counter(); adaptive_solve(example2(1e-4), AdaptiveConfig(max_iterations=75));"
    "print(BACKEND, time.perf_counter() - t)"
)


def kernel_cases():
    rng = np.random.default_rng(0)
    x = np.ascontiguousarray(rng.uniform(-1, 1, 30))
    c = rng.standard_normal(19)
    rule, N, dN = element_tables(18, 28)
    d = np.ones(rule.nodes.size)
    return {
        "legendre_table(p=18, 30 pts)": lambda k: k.legendre_table(18, x),
        "legendre_series(19 coeffs, 30 pts)": lambda k: k.legendre_series(c, x),
        "legendre_der(19 coeffs)": lambda k: k.legendre_der(c),
        "element_matrix(p=18, 28 pts)": lambda k: k.element_matrix(N, dN, rule.weights, d, 1e-4, 0.1),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    backends = [("python", _pykernels)] + ([("compiled", _kernels)] if _kernels else [])
    print(f"{'kernel':40s} " + " ".join(f"{name:>14s}" for name, _ in backends) + "   speedup")
    for label, fn in kernel_cases().items():
        times = [timeit.timeit(lambda: fn(mod), number=args.repeat) / args.repeat * 1e6
                 for _, mod in backends]
        speed = f"{times[0] / times[-1]:8.1f}x" if len(times) > 1 else ""
        print(f"{label:40s} " + " ".join(f"{t:11.2f} us" for t in times) + f"  {speed}")
    print()
    for pure in ("1", "0"):
        env = dict(os.environ, HP_ROBUST_PURE=pure)
        out = subprocess.run([sys.executable, "-c", RUN_SNIPPET], env=env, capture_output=True, text=True)
        name, secs = out.stdout.split()
        print(f"example2, eps=1e-4, 75 steps [{name:8s}]: {float(secs):.2f} s")


if __name__ == "__main__":
    main()
