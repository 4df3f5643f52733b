"""Compare the compiled collision backend with the pure-python fallback.

Runs eval_K on identical states with both backends, reports per-call
wall time and the relative gap between the two results.  Usage:

    python3 benchmarks/bench_kernels.py [--n 10] [--grid 10] [--repeat 3]
"""

from __future__ import annotations

import argparse
import importlib
import os
import sys
import time

import numpy as np


def _fresh_radgas(pure: bool):
    os.environ["RADGAS_PURE_PYTHON"] = "1" if pure else "0"
    for name in list(sys.modules):
        if name == "radgas" or name.startswith("radgas."):
            del sys.modules[name]
    return importlib.import_module("radgas")


def _bench(pure: bool, n_grid: int, repeat: int):
    radgas = _fresh_radgas(pure)
    grid = radgas.VelocityGrid(n_per_axis=n_grid, half_width=3.5)
    quad = radgas.sphere_design_32()
    params = radgas.Params()
    f1 = np.exp(-grid.r2)
    f2 = 0.5 * np.exp(-1.3 * grid.r2)
    q = np.full(quad.size, 0.2)
    state = radgas.FullState(f1=f1, f2=f2, q=q)
    radgas.eval_K(state, grid, quad, params)  # warm up
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        inc = radgas.eval_K(state, grid, quad, params)
        best = min(best, time.perf_counter() - start)
    return radgas.backend_name(), best, inc


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=10, help="nodes per axis")
    parser.add_argument("--repeat", type=int, default=3, help="timed repetitions")
    args = parser.parse_args()

    name_c, time_c, inc_c = _bench(False, args.grid, args.repeat)
    name_p, time_p, inc_p = _bench(True, args.grid, args.repeat)

    scale = max(np.max(np.abs(inc_c.d_f1)), np.max(np.abs(inc_c.d_f2)), 1e-300)
    gap = max(
        np.max(np.abs(inc_c.d_f1 - inc_p.d_f1)),
        np.max(np.abs(inc_c.d_f2 - inc_p.d_f2)),
    ) / scale

    print(f"grid {args.grid}^3, 32 directions")
    print(f"  {name_c:>8}: {time_c * 1e3:9.2f} ms per eval_K")
    print(f"  {name_p:>8}: {time_p * 1e3:9.2f} ms per eval_K")
    if name_c != name_p:
        print(f"  speedup : {time_p / time_c:.1f}x")
    print(f"  max relative gap between backends: {gap:.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
