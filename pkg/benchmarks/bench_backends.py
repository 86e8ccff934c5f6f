#!/usr/bin/env python3
"""Timing comparison of the compiled and pure-NumPy kernel backends.

The pairwise kernel evaluations dominate pencil assembly during scans and
Newton refinement; this script measures both implementations on the same
inputs and reports the speedup.  Run:

    python benchmarks/bench_backends.py [--sizes 400,800,1600] [--repeats 5]
"""

import argparse
import time

import numpy as np

from helmres import _kernels_py

try:
    from helmres import _kernels_cy
except ImportError:
    _kernels_cy = None


def make_inputs(n):
    rng = np.random.default_rng(42)
    pts = rng.normal(size=(n, 3))
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    nrm = pts.copy()
    return np.ascontiguousarray(pts), np.ascontiguousarray(nrm)


def best_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="400,800,1600")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    z = 1.1 - 0.4j

    if _kernels_cy is None:
        print("compiled backend unavailable; timing the NumPy backend only")

    header = f"{'n':>6} {'kernel':<12} {'numpy [ms]':>12} {'compiled [ms]':>14} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        pts, nrm = make_inputs(n)
        cases = {
            "green": lambda mod: mod.green(z, pts, pts, True),
            "green_dn": lambda mod: mod.green_dn(z, pts, pts, nrm, True, True),
            "green_dz": lambda mod: mod.green_dz(z, pts, pts, True),
        }
        for name, call in cases.items():
            t_py = best_time(lambda: call(_kernels_py), args.repeats)
            if _kernels_cy is not None:
                t_cy = best_time(lambda: call(_kernels_cy), args.repeats)
                ref = call(_kernels_py)
                out = call(_kernels_cy)
                assert np.allclose(ref, out, rtol=1e-12, atol=1e-14), name
                print(f"{n:>6} {name:<12} {1e3 * t_py:>12.2f} "
                      f"{1e3 * t_cy:>14.2f} {t_py / t_cy:>8.2f}")
            else:
                print(f"{n:>6} {name:<12} {1e3 * t_py:>12.2f} {'-':>14} {'-':>8}")


if __name__ == "__main__":
    main()
