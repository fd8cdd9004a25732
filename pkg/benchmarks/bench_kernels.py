#!/usr/bin/env python3
"""Compare the numba and numpy paths of the hot kernels.

Prints one JSON object per kernel with best-of-N wall times and the max
difference between the two backends' outputs.

    python benchmarks/bench_kernels.py --runs 5
"""
import argparse
import json
import time

import numpy as np

from nlsint import _kernels

SEED = 7


def best_of(fn, runs):
    fn()  # warm-up, includes JIT compilation on the first call
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def cases(rng):
    u = rng.uniform(-4.0, 4.0, 200_000)
    m = rng.uniform(-2.0, 0.99, 200_000)
    yield "sncndn", lambda b: np.stack(_kernels.sncndn(u, m, backend=b))

    y = rng.standard_normal((101, 2001))
    yield "cumint_rows", lambda b: _kernels.cumint_rows(y, 0.01, backend=b)

    n = 4096
    lo = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    up = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    di = 4.0 + np.abs(lo) + np.abs(up) + 0j
    rhs = rng.standard_normal(n) + 0j
    yield "solve_tridiagonal", lambda b: _kernels.solve_tridiagonal(lo, di, up, rhs, backend=b)

    x = np.linspace(-20.0, 20.0, 1024)
    psi = np.sqrt(2.0) / np.cosh(x) + 0j
    one, zero = np.ones_like(x), np.zeros_like(x)

    def cn(b):
        w = psi
        for _ in range(200):
            w, _, _ = _kernels.cn_step(w, one, zero, zero, zero, one, x[1] - x[0], 1e-3, 0.0, 0.0, backend=b)
        return w

    yield "cn_step x200", cn


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(SEED)
    for name, fn in cases(rng):
        t_nb, out_nb = best_of(lambda: fn("numba"), args.runs)
        t_np, out_np = best_of(lambda: fn("numpy"), args.runs)
        print(json.dumps({
            "kernel": name,
            "numba_s": round(t_nb, 6),
            "numpy_s": round(t_np, 6),
            "speedup": round(t_np / t_nb, 2) if t_nb > 0 else None,
            "max_diff": float(np.max(np.abs(out_nb - out_np))),
        }))


if __name__ == "__main__":
    main()
