#!/usr/bin/env python3
"""Benchmark the compiled CSR kernels against the scipy fallback.

Times the three kernels and a full Euler propagation on synthetic graphs
of increasing size, printing a table with the per-backend medians and the
speedup. Run from the repo root::

    python benchmarks/bench_kernels.py [--repeats 5]
"""
import argparse
import statistics
import time

import numpy as np

from dgc._kernels import _csr_py
from dgc.diffusion import DiffusionConfig, propagate
from dgc.graphcore import build_graph, normalize

try:
    from dgc._kernels import _csr_cy
except ImportError:
    _csr_cy = None

CASES = [
    # (nodes, avg degree, feature dim, euler steps)
    (2_000, 8, 64, 50),
    (8_000, 8, 128, 50),
    (20_000, 4, 256, 50),
]


def synthetic_graph(rng, n, avg_degree):
    m = n * avg_degree // 2
    src = rng.integers(0, n, size=3 * m)
    dst = rng.integers(0, n, size=3 * m)
    lo, hi = np.minimum(src, dst), np.maximum(src, dst)
    keep = lo < hi
    pairs = np.unique(lo[keep] * n + hi[keep])[:m]
    return build_graph([(int(p // n), int(p % n), 1.0) for p in pairs], n)


def time_call(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append((time.perf_counter() - start) * 1000.0)
    return statistics.median(times)


def bench_case(n, avg_degree, d, k, repeats):
    rng = np.random.default_rng(n)
    s = normalize(synthetic_graph(rng, n, avg_degree), "aug")
    g = s.matrix
    x = rng.standard_normal((n, d))
    out = np.empty_like(x)

    rows = []
    for label, kernel_args in (
        ("spmm", (g.rows, g.cols, g.vals, x, out)),
        ("euler_step", (g.rows, g.cols, g.vals, x, 0.05, out)),
        ("laplacian_apply", (g.rows, g.cols, g.vals, x, out)),
    ):
        py_ms = time_call(lambda: getattr(_csr_py, label)(*kernel_args), repeats)
        cy_ms = (
            time_call(lambda: getattr(_csr_cy, label)(*kernel_args), repeats)
            if _csr_cy else float("nan")
        )
        rows.append((label, py_ms, cy_ms))

    cfg = DiffusionConfig("euler", t=2.0, k=k)

    def run_propagate(impl):
        import dgc._kernels as kernels

        saved = (kernels.spmm, kernels.euler_step, kernels.laplacian_apply)
        kernels.spmm = impl.spmm
        kernels.euler_step = impl.euler_step
        kernels.laplacian_apply = impl.laplacian_apply
        try:
            return time_call(lambda: propagate(x, s, cfg), max(1, repeats // 2))
        finally:
            kernels.spmm, kernels.euler_step, kernels.laplacian_apply = saved

    py_ms = run_propagate(_csr_py)
    cy_ms = run_propagate(_csr_cy) if _csr_cy else float("nan")
    rows.append((f"euler K={k}", py_ms, cy_ms))
    return rows


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if _csr_cy is None:
        print("compiled extension not built; showing fallback timings only\n")

    for n, deg, d, k in CASES:
        print(f"n={n} avg_degree={deg} d={d}")
        print(f"  {'kernel':<16} {'scipy ms':>10} {'cython ms':>10} {'speedup':>8}")
        for label, py_ms, cy_ms in bench_case(n, deg, d, k, args.repeats):
            speedup = py_ms / cy_ms if cy_ms == cy_ms else float("nan")
            print(f"  {label:<16} {py_ms:>10.2f} {cy_ms:>10.2f} {speedup:>7.2f}x")
        print()


if __name__ == "__main__":
    main()
