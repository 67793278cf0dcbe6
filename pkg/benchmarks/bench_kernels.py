#!/usr/bin/env python3
"""Benchmark the compiled LSTM kernels against the pure-numpy fallback.

Runs the fused forward and backward sequence kernels on a grid of shapes
and reports median wall time per call plus the compiled/python speedup.

    python3 benchmarks/bench_kernels.py [--repeats 7] [--check]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from assistlm.numgrad import _kernels_py

try:
    from assistlm.numgrad import _kernels
except ImportError:
    _kernels = None

SHAPES = (
    # (T, B, d_in, D)
    (32, 1, 51, 50),
    (64, 16, 51, 50),
    (64, 64, 51, 50),
    (128, 64, 101, 100),
    (256, 32, 201, 200),
)


def _median_time(fn, repeats: int) -> float:
    times = []
    fn()  # warm-up
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times)


def bench_shape(impl, T: int, B: int, d_in: int, D: int, repeats: int):
    rng = np.random.default_rng(12345)
    wx = rng.normal(scale=0.08, size=(d_in, 4 * D))
    wh = rng.normal(scale=0.08, size=(D, 4 * D))
    b = rng.normal(scale=0.08, size=4 * D)
    x = np.ascontiguousarray(rng.normal(size=(T, B, d_in)))
    h0 = np.zeros((B, D))
    c0 = np.zeros((B, D))
    h, c, gates = impl.lstm_seq_forward(wx, wh, b, x, h0, c0)
    dh = np.ascontiguousarray(rng.normal(size=(T, B, D)))
    dzero = np.zeros((B, D))

    fwd = _median_time(lambda: impl.lstm_seq_forward(wx, wh, b, x, h0, c0), repeats)
    bwd = _median_time(
        lambda: impl.lstm_seq_backward(wx, wh, x, h0, c0, h, c, gates, dh, dzero, dzero),
        repeats)
    return fwd, bwd, (h, c, gates)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    parser.add_argument("--check", action="store_true",
                        help="also assert the two backends agree numerically")
    args = parser.parse_args()

    if _kernels is None:
        print("compiled backend unavailable; timing the python backend only")

    header = f"{'shape (T,B,din,D)':>22}  {'dir':>4}  {'python':>10}  {'cython':>10}  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for T, B, d_in, D in SHAPES:
        py_fwd, py_bwd, py_out = bench_shape(_kernels_py, T, B, d_in, D, args.repeats)
        if _kernels is not None:
            cy_fwd, cy_bwd, cy_out = bench_shape(_kernels, T, B, d_in, D, args.repeats)
            if args.check:
                for a, b_ in zip(py_out, cy_out):
                    err = float(np.max(np.abs(a - b_)))
                    if err > 1e-12:
                        raise SystemExit(f"backend mismatch: {err:.3e}")
        shape = f"({T},{B},{d_in},{D})"
        for name, py_t, cy_t in (("fwd", py_fwd, cy_fwd if _kernels else None),
                                 ("bwd", py_bwd, cy_bwd if _kernels else None)):
            if cy_t is None:
                print(f"{shape:>22}  {name:>4}  {py_t * 1e3:>8.2f}ms  {'n/a':>10}  {'n/a':>8}")
            else:
                print(f"{shape:>22}  {name:>4}  {py_t * 1e3:>8.2f}ms  "
                      f"{cy_t * 1e3:>8.2f}ms  {py_t / cy_t:>7.2f}x")
    if args.check and _kernels is not None:
        print("\nbackends agree to 1e-12 on all benchmarked shapes")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
