"""Time the compiled kernels against the numpy fallback.

Run ``python3 benchmarks/bench_kernels.py``. Both backends produce the same
streams; this only measures speed, and checks agreement on the way.
"""

import argparse
import time

import numpy as np

from predlim import _fallback

try:
    from predlim import _kernels
except ImportError:
    _kernels = None


def time_call(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_backward(module, n, count, repeat):
    out = [np.empty(count) for _ in range(3)]
    seconds = time_call(lambda: module.backward_stats(0.5, 1.0, 2.0, n, 1, 0, count, 0, *out), repeat)
    return seconds, out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=100, help="series length")
    parser.add_argument("--count", type=int, default=20_000, help="replicates per call")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    draws = (args.n - 1) * args.count

    py_s, py_out = bench_backward(_fallback, args.n, args.count, args.repeat)
    print(f"numpy fallback : {py_s * 1e9 / draws:8.1f} ns/draw ({py_s:.3f} s)")
    if _kernels is None:
        print("compiled kernels not built; nothing to compare")
        return
    cy_s, cy_out = bench_backward(_kernels, args.n, args.count, args.repeat)
    print(f"compiled kernel: {cy_s * 1e9 / draws:8.1f} ns/draw ({cy_s:.3f} s)")
    print(f"speedup        : {py_s / cy_s:8.1f}x")
    diff = max(float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))) for a, b in zip(cy_out, py_out))
    print(f"max relative difference between backends: {diff:.1e}")


if __name__ == "__main__":
    main()
