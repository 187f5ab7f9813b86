"""Replicate engine: many simulated series reduced to sufficient statistics.

Replicates are cut into fixed blocks of ``BLOCK_SIZE``. A block is computed
the same way whichever thread picks it up, and each replicate reads only its
own Philox stream, so the returned arrays are bit-identical for any worker
count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .ar1_model import Ar1Params
from .errors import DegenerateSeriesError, ParameterError

logger = logging.getLogger(__name__)

BLOCK_SIZE = 4096
MAX_DEGENERATE_FRACTION = 1e-3
MAX_ATTEMPTS = 8


@dataclass(frozen=True, eq=False)
class ReplicateStats:
    """Per-replicate pieces from which every estimator of rho is built.

    ``sxy`` is the lag-one cross sum over t = 2..n, ``smid`` the sum of
    squares over the interior t = 2..n-1, ``y1``/``yn`` the end points.
    """

    sxy: np.ndarray
    smid: np.ndarray
    y1: np.ndarray
    yn: np.ndarray
    n: int
    redrawn: int = 0

    @property
    def size(self) -> int:
        return self.sxy.size

    @property
    def head(self) -> np.ndarray:
        """Sum of squares over t = 1..n-1."""
        return self.y1 * self.y1 + self.smid

    @property
    def tail(self) -> np.ndarray:
        """Sum of squares over t = 2..n."""
        return self.smid + self.yn * self.yn

    @property
    def full(self) -> np.ndarray:
        return self.y1 * self.y1 + self.smid + self.yn * self.yn


def default_workers() -> int:
    return os.cpu_count() or 1


def _blocks(total):
    return [(s, min(BLOCK_SIZE, total - s)) for s in range(0, total, BLOCK_SIZE)]


def _run_blocks(fn, total, workers):
    blocks = _blocks(total)
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ParameterError(f"worker count must be >= 1, got {workers}")
    if workers == 1 or len(blocks) == 1:
        for start, count in blocks:
            fn(start, count)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for fut in [pool.submit(fn, s, c) for s, c in blocks]:
            fut.result()


def _degenerate(stats_arrays):
    sxy, smid, y1, yn = stats_arrays
    head = y1 * y1 + smid
    tail = smid + yn * yn
    ok = np.isfinite(sxy) & np.isfinite(head) & np.isfinite(tail) & (head > 0) & (tail > 0)
    return np.flatnonzero(~ok)


def _redraw(arrays, bad, draw_one, total):
    if bad.size > MAX_DEGENERATE_FRACTION * total:
        raise DegenerateSeriesError(
            f"{bad.size} of {total} replicates had a zero estimator denominator "
            f"(limit {MAX_DEGENERATE_FRACTION:.1%})"
        )
    for idx in bad:
        for attempt in range(1, MAX_ATTEMPTS + 1):
            values = draw_one(int(idx), attempt)
            if _degenerate([np.array([v]) for v in values]).size == 0:
                for arr, v in zip(arrays, values):
                    arr[idx] = v
                break
        else:
            raise DegenerateSeriesError(
                f"replicate {idx} stayed degenerate after {MAX_ATTEMPTS} redraws"
            )
    if bad.size:
        logger.info("redrew %d degenerate replicates", bad.size)
    return int(bad.size)


def _check(n, count):
    if n < 3:
        raise ParameterError(f"series length must be >= 3, got {n!r}")
    if count < 1:
        raise ParameterError(f"replicate count must be >= 1, got {count!r}")


def backward_replicates(params: Ar1Params, n: int, y_n: float, count: int,
                        master_seed: int, workers: int | None = None) -> ReplicateStats:
    """Statistics of ``count`` series drawn conditionally on ``Y_n = y_n``."""
    _check(n, count)
    rho, sigma, y_n, key = params.rho, params.sigma, float(y_n), int(master_seed)
    sxy, smid, y1 = np.empty(count), np.empty(count), np.empty(count)
    yn = np.full(count, y_n)

    def block(start, size):
        sl = slice(start, start + size)
        kernels.backward_stats(rho, sigma, y_n, n, key, start, size, 0,
                               sxy[sl], smid[sl], y1[sl])

    def draw_one(idx, attempt):
        out = [np.empty(1) for _ in range(3)]
        kernels.backward_stats(rho, sigma, y_n, n, key, idx, 1, attempt, *out)
        return out[0][0], out[1][0], out[2][0], y_n

    _run_blocks(block, count, workers)
    arrays = (sxy, smid, y1, yn)
    redrawn = _redraw(arrays, _degenerate(arrays), draw_one, count)
    return ReplicateStats(sxy, smid, y1, yn, n, redrawn)


def forward_replicates(params: Ar1Params, n: int, count: int, master_seed: int,
                       workers: int | None = None) -> ReplicateStats:
    """Statistics of ``count`` stationary series."""
    _check(n, count)
    rho, sigma, key = params.rho, params.sigma, int(master_seed)
    sxy, smid, y1, yn = (np.empty(count) for _ in range(4))

    def block(start, size):
        sl = slice(start, start + size)
        kernels.forward_stats(rho, sigma, n, key, start, size, 0,
                              sxy[sl], smid[sl], y1[sl], yn[sl])

    def draw_one(idx, attempt):
        out = [np.empty(1) for _ in range(4)]
        kernels.forward_stats(rho, sigma, n, key, idx, 1, attempt, *out)
        return tuple(o[0] for o in out)

    _run_blocks(block, count, workers)
    arrays = (sxy, smid, y1, yn)
    redrawn = _redraw(arrays, _degenerate(arrays), draw_one, count)
    return ReplicateStats(sxy, smid, y1, yn, n, redrawn)


def backward_path_matrix(params: Ar1Params, n: int, y_n: float, count: int,
                         master_seed: int) -> np.ndarray:
    """Full conditional paths, shape ``(count, n)``; for diagnostics."""
    _check(n, count)
    return kernels.backward_paths(params.rho, params.sigma, float(y_n), n,
                                  int(master_seed), 0, count)


def forward_path_matrix(params: Ar1Params, n: int, count: int,
                        master_seed: int) -> np.ndarray:
    _check(n, count)
    return kernels.forward_paths(params.rho, params.sigma, n, int(master_seed), 0, count)
