"""Baseline dataset distances: mean-series Euclidean and DTW, and linkage distances."""
import math
import os

import numba
import numpy as np
from numba import njit, prange

from .errors import DimensionMismatch, EmptyInput, EmptyMatrix

if "NUMBA_THREADING_LAYER" not in os.environ:
    # tbb is often too old to load; prefer the thread-safe OpenMP layer.
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]

LINKAGE_KINDS = ("min", "avg", "max")

# Rows of ``a`` handled per parallel task. The partition depends only on this
# constant, never on the thread count, so the avg reduction order is fixed.
LINKAGE_BLOCK_ROWS = 128


def euclidean_mean_distance(a, b):
    """L2 norm between the two mean series."""
    if a.mean.size != b.mean.size:
        raise DimensionMismatch(f"mean lengths differ: {a.mean.size} vs {b.mean.size}")
    diff = a.mean - b.mean
    return math.sqrt(float(diff @ diff))


def dtw_distance(x, y):
    """Full-alignment DTW with absolute-difference cost.

    ``D[0][0] = 0`` and the rest of row 0 / column 0 is infinite, so every
    path starts at (1, 1) and ends at (len(x), len(y)).
    """
    x = [float(v) for v in np.asarray(x, dtype=np.float64).reshape(-1)]
    y = [float(v) for v in np.asarray(y, dtype=np.float64).reshape(-1)]
    if not x or not y:
        raise EmptyInput("DTW needs two non-empty sequences")
    inf = math.inf
    prev = [0.0] + [inf] * len(y)
    for xi in x:
        cur = [inf] * (len(y) + 1)
        for j, yj in enumerate(y, start=1):
            cur[j] = abs(xi - yj) + min(prev[j - 1], cur[j - 1], prev[j])
        prev = cur
    return prev[-1]


def dtw_mean_distance(a, b):
    return dtw_distance(a.mean, b.mean)


@njit(cache=True, nogil=True)
def _block_stats(a, b, lo, hi):
    # min, max, and Neumaier-compensated sum of ||a_i - b_j|| for lo <= i < hi
    L = a.shape[1]
    dmin = math.inf
    dmax = -math.inf
    s = 0.0
    comp = 0.0
    for i in range(lo, hi):
        for j in range(b.shape[0]):
            acc = 0.0
            for k in range(L):
                d = a[i, k] - b[j, k]
                acc += d * d
            dist = math.sqrt(acc)
            if dist < dmin:
                dmin = dist
            if dist > dmax:
                dmax = dist
            t = s + dist
            if abs(s) >= dist:
                comp += (s - t) + dist
            else:
                comp += (dist - t) + s
            s = t
    return dmin, dmax, s, comp


@njit(cache=True, parallel=True)
def _linkage_kernel(a, b, block):
    n = a.shape[0]
    nblocks = (n + block - 1) // block
    mins = np.empty(nblocks)
    maxs = np.empty(nblocks)
    sums = np.empty(nblocks)
    comps = np.empty(nblocks)
    for k in prange(nblocks):
        lo = k * block
        hi = min(lo + block, n)
        mins[k], maxs[k], sums[k], comps[k] = _block_stats(a, b, lo, hi)
    return mins, maxs, sums, comps


def _neumaier(values):
    s = 0.0
    comp = 0.0
    for v in values:
        t = s + v
        if abs(s) >= abs(v):
            comp += (s - t) + v
        else:
            comp += (v - t) + s
        s = t
    return s + comp


def _rows(m):
    return np.ascontiguousarray(getattr(m, "data", m), dtype=np.float64)


def linkage_distances(a, b, subsample=None, rng=None):
    """Single, average and complete linkage between two sample matrices.

    Returns a dict with keys ``min``, ``avg`` and ``max``. With ``subsample``
    set, at most that many rows of each matrix are used (drawn without
    replacement from ``rng``); the result is then an approximation.
    """
    xa, xb = _rows(a), _rows(b)
    if xa.ndim != 2 or xb.ndim != 2 or xa.shape[0] == 0 or xb.shape[0] == 0:
        raise EmptyMatrix("linkage needs two non-empty sample matrices")
    if xa.shape[1] != xb.shape[1]:
        raise DimensionMismatch(f"window lengths differ: {xa.shape[1]} vs {xb.shape[1]}")
    if subsample is not None:
        rng = rng if rng is not None else np.random.default_rng(0)
        if xa.shape[0] > subsample:
            xa = xa[np.sort(rng.choice(xa.shape[0], subsample, replace=False))]
        if xb.shape[0] > subsample:
            xb = xb[np.sort(rng.choice(xb.shape[0], subsample, replace=False))]
    mins, maxs, sums, comps = _linkage_kernel(xa, xb, LINKAGE_BLOCK_ROWS)
    total = _neumaier(np.concatenate([sums, comps]))
    return {
        "min": float(mins.min()),
        "avg": float(total / (xa.shape[0] * xb.shape[0])),
        "max": float(maxs.max()),
    }


def linkage_distance(a, b, kind, **kwargs):
    if kind not in LINKAGE_KINDS:
        raise ValueError(f"kind must be one of {LINKAGE_KINDS}, got {kind!r}")
    return linkage_distances(a, b, **kwargs)[kind]


def set_threads(n):
    """Cap numba's worker threads; values above the pool size are clamped."""
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n
