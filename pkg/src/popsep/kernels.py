"""Hot numeric kernels with paired numba and pure-numpy implementations.

The jitted path is used when numba imports cleanly and the environment
variable ``POPSEP_NUMBA`` is not set to ``0``/``false``/``off``/``no``.
Both paths of ``sample_bits`` perform the same integer arithmetic and
produce bit-identical output; ``pairwise_sq_dists`` differs only by
floating-point rounding (direct loops vs. the Gram-matrix identity).

``benchmarks/bench_kernels.py`` times the two paths against each other.
"""

from __future__ import annotations

import os

import numpy as np

from . import rng


def _env_allows_numba() -> bool:
    return os.environ.get("POPSEP_NUMBA", "").strip().lower() not in {
        "0",
        "false",
        "off",
        "no",
    }


_HAVE_NUMBA = False
if _env_allows_numba():
    try:
        from numba import njit, prange

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - depends on environment
        _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------


def _sample_bits_np(base: int, pops: np.ndarray, probs: np.ndarray) -> np.ndarray:
    n = pops.shape[0]
    ncols = probs.shape[1]
    rows = rng.mix64_array(
        np.uint64(base)
        + np.arange(1, n + 1, dtype=np.uint64) * np.uint64(rng.GOLDEN)
    )
    cols = np.arange(1, ncols + 1, dtype=np.uint64) * np.uint64(rng.COLUMN_SALT)
    h = rng.mix64_array(rows[:, None] ^ cols[None, :])
    u = (h >> np.uint64(11)).astype(np.float64) * rng.UNIT_53
    return (u < probs[pops]).astype(np.uint8)


def _pairwise_sq_dists_np(a: np.ndarray) -> np.ndarray:
    g = a @ a.T
    d = np.diagonal(g).copy()
    out = d[:, None] + d[None, :] - 2.0 * g
    np.maximum(out, 0.0, out=out)
    np.fill_diagonal(out, 0.0)
    return out


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if USE_NUMBA:
    _GOLD = np.uint64(rng.GOLDEN)
    _COLC = np.uint64(rng.COLUMN_SALT)
    _MA = np.uint64(0xBF58476D1CE4E5B9)
    _MB = np.uint64(0x94D049BB133111EB)
    _S30 = np.uint64(30)
    _S27 = np.uint64(27)
    _S31 = np.uint64(31)
    _S11 = np.uint64(11)
    _U53 = rng.UNIT_53

    @njit(cache=True)
    def _mix64_nb(x):
        x ^= x >> _S30
        x *= _MA
        x ^= x >> _S27
        x *= _MB
        x ^= x >> _S31
        return x

    @njit(cache=True, parallel=True)
    def _sample_bits_nb(base, pops, probs, out):
        n, ncols = out.shape
        for i in prange(n):
            row_seed = _mix64_nb(base + np.uint64(i + 1) * _GOLD)
            p = probs[pops[i]]
            for j in range(ncols):
                h = _mix64_nb(row_seed ^ (np.uint64(j + 1) * _COLC))
                u = np.float64(h >> _S11) * _U53
                out[i, j] = 1 if u < p[j] else 0

    @njit(cache=True, parallel=True)
    def _pairwise_sq_dists_nb(a, out):
        n, ncols = a.shape
        for i in prange(n):
            out[i, i] = 0.0
            for j in range(i + 1, n):
                s = 0.0
                for t in range(ncols):
                    d = a[i, t] - a[j, t]
                    s += d * d
                out[i, j] = s
                out[j, i] = s


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def sample_bits(seed: int, pops: np.ndarray, probs: np.ndarray) -> np.ndarray:
    """(n, K) uint8 Bernoulli draws; row i uses probability row probs[pops[i]].

    Deterministic in (seed, i, j) and identical across backends.
    """
    pops = np.ascontiguousarray(pops, dtype=np.int64)
    probs = np.ascontiguousarray(probs, dtype=np.float64)
    base = rng.derive(seed)
    if USE_NUMBA:
        out = np.empty((pops.shape[0], probs.shape[1]), dtype=np.uint8)
        _sample_bits_nb(np.uint64(base), pops, probs, out)
        return out
    return _sample_bits_np(base, pops, probs)


def pairwise_sq_dists(a: np.ndarray) -> np.ndarray:
    """Symmetric (n, n) matrix of squared Euclidean row distances."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if USE_NUMBA:
        out = np.empty((a.shape[0], a.shape[0]), dtype=np.float64)
        _pairwise_sq_dists_nb(a, out)
        return out
    return _pairwise_sq_dists_np(a)


def warmup() -> None:
    """Trigger JIT compilation on tiny inputs (no-op on the numpy path)."""
    pops = np.zeros(2, dtype=np.int64)
    probs = np.full((1, 3), 0.5)
    sample_bits(0, pops, probs)
    pairwise_sq_dists(np.eye(3))
