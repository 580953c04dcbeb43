"""Counter-based deterministic pseudo-randomness.

Everything here is a pure function of (seed, indices): substreams for
trials/rows are derived by hashing, never by advancing shared state, so
results do not depend on evaluation order. The mixing function is the
splitmix64 finalizer, applied identically by the scalar, vectorized and
jitted code paths.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15  # odd: row-stream stride
COLUMN_SALT = 0xC2B2AE3D27D4EB4F  # odd: decouples column counter from row stream
SEED_SALT = 0xD6E8FEB86659FD93
_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB
UNIT_53 = 2.0**-53


def mix64(x: int) -> int:
    """splitmix64 finalizer (a bijection on 64-bit words)."""
    x &= MASK64
    x ^= x >> 30
    x = (x * _MIX_A) & MASK64
    x ^= x >> 27
    x = (x * _MIX_B) & MASK64
    x ^= x >> 31
    return x


def derive(seed: int, *ids: int) -> int:
    """Substream seed from a base seed plus integer indices (trial, row, ...)."""
    h = mix64((seed & MASK64) ^ SEED_SALT)
    for v in ids:
        h = mix64(h ^ mix64(((v & MASK64) + 1) * GOLDEN))
    return h


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 finalizer on a uint64 array."""
    x = x.astype(np.uint64, copy=True)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX_A)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX_B)
    x ^= x >> np.uint64(31)
    return x


def uniform_matrix(seed: int, rows: int, cols: int) -> np.ndarray:
    """Deterministic (rows, cols) matrix of floats in [0, 1)."""
    base = derive(seed)
    r = mix64_array(
        np.uint64(base) + np.arange(1, rows + 1, dtype=np.uint64) * np.uint64(GOLDEN)
    )
    c = np.arange(1, cols + 1, dtype=np.uint64) * np.uint64(COLUMN_SALT)
    h = mix64_array(r[:, None] ^ c[None, :])
    return (h >> np.uint64(11)).astype(np.float64) * UNIT_53


def uniform_row(seed: int, count: int) -> np.ndarray:
    """Deterministic vector of floats in [0, 1)."""
    return uniform_matrix(seed, 1, count)[0]


def permutation(n: int, seed: int) -> np.ndarray:
    """Deterministic Fisher-Yates permutation of range(n)."""
    idx = np.arange(n)
    s = derive(seed, 0x5157)
    for i in range(n - 1, 0, -1):
        s = mix64(s + GOLDEN)
        j = s % (i + 1)
        idx[i], idx[j] = idx[j], idx[i]
    return idx
