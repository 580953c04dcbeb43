"""Dense kernels for wide matrices: top-k singular triplets, rank-k
approximation, operator and Frobenius norms.

The factorization works on the Gram matrix of the smaller side (n x n for an
n x K input with n <= K) using orthogonal block power iteration with a
Rayleigh-Ritz extraction each sweep. The starting block is a fixed
pseudo-random matrix, so results are deterministic for a given input. Singular
vectors on the larger side are recovered as v = m^T u / sigma and
re-orthonormalized; directions with sigma below 1e-12 * sigma_1 cannot be
recovered that way and are emitted as flagged degenerate triplets whose
large-side vector is an arbitrary unit vector orthogonal to the ones already
emitted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import ConvergenceError

DEFAULT_TOL = 1e-10
DEGENERATE_RATIO = 1e-12
_INIT_SEED = 0x5EED0B10C  # fixed seed of the starting block
_RESID_FLOOR = 1e-13  # times lambda_1: attainable accuracy of H u = lambda u


@dataclass(frozen=True)
class SingularTriplet:
    sigma: float
    left: np.ndarray  # unit vector, length n
    right: np.ndarray  # unit vector, length K
    degenerate: bool = False


@dataclass(frozen=True)
class SpectralSummary:
    """Top singular triplets in descending sigma order."""

    triplets: tuple[SingularTriplet, ...]
    residual_norm: float
    iterations: int

    @property
    def sigmas(self) -> np.ndarray:
        return np.array([t.sigma for t in self.triplets])

    @property
    def left_vectors(self) -> np.ndarray:
        """(n, k) matrix with left singular vectors as columns."""
        return np.stack([t.left for t in self.triplets], axis=1)

    @property
    def right_vectors(self) -> np.ndarray:
        """(K, k) matrix with right singular vectors as columns."""
        return np.stack([t.right for t in self.triplets], axis=1)


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("expected a 2-D matrix with at least one row and column")
    if not np.isfinite(a).all():
        raise ValueError("matrix entries must be finite")
    return a


def _gram_topk(w: np.ndarray, k: int, tol: float):
    """Top-k eigenpairs of w @ w.T via block power iteration.

    Returns (eigenvalues desc, orthonormal vectors (s, k), sweeps).
    """
    s = w.shape[0]
    block = min(k + 2, s)  # small oversampling sharpens the k-th direction
    h = w @ w.T
    h = (h + h.T) * 0.5
    q = np.linalg.qr(rng.uniform_matrix(_INIT_SEED, s, block) * 2.0 - 1.0)[0]
    cap = max(32, 10 * s * math.ceil(math.log(1.0 / tol)))

    lam = np.zeros(block)
    u = q
    worst = math.inf
    for sweep in range(1, cap + 1):
        z = h @ q
        b = q.T @ z
        b = (b + b.T) * 0.5
        w_ritz, rot = np.linalg.eigh(b)
        order = np.argsort(w_ritz)[::-1]
        lam = w_ritz[order]
        rot = rot[:, order]
        u = q @ rot
        resid = np.linalg.norm(z @ rot - u * lam, axis=0)

        lam0 = max(lam[0], 0.0)
        sig = np.sqrt(np.clip(lam, 0.0, None))
        if sig[0] == 0.0:
            return lam[:k], u[:, :k], sweep  # zero matrix: everything degenerate
        needed = sig[:k] > DEGENERATE_RATIO * sig[0]
        thresholds = np.maximum(tol * sig[0] * sig[:k], _RESID_FLOOR * lam0)
        worst = float(np.max(resid[:k][needed] / thresholds[needed], initial=0.0))
        if worst <= 1.0:
            return lam[:k], u[:, :k], sweep
        q = np.linalg.qr(z)[0]

    raise ConvergenceError(cap, worst)


def _orient(u: np.ndarray, v: np.ndarray):
    """Make the largest-magnitude entry of the left vector positive."""
    j = int(np.argmax(np.abs(u)))
    if u[j] < 0:
        return -u, -v
    return u, v


def _unit_orthogonal(existing: list[np.ndarray], dim: int) -> np.ndarray:
    """A unit vector orthogonal to all vectors in `existing`."""
    best = None
    best_norm = -1.0
    for j in range(dim):
        w = np.zeros(dim)
        w[j] = 1.0
        for q in existing:
            w -= (w @ q) * q
        nrm = float(np.linalg.norm(w))
        if nrm > 0.5:
            return w / nrm
        if nrm > best_norm:
            best, best_norm = w, nrm
    if best is None or best_norm <= 0.0:
        raise ValueError("cannot construct an orthogonal unit vector")
    return best / best_norm


def top_k_singular_triplets(m, k: int, tol: float = DEFAULT_TOL) -> SpectralSummary:
    """The k largest singular triplets of m, descending by singular value.

    Each returned triplet satisfies ||m v - sigma u|| <= tol * sigma_1 and
    ||m^T u - sigma v|| <= tol * sigma_1 (up to a machine-precision floor for
    tiny singular values). Deterministic for a fixed input.
    """
    a = _as_matrix(m)
    n, ncols = a.shape
    if not 1 <= k <= min(n, ncols):
        raise ValueError(f"k must satisfy 1 <= k <= min(n, K) = {min(n, ncols)}")
    if tol <= 0:
        raise ValueError("tol must be positive")

    transpose = n > ncols
    w = a.T if transpose else a
    big_dim = w.shape[1]
    lam, primary, iterations = _gram_topk(np.ascontiguousarray(w), k, tol)

    sig0 = math.sqrt(max(float(lam[0]), 0.0))
    derived: list[np.ndarray] = []
    triplets: list[SingularTriplet] = []
    for i in range(k):
        sigma = math.sqrt(max(float(lam[i]), 0.0))
        degenerate = sig0 == 0.0 or sigma <= DEGENERATE_RATIO * sig0
        p = primary[:, i].copy()
        if degenerate:
            d = _unit_orthogonal(derived, big_dim)
        else:
            d = w.T @ p / sigma
            for q in derived:
                d -= (d @ q) * q
            d /= np.linalg.norm(d)
        derived.append(d)
        u, v = (d, p) if transpose else (p, d)
        u, v = _orient(u, v)
        triplets.append(SingularTriplet(sigma, u, v, degenerate))

    residual = 0.0
    for t in triplets:
        if t.degenerate:
            continue
        residual = max(
            residual,
            float(np.linalg.norm(a @ t.right - t.sigma * t.left)),
            float(np.linalg.norm(a.T @ t.left - t.sigma * t.right)),
        )
    return SpectralSummary(tuple(triplets), residual, iterations)


def rank_k_approximation(m, k: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Best rank-k approximation in operator norm (truncated SVD)."""
    summary = top_k_singular_triplets(m, k, tol)
    u = summary.left_vectors
    v = summary.right_vectors
    return (u * summary.sigmas) @ v.T


def operator_norm(m, tol: float = DEFAULT_TOL) -> float:
    """Largest singular value."""
    return top_k_singular_triplets(m, 1, tol).triplets[0].sigma


def frobenius_norm(m) -> float:
    """Square root of the sum of squared entries."""
    return float(np.linalg.norm(np.asarray(m, dtype=np.float64)))
