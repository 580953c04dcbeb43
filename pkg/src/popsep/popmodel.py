"""Mixture-of-Bernoulli-product models: generation, normalization, divergence.

A model is k probability rows over K features plus per-population sample
counts. Divergence is the minimum over population pairs of the mean squared
per-feature probability gap; sqrt(K * divergence) is the Euclidean distance
between the closest pair of population means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels, rng


@dataclass(frozen=True)
class PopulationModel:
    probs: np.ndarray  # (k, K), entries in [0, 1]
    sizes: np.ndarray  # (k,), positive counts

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        sizes = np.asarray(self.sizes, dtype=np.int64)
        if probs.ndim != 2 or probs.shape[0] < 2:
            raise ValueError("need at least two populations (k >= 2)")
        if not np.isfinite(probs).all() or probs.min() < 0.0 or probs.max() > 1.0:
            raise ValueError("probabilities must lie in [0, 1]")
        if sizes.ndim != 1 or sizes.shape[0] != probs.shape[0] or (sizes < 1).any():
            raise ValueError("sizes must be positive, one per population")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "sizes", sizes)

    @property
    def k(self) -> int:
        return self.probs.shape[0]

    @property
    def num_features(self) -> int:
        return self.probs.shape[1]

    @property
    def n(self) -> int:
        return int(self.sizes.sum())

    @property
    def min_weight(self) -> float:
        """min_t N_t / n."""
        return float(self.sizes.min() / self.n)

    @property
    def max_variance(self) -> float:
        """max over entries of p (1 - p)."""
        return float(np.max(self.probs * (1.0 - self.probs)))


@dataclass
class SampleMatrix:
    """Observed n x K matrix: raw {0,1} bits, or {1/2,1} after normalization."""

    data: np.ndarray
    labels: np.ndarray | None = None
    normalized: bool = False

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def num_features(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class FeatureBlocks:
    blocks: tuple[np.ndarray, ...]  # disjoint index lists, each of block_size
    block_size: int


def divergence(model: PopulationModel) -> float:
    """Minimum over population pairs of mean((p_s - p_t)^2); 0 iff two rows match."""
    p = model.probs
    best = math.inf
    for s in range(model.k):
        for t in range(s + 1, model.k):
            best = min(best, float(np.mean((p[s] - p[t]) ** 2)))
    return best


def two_block_model(
    alpha: float, epsilon: float, num_features: int, size: int
) -> PopulationModel:
    """Balanced two-population model with divergence alpha**2.

    For half the features p1 = (1+alpha)/2 + epsilon/2 and p2 = (1-alpha)/2 +
    epsilon/2; for the other half the roles swap. epsilon shifts both rows,
    breaking the symmetry of the means.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if num_features < 2 or num_features % 2 != 0:
        raise ValueError("the feature count must be even (and >= 2)")
    if size < 1:
        raise ValueError("population size must be positive")
    hi = (1.0 + alpha) / 2.0 + epsilon / 2.0
    lo = (1.0 - alpha) / 2.0 + epsilon / 2.0
    if hi > 1.0 or lo < 0.0:
        raise ValueError("alpha/epsilon put probabilities outside [0, 1]")
    half = num_features // 2
    p1 = np.concatenate([np.full(half, hi), np.full(half, lo)])
    p2 = np.concatenate([np.full(half, lo), np.full(half, hi)])
    return PopulationModel(np.stack([p1, p2]), np.array([size, size]))


def random_model(
    seed: int, k: int = 2, max_size: int = 50, max_features: int = 500
) -> PopulationModel:
    """A model with uniform-random probability rows and random sizes/K.

    Used by verification sweeps; deterministic given seed.
    """
    meta = rng.uniform_row(rng.derive(seed, 1), k + 1)
    num_features = 2 + int(meta[0] * (max_features - 1))
    sizes = np.array([1 + int(meta[1 + t] * max_size) for t in range(k)])
    probs = rng.uniform_matrix(rng.derive(seed, 2), k, num_features)
    return PopulationModel(probs, sizes)


def sample(model: PopulationModel, seed: int) -> SampleMatrix:
    """n x K bit matrix with ground-truth labels; deterministic given seed.

    Row i of population t holds independent Bernoulli(p_t^j) bits, generated
    from a per-row counter substream so rows are independent of evaluation
    order.
    """
    pops = np.repeat(np.arange(model.k, dtype=np.int64), model.sizes)
    bits = kernels.sample_bits(seed, pops, model.probs)
    return SampleMatrix(bits, labels=pops, normalized=False)


def normalize(s: SampleMatrix) -> SampleMatrix:
    """Map each bit b to (b + 1) / 2, pushing entries into {1/2, 1}."""
    if s.normalized:
        raise ValueError("sample is already normalized")
    data = np.asarray(s.data)
    if not np.isin(data, (0, 1)).all():
        raise ValueError("raw sample must contain only 0/1 entries")
    out = (data.astype(np.float64) + 1.0) / 2.0
    labels = None if s.labels is None else s.labels.copy()
    return SampleMatrix(out, labels=labels, normalized=True)


def split_feature_blocks(
    total_features: int, block_size: int, rounds: int, seed: int
) -> FeatureBlocks:
    """Cut a random permutation of feature indices into disjoint equal blocks."""
    if block_size < 1 or rounds < 1:
        raise ValueError("block_size and rounds must be positive")
    if rounds * block_size > total_features:
        raise ValueError(
            f"need {rounds * block_size} features but only {total_features} available"
        )
    perm = rng.permutation(total_features, seed)
    blocks = tuple(
        perm[r * block_size : (r + 1) * block_size].copy() for r in range(rounds)
    )
    return FeatureBlocks(blocks, block_size)
