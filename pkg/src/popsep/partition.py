"""Greedy ball-cover partitioning of a rank-k approximation, for constant k.

The data matrix is replaced by its rank-k approximation Ahat, whose rows
concentrate near the per-population mean rows. For a sweep of candidate
squared-separation scales Gamma_j = K * 2^-j the algorithm greedily extracts
k balls (each the largest remaining set of rows within ball_factor * Gamma_j
squared distance of some row), averages each ball into a center, assigns all
leftover rows to the nearest center, and scores the candidate by its
within-set scatter. The candidate with the smallest scatter wins, so the
separation scale never has to be known in advance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from typing import NamedTuple

import numpy as np

from . import kernels, linalg
from .popmodel import SampleMatrix


@dataclass
class PartitionParams:
    k: int
    gamma_sweep_length: int | None = None  # default 2 * ceil(log2 K)
    ball_factor: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if self.gamma_sweep_length is not None and self.gamma_sweep_length < 1:
            raise ValueError("gamma_sweep_length must be positive")
        if self.ball_factor <= 0:
            raise ValueError("ball_factor must be positive")


@dataclass
class CandidatePartition:
    gamma_j: float
    sets: list[np.ndarray]  # k disjoint index arrays covering all individuals
    centers: np.ndarray  # (k, K) ball centers (zero row for an empty ball)
    score: float  # within-set scatter
    degenerate: bool  # some ball came up empty


@dataclass
class PartitionResult:
    labels: np.ndarray
    chosen_gamma: float
    score: float
    all_candidates: list[CandidatePartition] | None = None


class Misclassification(NamedTuple):
    raw: int  # symmetric-difference count, minimized over relabelings
    rate: float  # raw / n


def q_ball(ahat, v: int, gamma_j: float, ball_factor: float = 0.01) -> np.ndarray:
    """Indices within ball_factor * gamma_j squared distance of row v."""
    if gamma_j <= 0:
        raise ValueError("gamma_j must be positive")
    a = np.asarray(ahat, dtype=np.float64)
    d2 = np.sum((a - a[v]) ** 2, axis=1)
    return np.flatnonzero(d2 <= ball_factor * gamma_j)


def candidate_partition(
    ahat,
    gamma_j: float,
    k: int,
    ball_factor: float = 0.01,
    dists: np.ndarray | None = None,
) -> CandidatePartition:
    """Greedy k-ball cover at one scale, plus nearest-center assignment.

    Ties in the greedy argmax and in the nearest-center argmin resolve to the
    lowest index. If the rows are exhausted before k balls, the remaining
    balls stay empty with zero centers and the candidate is flagged
    degenerate.
    """
    a = np.asarray(ahat, dtype=np.float64)
    n = a.shape[0]
    if n < k:
        raise ValueError("need at least k individuals")
    if gamma_j <= 0:
        raise ValueError("gamma_j must be positive")
    d2 = kernels.pairwise_sq_dists(a) if dists is None else dists
    member = d2 <= ball_factor * gamma_j

    covered = np.zeros(n, dtype=bool)
    sets: list[np.ndarray] = []
    centers = np.zeros((k, a.shape[1]))
    degenerate = False
    for i in range(k):
        if covered.all():
            degenerate = True
            sets.append(np.empty(0, dtype=np.int64))
            continue
        gains = (member & ~covered[None, :]).sum(axis=1)
        gains[covered] = -1  # the ball seed must itself be uncovered
        v = int(np.argmax(gains))
        ball = np.flatnonzero(member[v] & ~covered)
        covered[ball] = True
        sets.append(ball)
        centers[i] = a[ball].mean(axis=0)

    leftover = np.flatnonzero(~covered)
    if leftover.size:
        d_to_centers = (
            np.sum((a[leftover][:, None, :] - centers[None, :, :]) ** 2, axis=2)
        )
        nearest = np.argmin(d_to_centers, axis=1)
        assigned = [list(s) for s in sets]
        for row, c in zip(leftover, nearest):
            assigned[int(c)].append(int(row))
        sets = [np.array(sorted(s), dtype=np.int64) for s in assigned]
    else:
        sets = [np.asarray(s, dtype=np.int64) for s in sets]

    score = 0.0
    for i, s in enumerate(sets):
        if s.size:
            score += float(np.sum((a[s] - centers[i]) ** 2))
    return CandidatePartition(gamma_j, sets, centers, score, degenerate)


def partition(a, params: PartitionParams) -> PartitionResult:
    """Rank-k approximation plus the scatter-minimizing greedy ball cover.

    Works on the raw 0/1 matrix (no normalization). Ties among candidate
    scores resolve toward larger gamma_j (smaller j). Deterministic.
    """
    data = np.asarray(getattr(a, "data", a), dtype=np.float64)
    n, num_features = data.shape
    if n < params.k or num_features < params.k:
        raise ValueError("need at least k individuals and k features")
    ahat = linalg.rank_k_approximation(data, params.k)
    sweep = params.gamma_sweep_length
    if sweep is None:
        sweep = 2 * max(1, math.ceil(math.log2(num_features)))
    d2 = kernels.pairwise_sq_dists(ahat)

    candidates = []
    for j in range(1, sweep + 1):
        gamma_j = num_features * 2.0**-j
        candidates.append(
            candidate_partition(ahat, gamma_j, params.k, params.ball_factor, dists=d2)
        )
    best = int(np.argmin([c.score for c in candidates]))
    chosen = candidates[best]
    labels = np.empty(n, dtype=np.int64)
    for i, s in enumerate(chosen.sets):
        labels[s] = i
    return PartitionResult(labels, chosen.gamma_j, chosen.score, candidates)


def _best_overlap(confusion: np.ndarray) -> int:
    """Max over bijections of the trace-like overlap sum."""
    k = confusion.shape[0]
    if k <= 6:
        return max(
            int(sum(confusion[i, p[i]] for i in range(k)))
            for p in permutations(range(k))
        )
    # exact assignment via subset DP over label columns
    full = 1 << k
    dp = np.full(full, -1, dtype=np.int64)
    dp[0] = 0
    for mask in range(full):
        if dp[mask] < 0:
            continue
        row = int(mask).bit_count()
        if row == k:
            continue
        for col in range(k):
            bit = 1 << col
            if mask & bit:
                continue
            nxt = mask | bit
            val = dp[mask] + confusion[row, col]
            if val > dp[nxt]:
                dp[nxt] = val
    return int(dp[full - 1])


def misclassification(labels, truth, k: int) -> Misclassification:
    """Total symmetric difference against the truth, minimized over relabelings.

    raw counts each misplaced individual twice (it leaves one matched set and
    enters another); rate divides raw by n.
    """
    labels = np.asarray(labels, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if labels.shape != truth.shape or labels.ndim != 1:
        raise ValueError("labels and truth must be 1-D and of equal length")
    if labels.min(initial=0) < 0 or labels.max(initial=0) >= k:
        raise ValueError("labels must use values in [0, k)")
    if truth.min(initial=0) < 0 or truth.max(initial=0) >= k:
        raise ValueError("truth must use values in [0, k)")
    n = labels.shape[0]
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (truth, labels), 1)
    best = _best_overlap(confusion)
    raw = 2 * (n - best)
    return Misclassification(int(raw), raw / n)
