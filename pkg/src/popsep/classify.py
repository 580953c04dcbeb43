"""Two-population spectral classifier with a majority vote over feature blocks.

One round normalizes the bits of a feature block, takes the top two left
singular vectors of the block matrix, and splits individuals either by the
sign of u2 (when s2 exceeds a threshold T, meaning the second direction
carries the class signal) or by comparing u1 entries against the mixture mean
M (the average of u1's entries). Labels are symbolic per round, so the final
vote first aligns every round to round 0 by the swap that maximizes
agreement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import DegenerateSpectrumError
from .linalg import top_k_singular_triplets
from .popmodel import SampleMatrix, normalize, split_feature_blocks

#: T = coeff * N * sqrt(omega_min * gamma) with N = n / 2.
THRESHOLD_COEFF = 15.0 * math.sqrt(3.0) / 32.0


@dataclass
class ClassifyParams:
    gamma: float
    block_size: int
    rounds: int
    omega_min: float = 0.5
    error_factor_target: float = 0.1
    seed: int = 0
    threshold_coeff: float = THRESHOLD_COEFF  # override point for T's constant

    def __post_init__(self):
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")
        if not 0.0 < self.omega_min <= 0.5:
            raise ValueError("omega_min must lie in (0, 1/2]")
        if self.rounds < 1 or self.block_size < 2:
            raise ValueError("need rounds >= 1 and block_size >= 2")
        if not 0.0 < self.error_factor_target < 0.5:
            raise ValueError("error_factor_target must lie in (0, 1/2)")


@dataclass
class RoundOutcome:
    labels: np.ndarray
    used_vector: str  # "u1" or "u2"
    s1: float
    s2: float
    threshold: float


def default_params(
    n: int, total_features: int, gamma: float, omega_min: float = 0.5, seed: int = 0
) -> ClassifyParams:
    """Defaults: rounds = ceil(log2 n); block_size the smallest multiple of 100
    covering 2 n ln n, capped so all rounds fit into the available features."""
    rounds = max(1, math.ceil(math.log2(max(n, 2))))
    want = max(100, 100 * math.ceil(2.0 * n * math.log(max(n, 2)) / 100.0))
    block = min(want, total_features // rounds)
    if block < 2:
        raise ValueError("not enough features for even one block per round")
    return ClassifyParams(
        gamma=gamma, block_size=block, rounds=rounds, omega_min=omega_min, seed=seed
    )


def threshold_T(
    half_n: float, omega_min: float, gamma: float, coeff: float = THRESHOLD_COEFF
) -> float:
    """Decision threshold for s2: coeff * N * sqrt(omega_min * gamma)."""
    if half_n < 0.5 or not 0.0 < omega_min <= 0.5 or gamma <= 0:
        raise ValueError("need N >= 1, omega_min in (0, 1/2], gamma > 0")
    return coeff * half_n * math.sqrt(omega_min * gamma)


def _labels_from_sign(u2: np.ndarray) -> np.ndarray:
    """0 where u2 < 0, 1 where u2 >= 0."""
    return (u2 >= 0.0).astype(np.int64)


def _labels_from_mean(u1: np.ndarray) -> np.ndarray:
    """0 below the mixture mean M = mean(u1), 1 at or above it."""
    return (u1 >= float(np.mean(u1))).astype(np.int64)


def classify_block(x: SampleMatrix, params: ClassifyParams) -> RoundOutcome:
    """One classification round on a normalized feature block."""
    if not x.normalized:
        raise ValueError("classify_block expects a normalized sample")
    n = x.n
    if n < 2 or x.num_features < 2:
        raise ValueError("need at least two individuals and two features")
    summary = top_k_singular_triplets(np.asarray(x.data, dtype=np.float64), 2)
    s1 = summary.triplets[0].sigma
    s2 = summary.triplets[1].sigma
    if s1 <= 1e-12:
        raise DegenerateSpectrumError("top singular value vanishes")
    t = threshold_T(n / 2.0, params.omega_min, params.gamma, params.threshold_coeff)
    if s2 > t:
        labels = _labels_from_sign(summary.triplets[1].left)
        used = "u2"
    else:
        labels = _labels_from_mean(summary.triplets[0].left)
        used = "u1"
    return RoundOutcome(labels, used, s1, s2, t)


def _round_labels(r) -> np.ndarray:
    return np.asarray(getattr(r, "labels", r), dtype=np.int64)


def majority_vote(rounds) -> np.ndarray:
    """Per-individual majority after aligning every round to round 0.

    Each round's labels are defined only up to swap, so rounds are flipped
    when that increases agreement with round 0 (ties keep the original
    orientation). Vote ties go to round 0's label.
    """
    if len(rounds) == 0:
        raise ValueError("majority_vote needs at least one round")
    base = _round_labels(rounds[0])
    n = base.shape[0]
    aligned = [base]
    for r in rounds[1:]:
        lab = _round_labels(r)
        if lab.shape[0] != n:
            raise ValueError("all rounds must label the same individuals")
        if np.sum(lab == base) < np.sum((1 - lab) == base):
            lab = 1 - lab
        aligned.append(lab)
    votes = np.sum(aligned, axis=0)
    r = len(aligned)
    out = np.where(votes * 2 > r, 1, 0)
    ties = votes * 2 == r
    out[ties] = base[ties]
    return out.astype(np.int64)


def classify_rounds(
    s: SampleMatrix, params: ClassifyParams
) -> tuple[np.ndarray, list[RoundOutcome]]:
    """Full pipeline returning the voted labels plus per-round outcomes."""
    if s.normalized:
        raise ValueError("classify expects raw bits")
    blocks = split_feature_blocks(
        s.num_features, params.block_size, params.rounds, params.seed
    )
    x = normalize(s)
    outcomes = []
    for idx in blocks.blocks:
        sub = SampleMatrix(x.data[:, idx], labels=x.labels, normalized=True)
        outcomes.append(classify_block(sub, params))
    return majority_vote(outcomes), outcomes


def classify(s: SampleMatrix, params: ClassifyParams) -> np.ndarray:
    """Normalize, split features into disjoint random blocks, run one round
    per block, and majority-vote the rounds. Deterministic given params.seed."""
    return classify_rounds(s, params)[0]
