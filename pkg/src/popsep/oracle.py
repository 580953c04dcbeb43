"""Closed-form analysis of expected matrices and independent baselines.

For a two-population model the expected (noise-free) matrix has constant rows
per population, so its Gram matrix is a 2x2 block-constant matrix whose
eigenstructure is available in closed form from the moment sums

    a = sum mu1_j^2,  b = sum mu1_j mu2_j,  c = sum mu2_j^2.

That closed form serves as an exact oracle for the numeric SVD, feeds the
separation identity

    K * gamma_mu = s1^2 (x1 - y1)^2 + s2^2 (x2 - y2)^2

(where gamma_mu is the divergence of the two mean rows), and anchors the
perturbation checks on sampled matrices. The module also provides two
model-aware baselines: a log-likelihood-ratio classifier and an exhaustive
max-weight balanced cut for tiny n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import calibration, linalg
from .errors import DegenerateSpectrumError
from .popmodel import (
    PopulationModel,
    SampleMatrix,
    normalize,
    random_model,
    sample,
    two_block_model,
)


@dataclass(frozen=True)
class StaticMoments:
    """Moment sums of the two normalized mean rows, plus block sizes."""

    a: float
    b: float
    c: float
    N1: int
    N2: int
    K: int
    mu1: np.ndarray
    mu2: np.ndarray


@dataclass(frozen=True)
class StaticSpectrum:
    """Closed-form eigenstructure of the expected Gram matrix (k = 2).

    The top two left singular vectors of the expected matrix are constant on
    each population block: [x_i, ..., x_i, y_i, ..., y_i] with
    N1 x_i^2 + N2 y_i^2 = 1.
    """

    lambda1: float
    lambda2: float
    s1: float
    s2: float
    x1: float
    y1: float
    x2: float
    y2: float
    gap_h: float  # lambda1 - lambda2
    gap_x: float  # s1 - s2
    c0: float  # |b| sqrt(ac) / (K (a + c))


@dataclass(frozen=True)
class BoundCheck:
    name: str
    value: float
    bound: float
    passed: bool

    @staticmethod
    def of(name: str, value: float, bound: float) -> "BoundCheck":
        return BoundCheck(name, float(value), float(bound), bool(value <= bound))


def expected_matrix(model: PopulationModel, normalized: bool) -> np.ndarray:
    """Entrywise expectation of a sample: constant rows mu_t or p_t per block."""
    rows = (1.0 + model.probs) / 2.0 if normalized else model.probs
    return np.repeat(rows, model.sizes, axis=0).astype(np.float64)


def compute_abc(mu1, mu2, N1: int = 1, N2: int = 1) -> StaticMoments:
    """Moment sums of two mean rows; checks the exact identities they satisfy."""
    mu1 = np.asarray(mu1, dtype=np.float64)
    mu2 = np.asarray(mu2, dtype=np.float64)
    if mu1.shape != mu2.shape or mu1.ndim != 1:
        raise ValueError("mean rows must be 1-D and of equal length")
    a = float(mu1 @ mu1)
    b = float(mu1 @ mu2)
    c = float(mu2 @ mu2)
    scale = max(a, c, 1.0)
    assert a * c >= b * b - 1e-12 * scale * scale
    assert abs(a + c - 2.0 * b - float(np.sum((mu1 - mu2) ** 2))) <= 1e-10 * scale
    return StaticMoments(a, b, c, int(N1), int(N2), mu1.shape[0], mu1, mu2)


def moments_from_model(model: PopulationModel, normalized: bool = True) -> StaticMoments:
    if model.k != 2:
        raise ValueError("static moments are defined for two populations")
    rows = (1.0 + model.probs) / 2.0 if normalized else model.probs
    return compute_abc(rows[0], rows[1], int(model.sizes[0]), int(model.sizes[1]))


def _level_pair(lam: float, N1: int, N2: int, a: float, b: float, c: float):
    """Block levels (x, y) of the eigenvector for eigenvalue lam,
    normalized to N1 x^2 + N2 y^2 = 1 with x > 0 (or y > 0 when x = 0)."""
    cand1 = (N2 * b, lam - N1 * a)
    cand2 = (lam - N2 * c, N1 * b)
    x, y = max(cand1, cand2, key=lambda p: p[0] * p[0] + p[1] * p[1])
    nrm = math.sqrt(N1 * x * x + N2 * y * y)
    if nrm == 0.0:
        raise DegenerateSpectrumError("eigenvector direction is undetermined")
    x, y = x / nrm, y / nrm
    if x < 0.0 or (x == 0.0 and y < 0.0):
        x, y = -x, -y
    return x, y


def static_spectrum(m: StaticMoments) -> StaticSpectrum:
    """Closed-form top-two eigenpairs of the expected Gram matrix.

    lambda_{1,2} = (N1 a + N2 c +- sqrt((N1 a - N2 c)^2 + 4 N1 N2 b^2)) / 2,
    with lambda1 + lambda2 = N1 a + N2 c and
    lambda1 lambda2 = N1 N2 (a c - b^2).
    """
    N1, N2, a, b, c = m.N1, m.N2, m.a, m.b, m.c
    trace = N1 * a + N2 * c
    disc = math.sqrt((N1 * a - N2 * c) ** 2 + 4.0 * N1 * N2 * b * b)
    if disc == 0.0:
        raise DegenerateSpectrumError("lambda1 equals lambda2")
    lam1 = (trace + disc) / 2.0
    lam2 = max((trace - disc) / 2.0, 0.0)
    s1 = math.sqrt(lam1)
    s2 = math.sqrt(lam2)
    x1, y1 = _level_pair(lam1, N1, N2, a, b, c)
    x2, y2 = _level_pair(lam2, N1, N2, a, b, c)
    c0 = abs(b) * math.sqrt(max(a * c, 0.0)) / (m.K * (a + c)) if a + c > 0 else 0.0
    return StaticSpectrum(lam1, lam2, s1, s2, x1, y1, x2, y2, disc, disc / (s1 + s2), c0)


def verify_separation_identity(m: StaticMoments, s: StaticSpectrum, gamma: float) -> float:
    """Relative residual of K*gamma = s1^2 (x1-y1)^2 + s2^2 (x2-y2)^2.

    gamma must be the divergence of the mean rows the moments were built from
    (i.e. mean((mu1 - mu2)^2)); for gamma = 0 both sides vanish and the
    residual is 0 by convention.
    """
    lhs = m.K * gamma
    rhs = s.s1**2 * (s.x1 - s.y1) ** 2 + s.s2**2 * (s.x2 - s.y2) ** 2
    if lhs == 0.0:
        return 0.0
    return abs(lhs - rhs) / lhs


def static_left_vectors(m: StaticMoments, s: StaticSpectrum) -> np.ndarray:
    """(n, 2) matrix of the block-constant top-two left singular vectors."""
    u1 = np.concatenate([np.full(m.N1, s.x1), np.full(m.N2, s.y1)])
    u2 = np.concatenate([np.full(m.N1, s.x2), np.full(m.N2, s.y2)])
    return np.stack([u1, u2], axis=1)


def _aligned_distance(u: np.ndarray, ubar: np.ndarray) -> float:
    """||u - ubar|| after choosing the sign of u minimizing the distance."""
    return min(
        float(np.linalg.norm(u - ubar)),
        float(np.linalg.norm(u + ubar)),
    )


def verify_static_properties(model: PopulationModel) -> list[BoundCheck]:
    """Exact closed-form properties of one normalized two-population model.

    Covers the spectral-gap and top-singular-value envelopes, the sign
    pattern and magnitude bounds of the block levels, the eigenvalue sum and
    product identities, and the separation identity.
    """
    m = moments_from_model(model)
    s = static_spectrum(m)
    half_n = (m.N1 + m.N2) / 2.0
    nk = half_n * m.K
    slack = 1e-8
    checks = [
        BoundCheck.of("gap_lower", 0.8 * s.c0 * math.sqrt(2.0 * nk), s.gap_x + slack),
        BoundCheck.of("gap_upper", s.gap_x, math.sqrt(2.0 * nk) + slack),
        BoundCheck.of("s1_lower", math.sqrt(nk / 4.0), s.s1 + slack),
        BoundCheck.of("s1_upper", s.s1, math.sqrt(2.0 * nk) + slack),
        BoundCheck.of(
            "eig_sum_identity",
            abs(s.lambda1 + s.lambda2 - (m.N1 * m.a + m.N2 * m.c)),
            1e-8 * max(s.lambda1, 1.0),
        ),
        BoundCheck.of(
            "eig_product_identity",
            abs(s.lambda1 * s.lambda2 - m.N1 * m.N2 * (m.a * m.c - m.b**2)),
            1e-8 * max(s.lambda1**2, 1.0),
        ),
    ]
    if m.b > 0:
        checks.append(BoundCheck.of("u1_same_sign", 0.0 if s.x1 * s.y1 > 0 else 1.0, 0.0))
        checks.append(BoundCheck.of("u2_opposite_sign", 0.0 if s.x2 * s.y2 < 0 else 1.0, 0.0))
    if m.b != 0:
        ratio = abs(s.x2) / abs(s.y2)
        checks.append(BoundCheck.of("u2_ratio_upper", ratio, 2.0 * m.N2 / m.N1 + slack))
        checks.append(BoundCheck.of("u2_ratio_lower", m.N2 / (2.0 * m.N1), ratio + slack))
    n = m.N1 + m.N2
    w1, w2 = m.N1 / n, m.N2 / n
    c_max = (math.sqrt(1.0 / w1) + math.sqrt(1.0 / w2)) ** 2
    c_xmin = w2 / (4.0 * w1**2 + w1 * w2)
    c_ymin = w1 / (4.0 * w2**2 + w1 * w2)
    checks.append(BoundCheck.of("u2_split_upper", (s.x2 - s.y2) ** 2, c_max / n + slack))
    checks.append(BoundCheck.of("u2_x_lower", c_xmin / n, s.x2**2 + slack))
    checks.append(BoundCheck.of("u2_y_lower", c_ymin / n, s.y2**2 + slack))
    gamma_mu = float(np.mean((m.mu1 - m.mu2) ** 2))
    checks.append(
        BoundCheck.of("separation_identity", verify_separation_identity(m, s, gamma_mu), 1e-8)
    )
    return checks


def verify_perturbation_bounds(x: SampleMatrix, model: PopulationModel) -> list[BoundCheck]:
    """Perturbation checks of one normalized sample against its expected matrix.

    Asserts the eigenvalue stability bound |s_i(X) - s_i(EX)| <= ||X - EX||
    for i = 1..3 and the sin-theta style vector bound
    ||u_i - ubar_i|| <= 4 ||X - EX|| / gap(i) with gap(1) = s1 - s2 and
    gap(2) = min(s1 - s2, s2), plus the calibrated noise-norm ratio
    ||X - EX|| / sqrt(K).
    """
    if not x.normalized:
        raise ValueError("perturbation checks need a normalized sample")
    if model.k != 2:
        raise ValueError("perturbation checks are defined for two populations")
    data = np.asarray(x.data, dtype=np.float64)
    static = expected_matrix(model, normalized=True)
    if static.shape != data.shape:
        raise ValueError("sample shape does not match the model")
    noise = data - static
    s1e = linalg.operator_norm(noise)
    m = moments_from_model(model)
    s = static_spectrum(m)
    ubars = static_left_vectors(m, s)
    kmax = min(3, min(data.shape))
    summary = linalg.top_k_singular_triplets(data, kmax)
    sig = summary.sigmas
    slack = 1e-8

    checks = [
        BoundCheck.of("weyl_s1", abs(sig[0] - s.s1), s1e + slack),
        BoundCheck.of("weyl_s2", abs(sig[1] - s.s2), s1e + slack),
    ]
    if kmax >= 3:
        checks.append(BoundCheck.of("weyl_s3", sig[2], s1e + slack))
    gap1 = s.gap_x
    gap2 = min(s.gap_x, s.s2)
    d1 = _aligned_distance(summary.triplets[0].left, ubars[:, 0])
    checks.append(BoundCheck.of("sin_theta_u1", d1, 4.0 * s1e / gap1 + slack))
    if gap2 > 0:
        d2 = _aligned_distance(summary.triplets[1].left, ubars[:, 1])
        checks.append(BoundCheck.of("sin_theta_u2", d2, 4.0 * s1e / gap2 + slack))
    checks.append(
        BoundCheck.of(
            "noise_opnorm_ratio",
            s1e / math.sqrt(data.shape[1]),
            calibration.NOISE_OPNORM_RATIO_MAX,
        )
    )
    return checks


def run_verification(
    seed: int = 0, model_draws: int = 50, noise_draws: int = 10
) -> dict:
    """Full verification sweep as a JSON-friendly report.

    Checks the closed-form properties on `model_draws` random normalized
    models and the perturbation bounds on `noise_draws` sampled instances of
    a moderately separated two-block model.
    """
    checks: list[BoundCheck] = []
    for i in range(model_draws):
        for c in verify_static_properties(random_model(seed=seed + i)):
            checks.append(
                BoundCheck(f"model{i:03d}/{c.name}", c.value, c.bound, c.passed)
            )
    noise_model = two_block_model(0.2, 0.02, 2000, 200)
    for i in range(noise_draws):
        drawn = normalize(sample(noise_model, seed=seed + 100_000 + i))
        for c in verify_perturbation_bounds(drawn, noise_model):
            checks.append(
                BoundCheck(f"sample{i:03d}/{c.name}", c.value, c.bound, c.passed)
            )
    return {
        "seed": seed,
        "model_draws": model_draws,
        "noise_draws": noise_draws,
        "all_pass": all(c.passed for c in checks),
        "checks": [
            {"name": c.name, "value": c.value, "bound": c.bound, "pass": c.passed}
            for c in checks
        ],
    }


def oracle_classifier(model: PopulationModel, s: SampleMatrix) -> np.ndarray:
    """Log-likelihood-ratio labels using the true probability rows (k = 2).

    Individual i gets label 0 when the ratio favors population 0 or is a tie.
    """
    if model.k != 2:
        raise ValueError("the likelihood oracle handles two populations")
    if s.normalized:
        raise ValueError("the likelihood oracle needs raw bits")
    bits = np.asarray(s.data, dtype=np.float64)
    p = np.clip(model.probs, 1e-12, 1.0 - 1e-12)
    w_one = np.log(p[0] / p[1])
    w_zero = np.log((1.0 - p[0]) / (1.0 - p[1]))
    llr = bits @ (w_one - w_zero) + w_zero.sum()
    return np.where(llr >= 0.0, 0, 1).astype(np.int64)


def max_weight_balanced_cut(s: SampleMatrix) -> np.ndarray:
    """Exhaustive max-weight balanced bipartition for n <= 16 (n even).

    Edge weights are Hamming distances between raw bit rows; returns 0/1
    labels with individual 0 fixed to side 0. Ties resolve to the first
    maximum in lexicographic enumeration order.
    """
    if s.normalized:
        raise ValueError("the balanced-cut oracle needs raw bits")
    n = s.n
    if n % 2 != 0:
        raise ValueError("n must be even")
    if n > 16:
        raise ValueError("exhaustive balanced cut is limited to n <= 16")
    bits = np.asarray(s.data, dtype=np.uint8)
    ham = (bits[:, None, :] != bits[None, :, :]).sum(axis=2).astype(np.int64)
    rest = range(1, n)
    best_weight = -1
    best_side = None
    for side1 in combinations(rest, n // 2):
        side1 = np.array(side1, dtype=np.int64)
        mask = np.zeros(n, dtype=bool)
        mask[side1] = True
        weight = int(ham[np.ix_(side1, np.flatnonzero(~mask))].sum())
        if weight > best_weight:
            best_weight = weight
            best_side = mask
    labels = np.zeros(n, dtype=np.int64)
    labels[best_side] = 1
    return labels
