"""Experiment runner: parameter sweeps, success-rate aggregation, CSV/SVG output.

A run sweeps a grid of (K, N) points for a balanced two-population model. Each
trial draws a fresh sample from a per-trial substream seed and scores every
requested method against the ground truth (success rate = fraction of
individuals matched under the best relabeling). Outputs are byte-reproducible
for a fixed config: trial timing is only recorded when `timing` is enabled,
since real wall times would break that.

Methods:
  classify             threshold-driven vote over disjoint feature blocks
  classify-best-vector better of the u1/u2 splits on one block, scored against
                       the truth (an oracle-assisted diagnostic, not the
                       honest classifier)
  partition            rank-k ball-cover partitioning (k = 2 here)
  oracle               log-likelihood ratio with the true probability rows
  maxcut               exhaustive balanced cut (tiny n only)
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng
from .classify import ClassifyParams, classify_rounds, _labels_from_mean, _labels_from_sign
from .linalg import top_k_singular_triplets
from .oracle import max_weight_balanced_cut, oracle_classifier
from .partition import PartitionParams, misclassification, partition
from .popmodel import (
    PopulationModel,
    SampleMatrix,
    divergence,
    normalize,
    sample,
    split_feature_blocks,
    two_block_model,
)

VALID_METHODS = ("classify", "classify-best-vector", "partition", "oracle", "maxcut")

CSV_COLUMNS = [
    "method",
    "alpha",
    "gamma",
    "K",
    "N",
    "trial",
    "seed",
    "success_rate",
    "raw_misclassification",
    "s1",
    "s2",
    "used_vector",
    "wall_time",
]


@dataclass
class ExperimentConfig:
    alpha: float
    K_values: list[int]
    N_values: list[int]
    methods: list[str]
    epsilon: float | None = None  # default 0.1 * alpha
    trials: int = 20
    base_seed: int = 0
    rounds: int | None = None  # classify only; default ceil(log2 n)
    omega_min: float = 0.5
    timing: bool = False

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.K_values or not self.N_values:
            raise ValueError("K and N grids must be non-empty")
        if not self.methods:
            raise ValueError("need at least one method")
        for m in self.methods:
            if m not in VALID_METHODS:
                raise ValueError(f"unknown method {m!r} (valid: {VALID_METHODS})")
        if self.epsilon is None:
            self.epsilon = 0.1 * self.alpha

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        known = {
            "alpha",
            "epsilon",
            "K",
            "N",
            "methods",
            "trials",
            "base_seed",
            "rounds",
            "omega_min",
            "timing",
        }
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields: {sorted(extra)}")
        return ExperimentConfig(
            alpha=d["alpha"],
            epsilon=d.get("epsilon"),
            K_values=list(d["K"]),
            N_values=list(d["N"]),
            methods=list(d["methods"]),
            trials=int(d.get("trials", 20)),
            base_seed=int(d.get("base_seed", 0)),
            rounds=d.get("rounds"),
            omega_min=float(d.get("omega_min", 0.5)),
            timing=bool(d.get("timing", False)),
        )


@dataclass
class ExperimentRecord:
    method: str
    alpha: float
    gamma: float
    K: int
    N: int
    trial: int
    seed: int
    success_rate: float | None
    raw_misclassification: int | None
    s1: float | None
    s2: float | None
    used_vector: str
    wall_time: float

    def to_row(self) -> list[str]:
        def fmt(v):
            return "" if v is None else str(v)

        return [
            self.method,
            str(self.alpha),
            str(self.gamma),
            str(self.K),
            str(self.N),
            str(self.trial),
            str(self.seed),
            fmt(self.success_rate),
            fmt(self.raw_misclassification),
            fmt(self.s1),
            fmt(self.s2),
            self.used_vector,
            str(self.wall_time),
        ]


@dataclass(frozen=True)
class SummaryRow:
    method: str
    K: int
    N: int
    gamma: float
    trials: int
    mean_success: float
    std_success: float


def success_from_misclassification(raw: int, n: int) -> float:
    """raw counts each misplaced individual twice, so success = 1 - raw/(2n)."""
    return 1.0 - raw / (2.0 * n)


def _best_vector_labels(x: SampleMatrix, truth: np.ndarray):
    """Try both u1/M and u2/sign splits; keep whichever matches truth better."""
    summary = top_k_singular_triplets(np.asarray(x.data, dtype=np.float64), 2)
    out = []
    for used, labels in (
        ("u1", _labels_from_mean(summary.triplets[0].left)),
        ("u2", _labels_from_sign(summary.triplets[1].left)),
    ):
        raw = misclassification(labels, truth, 2).raw
        out.append((raw, used, labels))
    out.sort(key=lambda t: (t[0], t[1]))
    raw, used, labels = out[0]
    return labels, used, summary.triplets[0].sigma, summary.triplets[1].sigma


def _run_method(
    method: str,
    model: PopulationModel,
    s: SampleMatrix,
    cfg: ExperimentConfig,
    block_size: int,
    rounds: int,
    trial_seed: int,
):
    """Returns (labels, s1, s2, used_vector)."""
    truth = s.labels
    if method == "classify":
        params = ClassifyParams(
            gamma=divergence(model),
            block_size=block_size,
            rounds=rounds,
            omega_min=cfg.omega_min,
            seed=rng.derive(trial_seed, 1),
        )
        labels, outcomes = classify_rounds(s, params)
        first = outcomes[0]
        return labels, first.s1, first.s2, first.used_vector
    if method == "classify-best-vector":
        idx = split_feature_blocks(
            s.num_features, block_size, 1, rng.derive(trial_seed, 2)
        ).blocks[0]
        sub = normalize(SampleMatrix(s.data[:, idx], labels=s.labels, normalized=False))
        labels, used, s1, s2 = _best_vector_labels(sub, truth)
        return labels, s1, s2, used
    if method == "partition":
        result = partition(s, PartitionParams(k=2))
        return result.labels, None, None, ""
    if method == "oracle":
        return oracle_classifier(model, s), None, None, ""
    if method == "maxcut":
        return max_weight_balanced_cut(s), None, None, ""
    raise ValueError(f"unknown method {method!r}")


def run_experiment(cfg: ExperimentConfig) -> list[ExperimentRecord]:
    """Run the full grid. Per-trial failures become rows with empty scores."""
    records = []
    needs_blocks = "classify" in cfg.methods
    for big_k in cfg.K_values:
        for size in cfg.N_values:
            n = 2 * size
            rounds = cfg.rounds or max(1, math.ceil(math.log2(max(n, 2))))
            total_features = big_k * rounds if needs_blocks else big_k
            model = two_block_model(cfg.alpha, cfg.epsilon, total_features, size)
            gamma = divergence(model)
            for trial in range(cfg.trials):
                trial_seed = rng.derive(cfg.base_seed, big_k, size, trial)
                s = sample(model, trial_seed)
                for method in cfg.methods:
                    start = time.perf_counter() if cfg.timing else 0.0
                    try:
                        labels, s1, s2, used = _run_method(
                            method, model, s, cfg, big_k, rounds, trial_seed
                        )
                        raw = misclassification(labels, s.labels, 2).raw
                        success = success_from_misclassification(raw, n)
                    except Exception:
                        records.append(
                            ExperimentRecord(
                                method, cfg.alpha, gamma, big_k, size, trial,
                                trial_seed, None, None, None, None, "error", 0.0,
                            )
                        )
                        continue
                    elapsed = time.perf_counter() - start if cfg.timing else 0.0
                    records.append(
                        ExperimentRecord(
                            method, cfg.alpha, gamma, big_k, size, trial, trial_seed,
                            success, raw, s1, s2, used, elapsed,
                        )
                    )
    return records


def summarize(records: list[ExperimentRecord]) -> list[SummaryRow]:
    """Per-(method, K, N) mean/stddev of success rate, stably ordered."""
    if not records:
        raise ValueError("no records to summarize")
    groups: dict[tuple, list[ExperimentRecord]] = {}
    for r in records:
        groups.setdefault((r.method, r.K, r.N), []).append(r)
    rows = []
    for (method, big_k, size), recs in sorted(groups.items()):
        vals = [r.success_rate for r in recs if r.success_rate is not None]
        if not vals:
            continue
        mean = float(np.mean(vals))
        std = float(np.std(vals))
        rows.append(SummaryRow(method, big_k, size, recs[0].gamma, len(vals), mean, std))
    if not rows:
        raise ValueError("all records failed; nothing to summarize")
    return rows


def write_records_csv(records: list[ExperimentRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in records:
            w.writerow(r.to_row())


def write_summary_csv(rows: list[SummaryRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "K", "N", "gamma", "trials", "mean_success", "std_success"])
        for r in rows:
            w.writerow(
                [r.method, r.K, r.N, r.gamma, r.trials, r.mean_success, r.std_success]
            )


# ---------------------------------------------------------------------------
# plotting (hand-written SVG so byte-identical output is under our control)
# ---------------------------------------------------------------------------

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
_W, _H = 720, 460
_ML, _MR, _MT, _MB = 70, 30, 30, 55


def _xmap(x, lo, hi):
    span = hi - lo if hi > lo else 1.0
    return _ML + (x - lo) / span * (_W - _ML - _MR)


def _ymap(y):
    return _MT + (1.0 - y) * (_H - _MT - _MB)


def emit_plot(summary: list[SummaryRow], path) -> tuple[Path, Path]:
    """Success-rate curves (one per method/K pair) as SVG plus a CSV of the
    plotted points. Dashed curves mark the oracle method; a vertical line per K
    marks the sample size where N * K = 1 / gamma^2."""
    if not summary:
        raise ValueError("cannot plot an empty summary")
    path = Path(path)
    csv_path = path.with_suffix(".csv")

    xs = sorted({r.N for r in summary})
    lo, hi = min(xs), max(xs)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        # axes
        f'<line x1="{_ML}" y1="{_ymap(0.0):.2f}" x2="{_W - _MR}" y2="{_ymap(0.0):.2f}" '
        'stroke="black" stroke-width="1"/>',
        f'<line x1="{_ML}" y1="{_ymap(0.0):.2f}" x2="{_ML}" y2="{_ymap(1.0):.2f}" '
        'stroke="black" stroke-width="1"/>',
    ]
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = _ymap(tick)
        parts.append(
            f'<text x="{_ML - 8}" y="{y + 4:.2f}" font-size="12" text-anchor="end">'
            f"{tick:g}</text>"
        )
        parts.append(
            f'<line x1="{_ML - 4}" y1="{y:.2f}" x2="{_ML}" y2="{y:.2f}" stroke="black"/>'
        )
    for x in xs:
        px = _xmap(x, lo, hi)
        parts.append(
            f'<line x1="{px:.2f}" y1="{_ymap(0.0):.2f}" x2="{px:.2f}" '
            f'y2="{_ymap(0.0) + 4:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{_ymap(0.0) + 18:.2f}" font-size="12" '
            f'text-anchor="middle">{x}</text>'
        )
    parts.append(
        f'<text x="{(_ML + _W - _MR) / 2:.2f}" y="{_H - 12}" font-size="13" '
        'text-anchor="middle">N per population</text>'
    )
    parts.append(
        f'<text x="18" y="{(_MT + _H - _MB) / 2:.2f}" font-size="13" '
        f'text-anchor="middle" transform="rotate(-90 18 {(_MT + _H - _MB) / 2:.2f})">'
        "success rate</text>"
    )

    # one vertical marker per K where N*K = 1/gamma^2
    seen_thresholds = set()
    for r in summary:
        key = r.K
        if key in seen_thresholds or r.gamma <= 0:
            continue
        seen_thresholds.add(key)
        n_star = 1.0 / (r.gamma**2 * r.K)
        if lo <= n_star <= hi:
            px = _xmap(n_star, lo, hi)
            parts.append(
                f'<line x1="{px:.2f}" y1="{_ymap(1.0):.2f}" x2="{px:.2f}" '
                f'y2="{_ymap(0.0):.2f}" stroke="#888888" stroke-width="1" '
                'stroke-dasharray="2,4"/>'
            )

    curves: dict[tuple, list[SummaryRow]] = {}
    for r in summary:
        curves.setdefault((r.method, r.K), []).append(r)
    for ci, ((method, big_k), rows) in enumerate(sorted(curves.items())):
        rows = sorted(rows, key=lambda r: r.N)
        color = _PALETTE[ci % len(_PALETTE)]
        pts = " ".join(
            f"{_xmap(r.N, lo, hi):.2f},{_ymap(min(max(r.mean_success, 0.0), 1.0)):.2f}"
            for r in rows
        )
        dash = ' stroke-dasharray="6,3"' if method == "oracle" else ""
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} '
            f'points="{pts}"/>'
        )
        ly = _MT + 16 + 16 * ci
        parts.append(
            f'<line x1="{_W - _MR - 150}" y1="{ly - 4}" x2="{_W - _MR - 120}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="1.5"{dash}/>'
        )
        parts.append(
            f'<text x="{_W - _MR - 114}" y="{ly}" font-size="12">'
            f"{method} K={big_k}</text>"
        )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")

    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "K", "N", "mean_success", "std_success", "trials"])
        for r in sorted(summary, key=lambda r: (r.method, r.K, r.N)):
            w.writerow([r.method, r.K, r.N, r.mean_success, r.std_success, r.trials])
    return path, csv_path


def run_experiment_to_dir(cfg: ExperimentConfig, outdir) -> dict:
    """records.csv + summary.csv + plot.svg + plot.csv under outdir."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    records = run_experiment(cfg)
    summary = summarize(records)
    write_records_csv(records, outdir / "records.csv")
    write_summary_csv(summary, outdir / "summary.csv")
    emit_plot(summary, outdir / "plot.svg")
    return {
        "records": outdir / "records.csv",
        "summary": outdir / "summary.csv",
        "plot": outdir / "plot.svg",
        "plot_points": outdir / "plot.csv",
    }


# ---------------------------------------------------------------------------
# model / sample file formats
# ---------------------------------------------------------------------------


def load_model_file(path) -> PopulationModel:
    """JSON model: {k, K, probs: k x K array | {alpha, epsilon}, sizes}."""
    with open(path) as fh:
        doc = json.load(fh)
    sizes = np.asarray(doc["sizes"], dtype=np.int64)
    probs = doc["probs"]
    if isinstance(probs, dict):
        alpha = float(probs["alpha"])
        epsilon = float(probs.get("epsilon", 0.1 * alpha))
        gen = two_block_model(alpha, epsilon, int(doc["K"]), int(sizes[0]))
        model = PopulationModel(gen.probs, sizes)
    else:
        model = PopulationModel(np.asarray(probs, dtype=np.float64), sizes)
    if "k" in doc and int(doc["k"]) != model.k:
        raise ValueError("declared k does not match the probability rows")
    if "K" in doc and int(doc["K"]) != model.num_features:
        raise ValueError("declared K does not match the probability rows")
    return model


def write_sample_csv(s: SampleMatrix, path) -> None:
    """One row per individual, columns f0..f{K-1}, optional final `label`."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = [f"f{j}" for j in range(s.num_features)]
        if s.labels is not None:
            header.append("label")
        w.writerow(header)
        data = np.asarray(s.data)
        for i in range(s.n):
            row = [str(int(v)) for v in data[i]]
            if s.labels is not None:
                row.append(str(int(s.labels[i])))
            w.writerow(row)


def read_sample_csv(path) -> SampleMatrix:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise ValueError("empty sample file")
        has_label = header[-1] == "label"
        ncols = len(header) - (1 if has_label else 0)
        if ncols < 1:
            raise ValueError("sample file has no feature columns")
        rows, labels = [], []
        for rec in reader:
            if not rec:
                continue
            vals = [int(v) for v in rec[:ncols]]
            if any(v not in (0, 1) for v in vals):
                raise ValueError("sample entries must be 0/1 bits")
            rows.append(vals)
            if has_label:
                labels.append(int(rec[ncols]))
    if not rows:
        raise ValueError("sample file has no rows")
    data = np.array(rows, dtype=np.uint8)
    lab = np.array(labels, dtype=np.int64) if has_label else None
    return SampleMatrix(data, labels=lab, normalized=False)
