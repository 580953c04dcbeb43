"""Command-line interface: gen / classify / partition / verify / experiment."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import harness
from .classify import ClassifyParams, classify, default_params
from .errors import PopsepError
from .oracle import run_verification
from .partition import PartitionParams, misclassification, partition
from .popmodel import divergence, sample


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # invalid flags count as invalid input (exit 1)
        self.print_usage(sys.stderr)
        raise ValueError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="popsep", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="draw a sample CSV from a model file")
    g.add_argument("--config", required=True, help="model JSON")
    g.add_argument("--out", required=True, help="sample CSV path")
    g.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("classify", help="two-population spectral classifier")
    c.add_argument("--in", dest="infile", required=True, help="raw sample CSV")
    c.add_argument("--out", required=True, help="labels CSV path")
    c.add_argument("--gamma", type=float, required=True, help="divergence input")
    c.add_argument("--omega-min", type=float, default=0.5)
    c.add_argument("--rounds", type=int, default=None)
    c.add_argument("--block-size", type=int, default=None)
    c.add_argument("--seed", type=int, default=0)

    q = sub.add_parser("partition", help="rank-k ball-cover partitioning")
    q.add_argument("--in", dest="infile", required=True, help="raw sample CSV")
    q.add_argument("--out", required=True, help="labels CSV path")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)

    v = sub.add_parser("verify", help="closed-form and perturbation bound suite")
    v.add_argument("--out", required=True, help="JSON report path")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--models", type=int, default=50)
    v.add_argument("--samples", type=int, default=10)

    e = sub.add_parser("experiment", help="grid sweep with CSV/SVG outputs")
    e.add_argument("--config", required=True, help="experiment config JSON")
    e.add_argument("--out", required=True, help="output directory")
    e.add_argument("--trials", type=int, default=None, help="override config trials")
    e.add_argument("--seed", type=int, default=None, help="override base seed")
    return p


def _write_labels(path, labels, success=None):
    lines = ["index,label"]
    lines += [f"{i},{int(v)}" for i, v in enumerate(labels)]
    Path(path).write_text("\n".join(lines) + "\n")
    if success is not None:
        print(f"success_rate={success}")


def _cmd_gen(args) -> int:
    model = harness.load_model_file(args.config)
    harness.write_sample_csv(sample(model, args.seed), args.out)
    return 0


def _cmd_classify(args) -> int:
    s = harness.read_sample_csv(args.infile)
    if args.rounds is None and args.block_size is None:
        params = default_params(
            s.n, s.num_features, args.gamma, args.omega_min, args.seed
        )
    else:
        import math

        rounds = args.rounds or max(1, math.ceil(math.log2(max(s.n, 2))))
        block = args.block_size or s.num_features // rounds
        params = ClassifyParams(
            gamma=args.gamma,
            block_size=block,
            rounds=rounds,
            omega_min=args.omega_min,
            seed=args.seed,
        )
    labels = classify(s, params)
    success = None
    if s.labels is not None:
        raw = misclassification(labels, s.labels, 2).raw
        success = harness.success_from_misclassification(raw, s.n)
    _write_labels(args.out, labels, success)
    return 0


def _cmd_partition(args) -> int:
    s = harness.read_sample_csv(args.infile)
    result = partition(s, PartitionParams(k=args.k, seed=args.seed))
    success = None
    if s.labels is not None:
        k_eff = max(args.k, int(s.labels.max()) + 1)
        raw = misclassification(result.labels, s.labels, k_eff).raw
        success = harness.success_from_misclassification(raw, s.n)
    _write_labels(args.out, result.labels, success)
    return 0


def _cmd_verify(args) -> int:
    report = run_verification(args.seed, args.models, args.samples)
    Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print("verify: " + ("all bounds hold" if report["all_pass"] else "VIOLATIONS found"))
    return 0 if report["all_pass"] else 2


def _cmd_experiment(args) -> int:
    with open(args.config) as fh:
        doc = json.load(fh)
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.seed is not None:
        doc["base_seed"] = args.seed
    cfg = harness.ExperimentConfig.from_dict(doc)
    paths = harness.run_experiment_to_dir(cfg, args.out)
    for name, p in paths.items():
        print(f"{name}: {p}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "gen": _cmd_gen,
            "classify": _cmd_classify,
            "partition": _cmd_partition,
            "verify": _cmd_verify,
            "experiment": _cmd_experiment,
        }[args.command]
        return handler(args)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PopsepError as exc:
        print(f"internal failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
