"""Command-line entry points: synth, train, eval, gradcheck, ablate.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .checkpoint import save_params
from .config import RunConfig, load_config, synthetic_config
from .dataio import load_dataset, write_dataset
from .errors import (
    CheckpointError,
    ConfigError,
    DataError,
    InputError,
    MomentGraphError,
    TrainingError,
)
from .gradcheck import format_results, run_gradcheck
from .graph import VARIANTS
from .model import MomentModel
from .synth import SyntheticSpec, generate
from .text import Vocabulary
from .train import TrainLog, build_vocab, evaluate, train

USAGE_EXIT = 1
DATA_EXIT = 2
NUMERIC_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _resolve_config(args) -> RunConfig:
    overrides = {
        "seed": getattr(args, "seed", None),
        "variant": getattr(args, "variant", None),
        "iterations": getattr(args, "iterations", None),
        "epochs": getattr(args, "epochs", None),
        "data_dir": getattr(args, "data", None),
        "checkpoint": getattr(args, "checkpoint", None),
        "report": getattr(args, "report", None),
        "target_miou": getattr(args, "target_miou", None),
    }
    if getattr(args, "swap_degenerate", False):
        overrides["swap_degenerate"] = True
    if args.config:
        return load_config(args.config, overrides)
    # without a config file, fall back to the desk-scale synthetic preset
    return synthetic_config(**{k: v for k, v in overrides.items() if v is not None})


def _save_vocab(vocab: Vocabulary, checkpoint_path: str) -> None:
    with open(checkpoint_path + ".vocab.json", "w", encoding="utf-8") as f:
        json.dump(vocab.tokens(), f)


def _load_vocab(checkpoint_path: str) -> Vocabulary:
    path = checkpoint_path + ".vocab.json"
    if not os.path.exists(path):
        raise DataError(f"missing vocabulary file '{path}' next to the checkpoint")
    with open(path, encoding="utf-8") as f:
        tokens = json.load(f)
    return Vocabulary.from_tokens(tokens)


def cmd_synth(args) -> int:
    spec = SyntheticSpec(
        n_samples=args.samples,
        t_range=(args.t_min, args.t_max),
        signal_strength=args.signal,
        noise_std=args.noise,
        seed=args.seed if args.seed is not None else 0,
    )
    samples, cmap = generate(spec)
    write_dataset(samples, cmap, args.out)
    n_videos = len({s.video_id for s in samples})
    print(f"wrote {len(samples)} samples over {n_videos} videos to {args.out}")
    return 0


def cmd_train(args) -> int:
    config = _resolve_config(args)
    train_samples, val_samples, cmap = load_dataset(config.data_dir)
    model, log = train(config, train_samples, val_samples, cmap, verbose=not args.quiet)
    model.save(config.checkpoint)
    _save_vocab(model.vocab, config.checkpoint)
    if config.report:
        log.save(config.report)
    print(f"best val mIoU {log.best_val_miou:.2f} at epoch {log.best_epoch}; checkpoint: {config.checkpoint}")
    return 0


def cmd_eval(args) -> int:
    config = _resolve_config(args)
    train_samples, val_samples, cmap = load_dataset(config.data_dir)
    samples = train_samples if args.split == "train" else val_samples
    vocab = _load_vocab(config.checkpoint)
    model = MomentModel(config, vocab)
    model.load(config.checkpoint)
    prepared = [model.prepare(s, cmap) for s in samples]
    report, rows = evaluate(model, prepared, alphas=config.alphas, swap_degenerate=config.swap_degenerate)
    print(report.table())
    if config.report:
        with open(config.report, "w", encoding="utf-8") as f:
            f.write(report.to_json())
    if args.dump_predictions:
        with open(args.dump_predictions, "w", encoding="utf-8") as f:
            for row in rows:
                f.write(json.dumps(row) + "\n")
    return 0


def cmd_gradcheck(args) -> int:
    results = run_gradcheck(
        variant=args.variant,
        entries_per_block=args.entries,
        seed=args.seed if args.seed is not None else 0,
    )
    print(format_results(results))
    if any(not r.passed for r in results):
        return NUMERIC_EXIT
    return 0


def cmd_ablate(args) -> int:
    config = _resolve_config(args)
    train_samples, val_samples, cmap = load_dataset(config.data_dir)
    rows = []

    def run_one(label: str, **cfg_overrides):
        cfg = synthetic_config(**{**_synth_dict(config), **cfg_overrides})
        model, _ = train(cfg, train_samples, val_samples, cmap)
        prepared_val = [model.prepare(s, cmap) for s in val_samples]
        report, _ = evaluate(model, prepared_val, alphas=config.alphas)
        row = {"name": label, "mIoU": report.miou}
        row.update({f"R@{a:g}": v for a, v in report.recall_at.items()})
        return row

    for n in (0, 1, 2, 3, 4):
        rows.append(run_one(f"N={n}", variant="full", iterations=n))
    for variant in VARIANTS:
        if variant == "full":
            continue
        rows.append(run_one(variant, variant=variant, iterations=config.iterations))

    header = ["name"] + [f"R@{a:g}" for a in config.alphas] + ["mIoU"]
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join([row["name"]] + [f"{row[h]:.2f}" for h in header[1:]]))
    table = "\n".join(lines)
    print(table)
    if config.report:
        with open(config.report, "w", encoding="utf-8") as f:
            f.write(table + "\n")
    return 0


def _synth_dict(config: RunConfig) -> dict:
    keep = ("seed", "epochs", "eval_every", "batch_size", "data_dir", "lr", "weight_decay", "dropout")
    return {k: getattr(config, k) for k in keep}


def build_parser() -> _Parser:
    parser = _Parser(prog="momentgraph", description="Desk-scale language-conditioned moment localization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--samples", type=int, default=250)
    p.add_argument("--t-min", type=int, default=12)
    p.add_argument("--t-max", type=int, default=32)
    p.add_argument("--signal", type=float, default=3.0)
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    for name, fn in (("train", cmd_train), ("eval", cmd_eval), ("ablate", cmd_ablate)):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None)
        p.add_argument("--data", default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--variant", choices=VARIANTS, default=None)
        p.add_argument("--iterations", type=int, default=None)
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--checkpoint", default=None)
        p.add_argument("--report", default=None)
        p.add_argument("--swap-degenerate", action="store_true")
        p.add_argument("--target-miou", type=float, default=None, dest="target_miou")
        if name == "train":
            p.add_argument("--quiet", action="store_true")
        if name == "eval":
            p.add_argument("--split", choices=("train", "val"), default="val")
            p.add_argument("--dump-predictions", default=None)
        p.set_defaults(func=fn)

    p = sub.add_parser("gradcheck", help="finite-difference gradient verification")
    p.add_argument("--variant", choices=VARIANTS, default="full")
    p.add_argument("--entries", type=int, default=8)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    except (DataError, InputError, CheckpointError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (TrainingError, MomentGraphError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERIC_EXIT


if __name__ == "__main__":
    sys.exit(main())
