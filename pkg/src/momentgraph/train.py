"""Training loop, evaluation pass and the train log."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import GradientTape
from .config import RunConfig
from .dataio import AnnotatedSample
from .errors import TrainingError
from .metrics import EvalReport, Interval, evaluate_pairs, tiou
from .model import MomentModel, PreparedSample
from .optim import Adam
from .text import Vocabulary, tokenize
from .visual import CategoryMap


@dataclass
class TrainLog:
    config: dict
    epochs: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_val_miou: float = float("-inf")

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config,
                "epochs": self.epochs,
                "best_epoch": self.best_epoch,
                "best_val_miou": self.best_val_miou,
            },
            indent=2,
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.to_json())


def build_vocab(samples: list[AnnotatedSample]) -> Vocabulary:
    tokens = []
    for s in samples:
        tokens.extend(tokenize(s.query))
    return Vocabulary.from_tokens(tokens)


def evaluate(
    model: MomentModel,
    prepared: list[PreparedSample],
    alphas=(0.3, 0.5, 0.7, 0.9),
    swap_degenerate: bool = False,
) -> tuple[EvalReport, list[dict]]:
    """Forward + decode on a split; returns the report and per-pair dump rows."""
    pairs = []
    rows = []
    for p in prepared:
        pred = model.predict(p, swap_degenerate=swap_degenerate)
        pred_iv = Interval(pred.start_seconds, pred.end_seconds)
        gt_iv = Interval(p.t_start_s, p.t_end_s)
        pairs.append((pred_iv, gt_iv))
        rows.append(
            {
                "video_id": p.video_id,
                "query": p.query,
                "pred_start_s": pred.start_seconds,
                "pred_end_s": pred.end_seconds,
                "gt_start_s": p.t_start_s,
                "gt_end_s": p.t_end_s,
                "tiou": tiou(pred_iv, gt_iv),
            }
        )
    return evaluate_pairs(pairs, alphas=alphas, swap_degenerate=swap_degenerate), rows


def train(
    config: RunConfig,
    train_samples: list[AnnotatedSample],
    val_samples: list[AnnotatedSample],
    cmap: CategoryMap,
    verbose: bool = False,
) -> tuple[MomentModel, TrainLog]:
    """Mini-batch training with periodic validation and best-mIoU checkpointing.

    Fully deterministic for a fixed config + seed: shuffling and dropout both
    draw from one seeded generator.
    """
    vocab = build_vocab(train_samples)
    model = MomentModel(config, vocab)
    prepared_train = [model.prepare(s, cmap) for s in train_samples]
    prepared_val = [model.prepare(s, cmap) for s in val_samples]
    opt = Adam(
        model.params,
        lr=config.lr,
        weight_decay=config.weight_decay,
        beta1=config.beta1,
        beta2=config.beta2,
    )
    rng = np.random.default_rng(config.seed + 1)
    log = TrainLog(config=config.to_dict())
    best_params = {name: p.data.copy() for name, p in model.params.items()}
    n = len(prepared_train)
    t0 = time.time()

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        epoch_total = epoch_kl = epoch_sp = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            opt.zero_grad()
            with GradientTape():
                parts = [model.loss(prepared_train[i], training=True, rng=rng) for i in batch]
                batch_loss = parts[0][0]
                for total, _, _ in parts[1:]:
                    batch_loss = batch_loss + total
                if np.isnan(batch_loss.data):
                    raise TrainingError(f"NaN loss at epoch {epoch}, step {start // config.batch_size}")
                ad.backward(batch_loss)
            opt.step()
            epoch_total += float(batch_loss.data)
            epoch_kl += sum(float(kl.data) for _, kl, _ in parts)
            epoch_sp += sum(float(sp.data) for _, _, sp in parts)

        entry = {
            "epoch": epoch,
            "total_loss": epoch_total / n,
            "kl_loss": epoch_kl / n,
            "spatial_loss": epoch_sp / n,
            "train_miou": None,
            "val_miou": None,
            "wall_time_s": time.time() - t0,
        }
        target_reached = False
        if epoch % config.eval_every == 0 or epoch == config.epochs:
            train_report, _ = evaluate(model, prepared_train, alphas=config.alphas)
            val_report, _ = evaluate(model, prepared_val, alphas=config.alphas)
            entry["train_miou"] = train_report.miou
            entry["val_miou"] = val_report.miou
            if val_report.miou > log.best_val_miou:
                log.best_val_miou = val_report.miou
                log.best_epoch = epoch
                best_params = {name: p.data.copy() for name, p in model.params.items()}
            if verbose:
                print(
                    f"epoch {epoch:4d}  loss {entry['total_loss']:.4f}  "
                    f"train mIoU {train_report.miou:.2f}  val mIoU {val_report.miou:.2f}"
                )
            target_reached = config.target_miou is not None and val_report.miou >= config.target_miou
        log.epochs.append(entry)
        if target_reached:
            break

    for name, data in best_params.items():
        model.params[name].data = data
    return model, log
