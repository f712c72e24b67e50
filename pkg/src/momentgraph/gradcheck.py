"""Central finite-difference verification of the analytic gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import GradientTape
from .config import RunConfig
from .dataio import AnnotatedSample
from .model import MomentModel
from .text import Vocabulary
from .train import build_vocab
from .visual import ActivityFeatures, CategoryMap, Detection, HUMAN


@dataclass
class BlockResult:
    name: str
    max_rel_err: float
    n_checked: int
    passed: bool


def tiny_instance(variant: str = "full", seed: int = 0, t: int = 4, n_humans: int = 2, n_objects: int = 3):
    """A forced-tiny model and sample for gradient checks."""
    rng = np.random.default_rng(seed)
    config = RunConfig(
        d_w=5,
        d_v=6,
        d_o=6,
        latent=8,
        hidden=4,
        variant=variant,
        iterations=2,
        dropout=0.0,
        smoothing="onehot",
        seed=seed,
        epochs=1,
    )
    t = min(t, 6)
    n_humans = min(n_humans, 2)
    n_objects = min(n_objects, 3)
    detections = []
    for _ in range(t):
        dets = [
            Detection("person", float(rng.uniform(0.5, 1.0)), rng.normal(size=config.d_o))
            for _ in range(n_humans)
        ]
        dets += [
            Detection("cup", float(rng.uniform(0.5, 1.0)), rng.normal(size=config.d_o))
            for _ in range(n_objects)
        ]
        detections.append(dets)
    sample = AnnotatedSample(
        video_id="tiny",
        query="person throw the bag",
        t_start_s=1.0,
        t_end_s=2.5,
        duration_s=float(t),
        features=ActivityFeatures("tiny", rng.normal(size=(t, config.d_v)), 1.0, float(t)),
        detections=detections,
    )
    cmap = CategoryMap({"person": HUMAN})
    model = MomentModel(config, build_vocab([sample]))
    return model, model.prepare(sample, cmap)


def run_gradcheck(
    variant: str = "full",
    entries_per_block: int = 8,
    eps: float = 1e-5,
    tolerance: float = 1e-4,
    seed: int = 0,
    corrupt_block: str | None = None,
) -> list[BlockResult]:
    """Compare analytic gradients against central differences, per block.

    Entries are subsampled deterministically when a block is larger than
    entries_per_block. corrupt_block is a test-only hook that offsets one
    block's analytic gradient so the check must fail there.
    """
    model, prepared = tiny_instance(variant=variant, seed=seed)
    with GradientTape():
        loss, _, _ = model.loss(prepared)
        ad.backward(loss)
    analytic = {
        name: (p.grad.copy() if p.grad is not None else np.zeros_like(p.data))
        for name, p in model.params.items()
    }
    if corrupt_block is not None:
        analytic[corrupt_block] = analytic[corrupt_block] + 1.0

    rng = np.random.default_rng(seed + 99)
    results = []
    for name, p in model.params.items():
        flat = p.data.reshape(-1)
        size = flat.shape[0]
        if size <= entries_per_block:
            indices = np.arange(size)
        else:
            indices = rng.choice(size, size=entries_per_block, replace=False)
        max_err = 0.0
        for idx in indices:
            orig = flat[idx]
            flat[idx] = orig + eps
            lp = float(model.loss(prepared)[0].data)
            flat[idx] = orig - eps
            lm = float(model.loss(prepared)[0].data)
            flat[idx] = orig
            fd = (lp - lm) / (2.0 * eps)
            a = analytic[name].reshape(-1)[idx]
            # the 1e-5 floor absorbs central-difference roundoff
            # (~1e-16 * |loss| / eps) on near-zero gradient entries
            err = abs(a - fd) / (abs(a) + abs(fd) + 1e-5)
            max_err = max(max_err, err)
        results.append(BlockResult(name=name, max_rel_err=max_err, n_checked=len(indices), passed=max_err < tolerance))
    return results


def format_results(results: list[BlockResult]) -> str:
    lines = [f"{'block':40s} {'max rel err':>12s} {'checked':>8s}  status"]
    for r in results:
        lines.append(f"{r.name:40s} {r.max_rel_err:12.3e} {r.n_checked:8d}  {'PASS' if r.passed else 'FAIL'}")
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results)} blocks, {n_fail} failing")
    return "\n".join(lines)
