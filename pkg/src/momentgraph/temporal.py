"""Temporal model: 2-layer bidirectional GRU over contextualized activity
representations, start/end heads and index -> seconds decoding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import InputError
from .init import glorot, zeros
from .text import GruParams, bigru_forward


@dataclass
class TemporalParams:
    layer1_fwd: GruParams
    layer1_bwd: GruParams
    layer2_fwd: GruParams
    layer2_bwd: GruParams
    w_start: Tensor
    b_start: Tensor
    w_end: Tensor
    b_end: Tensor
    w_score: Tensor  # g: latent -> 1, feeds the spatial-score softmax
    b_score: Tensor
    hidden: int
    dropout: float

    @classmethod
    def create(cls, rng, latent: int, hidden: int, dropout: float, registry: dict) -> "TemporalParams":
        p = cls(
            layer1_fwd=GruParams.create(rng, latent, hidden, registry, "temporal.l1_fwd"),
            layer1_bwd=GruParams.create(rng, latent, hidden, registry, "temporal.l1_bwd"),
            layer2_fwd=GruParams.create(rng, 2 * hidden, hidden, registry, "temporal.l2_fwd"),
            layer2_bwd=GruParams.create(rng, 2 * hidden, hidden, registry, "temporal.l2_bwd"),
            w_start=glorot(rng, 2 * hidden, 1),
            b_start=zeros((1, 1)),
            w_end=glorot(rng, 2 * hidden, 1),
            b_end=zeros((1, 1)),
            w_score=glorot(rng, latent, 1),
            b_score=zeros((1, 1)),
            hidden=hidden,
            dropout=dropout,
        )
        for name in ("w_start", "b_start", "w_end", "b_end", "w_score", "b_score"):
            registry[f"temporal.{name}"] = getattr(p, name)
        return p


@dataclass
class MomentPrediction:
    """Start/end categorical distributions plus decoded times."""

    start_dist: np.ndarray
    end_dist: np.ndarray
    spatial_scores: np.ndarray
    start_index: int
    end_index: int
    start_seconds: float
    end_seconds: float
    degenerate: bool  # end index decoded before start index


def temporal_forward(
    a_ctx: Tensor,
    params: TemporalParams,
    training: bool = False,
    rng: np.random.Generator | None = None,
) -> dict[str, Tensor]:
    """t x latent -> start/end distributions over time plus spatial scores y.

    Dropout is applied between the two GRU layers, training mode only.
    Returns tape tensors so losses can backpropagate through them.
    """
    t = a_ctx.data.shape[0]
    if t < 1:
        raise InputError("temporal_forward needs at least one timestep")
    h1 = bigru_forward(a_ctx, params.layer1_fwd, params.layer1_bwd, params.hidden)
    if training and params.dropout > 0.0:
        if rng is None:
            raise InputError("training-mode dropout requires an rng")
        h1 = ad.dropout(h1, params.dropout, rng)
    h2 = bigru_forward(h1, params.layer2_fwd, params.layer2_bwd, params.hidden)
    start_scores = ad.reshape(h2 @ params.w_start + params.b_start, (1, t))
    end_scores = ad.reshape(h2 @ params.w_end + params.b_end, (1, t))
    spatial_scores = ad.reshape(a_ctx @ params.w_score + params.b_score, (1, t))
    return {
        "start_dist": ad.softmax(start_scores, axis=1),
        "end_dist": ad.softmax(end_scores, axis=1),
        "y": ad.softmax(spatial_scores, axis=1),
    }


def decode(
    start_dist: np.ndarray,
    end_dist: np.ndarray,
    stride_seconds: float,
    duration_seconds: float,
    spatial_scores: np.ndarray | None = None,
    swap_degenerate: bool = False,
) -> MomentPrediction:
    """Argmax decoding (lowest index wins ties) and feature index -> seconds.

    The start maps to the left edge of its feature window, the end to the
    right edge, clamped to the video duration. No ordering constraint is
    enforced; a reversed pair is flagged (and optionally swapped).
    """
    start_dist = np.asarray(start_dist, dtype=np.float64).reshape(-1)
    end_dist = np.asarray(end_dist, dtype=np.float64).reshape(-1)
    si = int(np.argmax(start_dist))
    ei = int(np.argmax(end_dist))
    degenerate = ei < si
    if degenerate and swap_degenerate:
        si, ei = ei, si
    start_s = min(si * stride_seconds, duration_seconds)
    end_s = min((ei + 1) * stride_seconds, duration_seconds)
    return MomentPrediction(
        start_dist=start_dist,
        end_dist=end_dist,
        spatial_scores=np.zeros_like(start_dist) if spatial_scores is None
        else np.asarray(spatial_scores, dtype=np.float64).reshape(-1),
        start_index=si,
        end_index=ei,
        start_seconds=start_s,
        end_seconds=end_s,
        degenerate=degenerate,
    )
