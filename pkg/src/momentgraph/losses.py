"""Target construction and training losses (KL + spatial)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ContractError, InputError

EPS = 1e-12


@dataclass
class MomentTarget:
    """Ground-truth feature-domain span and its target distributions."""

    start_index: int
    end_index: int
    start_dist: np.ndarray
    end_dist: np.ndarray


def _smooth(index: int, t: int, smoothing: str, sigma_pos: float) -> np.ndarray:
    if smoothing == "onehot":
        dist = np.zeros(t)
        dist[index] = 1.0
        return dist
    if smoothing == "gaussian":
        offsets = np.arange(t) - index
        dist = np.exp(-(offsets**2) / (2.0 * sigma_pos**2))
        return dist / dist.sum()
    raise InputError(f"unknown smoothing '{smoothing}' (expected onehot or gaussian)")


def build_targets(
    t_start_s: float,
    t_end_s: float,
    stride_seconds: float,
    t: int,
    smoothing: str = "onehot",
    sigma_pos: float = 1.0,
) -> MomentTarget:
    """Map ground-truth seconds to feature indices and target distributions."""
    if t_start_s > t_end_s:
        raise InputError(f"inverted ground-truth times: start {t_start_s}s > end {t_end_s}s")
    si = min(max(int(t_start_s // stride_seconds), 0), t - 1)
    ei = min(max(int(t_end_s // stride_seconds), 0), t - 1)
    if ei < si:
        ei = si
    return MomentTarget(
        start_index=si,
        end_index=ei,
        start_dist=_smooth(si, t, smoothing, sigma_pos),
        end_dist=_smooth(ei, t, smoothing, sigma_pos),
    )


def kl_divergence(p: Tensor, q: np.ndarray) -> Tensor:
    """D_KL(p || q) = sum p_i log(p_i / q_i), with q floored at 1e-12.

    p is the predicted distribution (differentiable); q is a fixed target.
    p comes from a softmax, so in practice p_i > 0; the 1e-12 floor keeps
    log finite regardless.
    """
    q = np.asarray(q, dtype=np.float64).reshape(1, -1)
    if p.data.shape != q.shape:
        raise ContractError(f"kl: prediction shape {p.data.shape} vs target {q.shape}")
    # both sides use the same floor so that KL(p || p) is exactly zero
    log_ratio = ad.log(ad.clip_min(p, EPS)) - np.log(np.maximum(q, EPS))
    return ad.sum_axis(ad.mul(p, log_ratio))


def kl_loss(pred_start: Tensor, pred_end: Tensor, target: MomentTarget) -> Tensor:
    """Sum of start-side and end-side KL divergences, prediction first."""
    return kl_divergence(pred_start, target.start_dist) + kl_divergence(pred_end, target.end_dist)


def spatial_loss(y: Tensor, start_index: int, end_index: int) -> Tensor:
    """-sum log(1 - y_i) over positions strictly outside [start, end] (inclusive window)."""
    t = y.data.shape[-1]
    if not (0 <= start_index <= end_index < t):
        raise ContractError(f"span [{start_index}, {end_index}] out of range for t={t}")
    outside = np.ones((1, t))
    outside[0, start_index : end_index + 1] = 0.0
    log_term = ad.log(ad.clip_min(1.0 - y, EPS))
    return -ad.sum_axis(ad.mul(Tensor(outside), log_term))


def total_loss(kl: Tensor, spatial: Tensor) -> Tensor:
    """Unweighted sum of the two loss components."""
    return kl + spatial
