"""Desk-scale language-conditioned spatio-temporal graph model for
natural-language moment localization.
"""

from .autodiff import GradientTape, Tensor, backward
from .config import RunConfig, load_config, synthetic_config
from .metrics import Interval, miou, recall_at, tiou
from .model import MomentModel
from .optim import Adam
from .synth import SyntheticSpec, generate
from .train import evaluate, train

__all__ = [
    "Adam",
    "GradientTape",
    "Interval",
    "MomentModel",
    "RunConfig",
    "SyntheticSpec",
    "Tensor",
    "backward",
    "evaluate",
    "generate",
    "load_config",
    "miou",
    "recall_at",
    "synthetic_config",
    "tiou",
    "train",
]
