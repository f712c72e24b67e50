"""Run configuration: defaults, INI-style config files and flag overrides."""

from __future__ import annotations

import configparser
from dataclasses import asdict, dataclass, field

from .errors import ConfigError
from .graph import check_variant


@dataclass
class RunConfig:
    # model dims
    d_w: int = 300
    d_v: int = 1024
    d_o: int = 1024
    latent: int = 256
    hidden: int = 256
    # graph
    variant: str = "full"
    iterations: int = 3
    top_n: int = 15
    # loss
    smoothing: str = "onehot"
    sigma_pos: float = 1.0
    # optimizer
    lr: float = 1e-4
    weight_decay: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    dropout: float = 0.5
    # training
    batch_size: int = 6
    epochs: int = 100
    seed: int = 0
    eval_every: int = 5
    target_miou: float | None = None  # stop early once val mIoU reaches this
    swap_degenerate: bool = False
    # paths
    data_dir: str = "data"
    checkpoint: str = "model.ckpt"
    report: str = ""
    alphas: tuple = (0.3, 0.5, 0.7, 0.9)

    def __post_init__(self):
        for name in ("d_w", "d_v", "d_o", "latent", "hidden", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.iterations < 0:
            raise ConfigError("iterations must be >= 0")
        if self.lr <= 0:
            raise ConfigError("lr must be positive")
        check_variant(self.variant)

    def to_dict(self) -> dict:
        return asdict(self)


_SECTIONS = {
    "model": ("d_w", "d_v", "d_o", "latent", "hidden"),
    "graph": ("variant", "iterations", "top_n"),
    "loss": ("smoothing", "sigma_pos"),
    "optimizer": ("lr", "weight_decay", "beta1", "beta2", "dropout"),
    "training": ("batch_size", "epochs", "seed", "eval_every", "target_miou", "swap_degenerate"),
    "paths": ("data_dir", "checkpoint", "report"),
}

_FIELD_TYPES = {f.name: f.type for f in RunConfig.__dataclass_fields__.values()}  # type: ignore[attr-defined]


def _coerce(name: str, raw: str):
    ftype = _FIELD_TYPES.get(name, "str")
    if name == "target_miou":
        return None if raw.lower() in ("", "none") else float(raw)
    if name == "swap_degenerate":
        return raw.lower() in ("1", "true", "yes")
    if ftype == "int":
        return int(raw)
    if ftype == "float":
        return float(raw)
    return raw


def load_config(path: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig from an optional INI file plus flag overrides."""
    values: dict = {}
    if path:
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise ConfigError(f"cannot read config file '{path}'")
        for section, keys in _SECTIONS.items():
            if parser.has_section(section):
                for key in parser[section]:
                    if key not in keys:
                        raise ConfigError(f"unknown config key [{section}] {key}")
                    values[key] = _coerce(key, parser[section][key])
    for key, val in (overrides or {}).items():
        if val is not None:
            values[key] = val
    return RunConfig(**values)


def synthetic_config(**overrides) -> RunConfig:
    """Desk-scale preset used by the synthetic-learnability experiments."""
    base = dict(
        d_w=16,
        d_v=16,
        d_o=16,
        latent=32,
        hidden=16,
        lr=1e-3,
        dropout=0.2,
        smoothing="gaussian",
        sigma_pos=1.0,
        epochs=200,
        eval_every=5,
    )
    base.update(overrides)
    return RunConfig(**base)
