"""Visual front end: keyframe sharpness, detection routing and node embedding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import InputError
from .init import glorot, zeros

HUMAN = "human"
OBJECT = "object"


@dataclass
class ActivityFeatures:
    """Sequence of per-window activity feature vectors for one video."""

    video_id: str
    features: np.ndarray  # t x d_v
    stride_seconds: float
    duration_seconds: float

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        t = self.features.shape[0]
        if t < 1:
            raise InputError(f"{self.video_id}: need at least one feature row")
        if self.stride_seconds <= 0:
            raise InputError(f"{self.video_id}: stride must be positive")
        if abs(t * self.stride_seconds - self.duration_seconds) > self.stride_seconds:
            raise InputError(
                f"{self.video_id}: duration {self.duration_seconds}s inconsistent with "
                f"{t} rows at stride {self.stride_seconds}s"
            )


@dataclass
class Detection:
    label: str
    confidence: float
    feature: np.ndarray

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise InputError(f"detection '{self.label}': confidence {self.confidence} outside [0, 1]")
        self.feature = np.asarray(self.feature, dtype=np.float64)


class CategoryMap:
    """label -> human/object routing; unknown labels default to object."""

    def __init__(self, mapping: dict[str, str] | None = None):
        mapping = mapping or {}
        for label, cat in mapping.items():
            if cat not in (HUMAN, OBJECT):
                raise InputError(f"category map: label '{label}' has unknown category '{cat}'")
        self._map = dict(mapping)

    def category(self, label: str) -> str:
        return self._map.get(label, OBJECT)

    def as_dict(self) -> dict[str, str]:
        return dict(self._map)


@dataclass
class FrameObservations:
    """Human and object feature sets extracted from one keyframe."""

    humans: np.ndarray  # K x d_o
    objects: np.ndarray  # J x d_o
    human_labels: list[str] = field(default_factory=list)
    object_labels: list[str] = field(default_factory=list)

    @property
    def n_humans(self) -> int:
        return self.humans.shape[0]

    @property
    def n_objects(self) -> int:
        return self.objects.shape[0]


def variance_of_laplacian(image: np.ndarray) -> float:
    """Population variance of the 4-neighbour Laplacian response (valid interior)."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2 or image.shape[0] < 3 or image.shape[1] < 3:
        raise InputError(f"image must be at least 3x3, got shape {image.shape}")
    lap = (
        image[:-2, 1:-1]
        + image[2:, 1:-1]
        + image[1:-1, :-2]
        + image[1:-1, 2:]
        - 4.0 * image[1:-1, 1:-1]
    )
    return float(lap.var())


def select_keyframe(frames: list[np.ndarray]) -> int:
    """Index of the sharpest frame; ties break to the lowest index."""
    if not frames:
        raise InputError("empty frame list")
    scores = [variance_of_laplacian(f) for f in frames]
    return int(np.argmax(scores))


def categorize_detections(dets: list[Detection], cmap: CategoryMap, top_n: int) -> FrameObservations:
    """Keep the top_n most confident detections, then route by category.

    Confidence ties keep input order (stable sort). The confidence cut is
    applied to the full pool before the human/object split.
    """
    if top_n < 1:
        raise InputError(f"top_n must be >= 1, got {top_n}")
    kept = sorted(dets, key=lambda d: -d.confidence)[:top_n]
    d_o = kept[0].feature.shape[0] if kept else 0
    humans, objects, hl, ol = [], [], [], []
    for det in kept:
        if cmap.category(det.label) == HUMAN:
            humans.append(det.feature)
            hl.append(det.label)
        else:
            objects.append(det.feature)
            ol.append(det.label)
    return FrameObservations(
        humans=np.array(humans, dtype=np.float64).reshape(len(humans), d_o),
        objects=np.array(objects, dtype=np.float64).reshape(len(objects), d_o),
        human_labels=hl,
        object_labels=ol,
    )


@dataclass
class NodeEmbedParams:
    """Affine + tanh maps into node latent space, one per node kind."""

    w_a: Tensor
    b_a: Tensor
    w_h: Tensor
    b_h: Tensor
    w_o: Tensor
    b_o: Tensor

    @classmethod
    def create(cls, rng, d_v: int, d_o: int, latent: int, registry: dict) -> "NodeEmbedParams":
        p = cls(
            w_a=glorot(rng, d_v, latent),
            b_a=zeros((1, latent)),
            w_h=glorot(rng, d_o, latent),
            b_h=zeros((1, latent)),
            w_o=glorot(rng, d_o, latent),
            b_o=zeros((1, latent)),
        )
        for name in ("w_a", "b_a", "w_h", "b_h", "w_o", "b_o"):
            registry[f"embed.{name}"] = getattr(p, name)
        return p


def embed_nodes(obs: FrameObservations, a_raw: Tensor, params: NodeEmbedParams):
    """Initial latents: tanh(W x + b) per observation, separate maps per node kind.

    Returns (a0: 1 x latent, h0: K x latent, o0: J x latent); empty sets
    produce 0-row matrices.
    """
    a0 = ad.tanh(a_raw @ params.w_a + params.b_a)
    latent = params.w_a.data.shape[1]
    if obs.n_humans:
        h0 = ad.tanh(Tensor(obs.humans) @ params.w_h + params.b_h)
    else:
        h0 = Tensor(np.zeros((0, latent)))
    if obs.n_objects:
        o0 = ad.tanh(Tensor(obs.objects) @ params.w_o + params.b_o)
    else:
        o0 = Tensor(np.zeros((0, latent)))
    return a0, h0, o0
