"""The full moment-localization model: query encoder, per-timestep spatial
graph (or an ablation variant) and the temporal head, wired for training
and inference on one sample at a time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import GradientTape, Tensor
from .checkpoint import load_params, save_params
from .config import RunConfig
from .dataio import AnnotatedSample
from .errors import CheckpointError
from .graph import (
    NoGraphParams,
    SpatialGraphParams,
    check_variant,
    create_single_query_params,
    run_message_passing_sequence,
)
from .losses import MomentTarget, build_targets, kl_loss, spatial_loss, total_loss
from .temporal import MomentPrediction, TemporalParams, decode, temporal_forward
from .text import TextEncoderParams, Vocabulary, encode_query, tokenize
from .visual import CategoryMap, FrameObservations, NodeEmbedParams, categorize_detections


@dataclass
class PreparedSample:
    """A sample with tokenization and detection routing done once up front."""

    tokens: list[str]
    features: np.ndarray  # t x d_v, constant
    observations: list[FrameObservations]
    det_features: list[np.ndarray]  # all kept detection features per frame (no_graph pooling)
    humans_stacked: np.ndarray  # all frames' human features, with frame ids
    objects_stacked: np.ndarray
    human_frame_ids: np.ndarray
    object_frame_ids: np.ndarray
    stride_seconds: float
    duration_seconds: float
    target: MomentTarget
    video_id: str
    query: str
    t_start_s: float
    t_end_s: float


class MomentModel:
    def __init__(self, config: RunConfig, vocab: Vocabulary):
        check_variant(config.variant)
        self.config = config
        self.vocab = vocab
        self.params: dict[str, Tensor] = {}
        rng = np.random.default_rng(config.seed)
        self.text = TextEncoderParams.create(rng, len(vocab), config.d_w, config.hidden, self.params)
        d_lang = 2 * config.hidden
        self.embed = NodeEmbedParams.create(rng, config.d_v, config.d_o, config.latent, self.params)
        self.graph_params: SpatialGraphParams | None = None
        self.nograph_params: NoGraphParams | None = None
        if config.variant == "no_graph":
            self.nograph_params = NoGraphParams.create(rng, config.d_v, config.d_o, config.latent, self.params)
        elif config.variant == "single_query":
            self.graph_params = create_single_query_params(rng, d_lang, config.latent, self.params)
        else:
            self.graph_params = SpatialGraphParams.create(rng, d_lang, config.latent, self.params)
        self.temporal = TemporalParams.create(rng, config.latent, config.hidden, config.dropout, self.params)

    # ------------------------------------------------------------------
    # data preparation

    def prepare(self, sample: AnnotatedSample, cmap: CategoryMap) -> PreparedSample:
        cfg = self.config
        route_map = CategoryMap() if cfg.variant == "no_node_types" else cmap
        observations = []
        det_features = []
        for dets in sample.detections:
            obs = categorize_detections(dets, route_map, cfg.top_n) if dets else FrameObservations(
                humans=np.zeros((0, cfg.d_o)), objects=np.zeros((0, cfg.d_o))
            )
            if cfg.variant == "no_human_node":
                obs = FrameObservations(
                    humans=np.zeros((0, cfg.d_o)), objects=obs.objects, object_labels=obs.object_labels
                )
            elif cfg.variant == "no_object_node":
                obs = FrameObservations(
                    humans=obs.humans, objects=np.zeros((0, cfg.d_o)), human_labels=obs.human_labels
                )
            observations.append(obs)
            stacked = [obs.humans, obs.objects]
            det_features.append(np.concatenate([m for m in stacked if m.shape[0]], axis=0)
                                if any(m.shape[0] for m in stacked) else np.zeros((0, cfg.d_o)))
        t = sample.features.features.shape[0]
        h_seg = np.concatenate(
            [np.full(obs.humans.shape[0], i, dtype=np.intp) for i, obs in enumerate(observations)]
        ) if observations else np.zeros(0, dtype=np.intp)
        o_seg = np.concatenate(
            [np.full(obs.objects.shape[0], i, dtype=np.intp) for i, obs in enumerate(observations)]
        ) if observations else np.zeros(0, dtype=np.intp)
        h_stack = (np.concatenate([obs.humans for obs in observations], axis=0)
                   if observations else np.zeros((0, cfg.d_o)))
        o_stack = (np.concatenate([obs.objects for obs in observations], axis=0)
                   if observations else np.zeros((0, cfg.d_o)))
        target = build_targets(
            sample.t_start_s,
            sample.t_end_s,
            sample.features.stride_seconds,
            t,
            smoothing=cfg.smoothing,
            sigma_pos=cfg.sigma_pos,
        )
        return PreparedSample(
            tokens=tokenize(sample.query),
            features=sample.features.features,
            observations=observations,
            det_features=det_features,
            humans_stacked=h_stack,
            objects_stacked=o_stack,
            human_frame_ids=h_seg,
            object_frame_ids=o_seg,
            stride_seconds=sample.features.stride_seconds,
            duration_seconds=sample.duration_s,
            target=target,
            video_id=sample.video_id,
            query=sample.query,
            t_start_s=sample.t_start_s,
            t_end_s=sample.t_end_s,
        )

    # ------------------------------------------------------------------
    # forward

    def spatial_forward(self, prepared: PreparedSample, encoding) -> Tensor:
        """Contextualized activity representations, t x latent.

        All timesteps run as one batch (frames are independent), which keeps
        the tape small; the per-frame path in graph.run_message_passing
        computes the same values one timestep at a time.
        """
        cfg = self.config
        feats = Tensor(prepared.features)
        if cfg.variant == "no_graph":
            pooled = np.stack(
                [f.mean(axis=0) if f.shape[0] else np.zeros(cfg.d_o) for f in prepared.det_features]
            )
            joint = ad.concat([feats, Tensor(pooled)], axis=1)
            return joint @ self.nograph_params.w + self.nograph_params.b
        if cfg.variant == "single_query":
            sv = sn = vn = encoding.q
        else:
            sv, sn, vn = encoding.sv, encoding.sn, encoding.vn
        a0 = ad.tanh(feats @ self.embed.w_a + self.embed.b_a)
        latent = cfg.latent
        if prepared.humans_stacked.shape[0]:
            h0 = ad.tanh(Tensor(prepared.humans_stacked) @ self.embed.w_h + self.embed.b_h)
        else:
            h0 = Tensor(np.zeros((0, latent)))
        if prepared.objects_stacked.shape[0]:
            o0 = ad.tanh(Tensor(prepared.objects_stacked) @ self.embed.w_o + self.embed.b_o)
        else:
            o0 = Tensor(np.zeros((0, latent)))
        return run_message_passing_sequence(
            a0,
            h0,
            o0,
            prepared.human_frame_ids,
            prepared.object_frame_ids,
            sv,
            sn,
            vn,
            self.graph_params,
            cfg.iterations,
        )

    def forward(self, prepared: PreparedSample, training: bool = False, rng: np.random.Generator | None = None):
        encoding = encode_query(prepared.tokens, self.vocab, self.text)
        a_ctx = self.spatial_forward(prepared, encoding)
        out = temporal_forward(a_ctx, self.temporal, training=training, rng=rng)
        out["a_ctx"] = a_ctx
        out["encoding"] = encoding
        return out

    def loss(self, prepared: PreparedSample, training: bool = False, rng: np.random.Generator | None = None):
        """Total loss tensor plus its components for one sample."""
        out = self.forward(prepared, training=training, rng=rng)
        kl = kl_loss(out["start_dist"], out["end_dist"], prepared.target)
        sp = spatial_loss(out["y"], prepared.target.start_index, prepared.target.end_index)
        return total_loss(kl, sp), kl, sp

    def predict(self, prepared: PreparedSample, swap_degenerate: bool = False) -> MomentPrediction:
        """Deterministic evaluation-mode prediction (no tape, no dropout)."""
        out = self.forward(prepared, training=False)
        return decode(
            out["start_dist"].data,
            out["end_dist"].data,
            prepared.stride_seconds,
            prepared.duration_seconds,
            spatial_scores=out["y"].data,
            swap_degenerate=swap_degenerate,
        )

    # ------------------------------------------------------------------
    # persistence

    def save(self, path: str) -> None:
        save_params(self.params, path)

    def load(self, path: str) -> None:
        loaded = load_params(path)
        if set(loaded) != set(self.params):
            missing = set(self.params) - set(loaded)
            extra = set(loaded) - set(self.params)
            raise CheckpointError(f"checkpoint/config mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
        for name, arr in loaded.items():
            if arr.shape != self.params[name].data.shape:
                raise CheckpointError(
                    f"checkpoint parameter '{name}' has shape {arr.shape}, config expects {self.params[name].data.shape}"
                )
            self.params[name].data = arr
