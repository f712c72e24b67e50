"""Language-conditioned message passing over the six-node spatial graph.

Each activity timestep is processed independently: pair features couple a
linguistic vector with a node latent, messages combine pair features, and
node updates gate the iteration-0 latents. Includes all ablation variants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor
from .errors import ConfigError
from .init import glorot, zeros

VARIANTS = ("full", "no_graph", "no_node_types", "no_human_node", "no_object_node", "single_query")


def check_variant(name: str) -> str:
    if name not in VARIANTS:
        raise ConfigError(f"unknown graph variant '{name}' (expected one of {', '.join(VARIANTS)})")
    return name


@dataclass
class PairMap:
    """Affine map over [linguistic ; observation] concatenations."""

    w: Tensor
    b: Tensor

    @classmethod
    def create(cls, rng, d_in: int, d_out: int, registry: dict, name: str) -> "PairMap":
        p = cls(w=glorot(rng, d_in, d_out), b=zeros((1, d_out)))
        registry[f"{name}.w"] = p.w
        registry[f"{name}.b"] = p.b
        return p

    def __call__(self, x: Tensor) -> Tensor:
        return x @ self.w + self.b


@dataclass
class SpatialGraphParams:
    """Pair functions, shared message maps and node update maps.

    The three message maps are shared between the two directions of each
    linguistic edge (activity<->human, activity<->object, human<->object),
    so mutating one block changes both message families.
    """

    phi_sno: PairMap
    phi_vno: PairMap
    phi_sva: PairMap
    phi_vna: PairMap
    phi_snh: PairMap
    phi_svh: PairMap
    msg_sv: PairMap  # shared by the A->H and H->A messages
    msg_vn: PairMap  # shared by the A->O and O->A messages
    msg_sn: PairMap  # shared by the H->O and O->H messages
    m_o: PairMap
    m_a: PairMap
    m_h: PairMap

    @classmethod
    def create(cls, rng, d_lang: int, latent: int, registry: dict, prefix: str = "graph") -> "SpatialGraphParams":
        pair = d_lang + latent
        return cls(
            phi_sno=PairMap.create(rng, pair, latent, registry, f"{prefix}.phi_sno"),
            phi_vno=PairMap.create(rng, pair, latent, registry, f"{prefix}.phi_vno"),
            phi_sva=PairMap.create(rng, pair, latent, registry, f"{prefix}.phi_sva"),
            phi_vna=PairMap.create(rng, pair, latent, registry, f"{prefix}.phi_vna"),
            phi_snh=PairMap.create(rng, pair, latent, registry, f"{prefix}.phi_snh"),
            phi_svh=PairMap.create(rng, pair, latent, registry, f"{prefix}.phi_svh"),
            msg_sv=PairMap.create(rng, 2 * latent, latent, registry, f"{prefix}.msg_sv"),
            msg_vn=PairMap.create(rng, 2 * latent, latent, registry, f"{prefix}.msg_vn"),
            msg_sn=PairMap.create(rng, 2 * latent, latent, registry, f"{prefix}.msg_sn"),
            m_o=PairMap.create(rng, latent, latent, registry, f"{prefix}.m_o"),
            m_a=PairMap.create(rng, latent, latent, registry, f"{prefix}.m_a"),
            m_h=PairMap.create(rng, latent, latent, registry, f"{prefix}.m_h"),
        )


@dataclass
class GraphState:
    """Node latents at iteration n, with the iteration-0 latents retained."""

    n: int
    a: Tensor  # 1 x latent
    h: Tensor  # K x latent
    o: Tensor  # J x latent
    a0: Tensor
    h0: Tensor
    o0: Tensor

    @classmethod
    def initial(cls, a0: Tensor, h0: Tensor, o0: Tensor) -> "GraphState":
        return cls(n=0, a=a0, h=h0, o=o0, a0=a0, h0=h0, o0=o0)


def _pair_rows(lang: Tensor, obs: Tensor, pmap: PairMap) -> Tensor:
    """Apply a pair map to [lang ; obs_row] for every row of obs (K x latent)."""
    n = obs.data.shape[0]
    return pmap(ad.concat([ad.repeat_rows(lang, n), obs], axis=1))


def _zero_row(latent: int) -> Tensor:
    return Tensor(np.zeros((1, latent)))


def phis(state: GraphState, sv: Tensor, sn: Tensor, vn: Tensor, p: SpatialGraphParams) -> dict:
    """All six pair-feature families for the current iteration.

    Empty human/object sets yield 0-row matrices; their sums are zero rows.
    """
    latent = p.m_a.w.data.shape[0]
    out = {
        "sva": p.phi_sva(ad.concat([sv, state.a], axis=1)),
        "vna": p.phi_vna(ad.concat([vn, state.a], axis=1)),
    }
    if state.o.data.shape[0]:
        out["sno"] = _pair_rows(sn, state.o, p.phi_sno)
        out["vno"] = _pair_rows(vn, state.o, p.phi_vno)
        out["sum_sno"] = ad.sum_axis(out["sno"], axis=0, keepdims=True)
        out["sum_vno"] = ad.sum_axis(out["vno"], axis=0, keepdims=True)
    else:
        out["sno"] = out["vno"] = None
        out["sum_sno"] = out["sum_vno"] = _zero_row(latent)
    if state.h.data.shape[0]:
        out["snh"] = _pair_rows(sn, state.h, p.phi_snh)
        out["svh"] = _pair_rows(sv, state.h, p.phi_svh)
        out["sum_snh"] = ad.sum_axis(out["snh"], axis=0, keepdims=True)
        out["sum_svh"] = ad.sum_axis(out["svh"], axis=0, keepdims=True)
    else:
        out["snh"] = out["svh"] = None
        out["sum_snh"] = out["sum_svh"] = _zero_row(latent)
    return out


def messages(state: GraphState, phi: dict, p: SpatialGraphParams) -> dict:
    """All message families for the current iteration."""
    K = state.h.data.shape[0]
    J = state.o.data.shape[0]
    out = {
        "h_sv_a": p.msg_sv(ad.concat([phi["sva"], phi["sum_svh"]], axis=1)),
        "o_vn_a": p.msg_vn(ad.concat([phi["vna"], phi["sum_vno"]], axis=1)),
    }
    if J:
        out["h_sn_o"] = p.msg_sn(ad.concat([phi["sno"], ad.repeat_rows(phi["sum_snh"], J)], axis=1))
        out["a_vn_o"] = p.msg_vn(ad.concat([phi["vno"], ad.repeat_rows(phi["vna"], J)], axis=1))
    if K:
        out["o_sn_h"] = p.msg_sn(ad.concat([phi["snh"], ad.repeat_rows(phi["sum_sno"], K)], axis=1))
        out["a_sv_h"] = p.msg_sv(ad.concat([phi["svh"], ad.repeat_rows(phi["sva"], K)], axis=1))
    return out


def update(state: GraphState, msg: dict, p: SpatialGraphParams) -> GraphState:
    """Gated node refresh against the iteration-0 latents (logistic activation)."""
    a_next = ad.sigmoid(ad.mul(p.m_a(ad.mul(msg["h_sv_a"], msg["o_vn_a"])), state.a0))
    if state.o.data.shape[0]:
        o_next = ad.sigmoid(ad.mul(p.m_o(ad.mul(msg["h_sn_o"], msg["a_vn_o"])), state.o0))
    else:
        o_next = state.o
    if state.h.data.shape[0]:
        h_next = ad.sigmoid(ad.mul(p.m_h(ad.mul(msg["o_sn_h"], msg["a_sv_h"])), state.h0))
    else:
        h_next = state.h
    return GraphState(n=state.n + 1, a=a_next, h=h_next, o=o_next, a0=state.a0, h0=state.h0, o0=state.o0)


def run_message_passing(
    a0: Tensor,
    h0: Tensor,
    o0: Tensor,
    sv: Tensor,
    sn: Tensor,
    vn: Tensor,
    params: SpatialGraphParams,
    n_iters: int,
) -> GraphState:
    """N rounds of message passing for one timestep; N=0 returns the
    embedded initial state untouched."""
    state = GraphState.initial(a0, h0, o0)
    for _ in range(n_iters):
        phi = phis(state, sv, sn, vn, params)
        msg = messages(state, phi, params)
        state = update(state, msg, params)
    return state


def run_message_passing_sequence(
    a0: Tensor,
    h0: Tensor,
    o0: Tensor,
    h_seg: np.ndarray,
    o_seg: np.ndarray,
    sv: Tensor,
    sn: Tensor,
    vn: Tensor,
    params: SpatialGraphParams,
    n_iters: int,
) -> Tensor:
    """All timesteps of one video in a single batch of tape ops.

    a0 is t x latent; h0 / o0 stack every frame's human / object latents with
    h_seg / o_seg mapping each row to its timestep. Timesteps never exchange
    information, so this computes exactly what run_message_passing does per
    frame, just with the rows of every frame fused into shared matrices.
    Returns the activity latents after n_iters, t x latent.
    """
    t = a0.data.shape[0]
    latent = params.m_a.w.data.shape[0]
    n_h = h0.data.shape[0]
    n_o = o0.data.shape[0]
    zeros_t = Tensor(np.zeros((t, latent)))
    a, h, o = a0, h0, o0
    for _ in range(n_iters):
        sva = params.phi_sva(ad.concat([ad.repeat_rows(sv, t), a], axis=1))
        vna = params.phi_vna(ad.concat([ad.repeat_rows(vn, t), a], axis=1))
        if n_o:
            sno = params.phi_sno(ad.concat([ad.repeat_rows(sn, n_o), o], axis=1))
            vno = params.phi_vno(ad.concat([ad.repeat_rows(vn, n_o), o], axis=1))
            sum_sno = ad.segment_sum(sno, o_seg, t)
            sum_vno = ad.segment_sum(vno, o_seg, t)
        else:
            sum_sno = sum_vno = zeros_t
        if n_h:
            snh = params.phi_snh(ad.concat([ad.repeat_rows(sn, n_h), h], axis=1))
            svh = params.phi_svh(ad.concat([ad.repeat_rows(sv, n_h), h], axis=1))
            sum_snh = ad.segment_sum(snh, h_seg, t)
            sum_svh = ad.segment_sum(svh, h_seg, t)
        else:
            sum_snh = sum_svh = zeros_t
        h_sv_a = params.msg_sv(ad.concat([sva, sum_svh], axis=1))
        o_vn_a = params.msg_vn(ad.concat([vna, sum_vno], axis=1))
        if n_o:
            h_sn_o = params.msg_sn(ad.concat([sno, ad.gather_rows(sum_snh, o_seg)], axis=1))
            a_vn_o = params.msg_vn(ad.concat([vno, ad.gather_rows(vna, o_seg)], axis=1))
            o = ad.sigmoid(ad.mul(params.m_o(ad.mul(h_sn_o, a_vn_o)), o0))
        if n_h:
            o_sn_h = params.msg_sn(ad.concat([snh, ad.gather_rows(sum_sno, h_seg)], axis=1))
            a_sv_h = params.msg_sv(ad.concat([svh, ad.gather_rows(sva, h_seg)], axis=1))
            h = ad.sigmoid(ad.mul(params.m_h(ad.mul(o_sn_h, a_sv_h)), h0))
        a = ad.sigmoid(ad.mul(params.m_a(ad.mul(h_sv_a, o_vn_a)), a0))
    return a


def create_single_query_params(
    rng, d_lang: int, latent: int, registry: dict, prefix: str = "qgraph"
) -> SpatialGraphParams:
    """Single-query-node parameterization: one pair map per visual node kind.

    The returned view ties each linguistic-pair slot to its query-pair map,
    so the full message-passing pipeline runs unchanged with sv = sn = vn = q.
    """
    pair = d_lang + latent
    phi_qa = PairMap.create(rng, pair, latent, registry, f"{prefix}.phi_qa")
    phi_qo = PairMap.create(rng, pair, latent, registry, f"{prefix}.phi_qo")
    phi_qh = PairMap.create(rng, pair, latent, registry, f"{prefix}.phi_qh")
    return SpatialGraphParams(
        phi_sno=phi_qo,
        phi_vno=phi_qo,
        phi_sva=phi_qa,
        phi_vna=phi_qa,
        phi_snh=phi_qh,
        phi_svh=phi_qh,
        msg_sv=PairMap.create(rng, 2 * latent, latent, registry, f"{prefix}.msg_ah"),
        msg_vn=PairMap.create(rng, 2 * latent, latent, registry, f"{prefix}.msg_ao"),
        msg_sn=PairMap.create(rng, 2 * latent, latent, registry, f"{prefix}.msg_ho"),
        m_o=PairMap.create(rng, latent, latent, registry, f"{prefix}.m_o"),
        m_a=PairMap.create(rng, latent, latent, registry, f"{prefix}.m_a"),
        m_h=PairMap.create(rng, latent, latent, registry, f"{prefix}.m_h"),
    )


@dataclass
class NoGraphParams:
    """Baseline map: [activity ; mean-pooled detections] -> latent."""

    w: Tensor
    b: Tensor

    @classmethod
    def create(cls, rng, d_v: int, d_o: int, latent: int, registry: dict) -> "NoGraphParams":
        p = cls(w=glorot(rng, d_v + d_o, latent), b=zeros((1, latent)))
        registry["nograph.w"] = p.w
        registry["nograph.b"] = p.b
        return p


def no_graph_forward(a_raw: Tensor, det_features: np.ndarray, params: NoGraphParams) -> Tensor:
    """Single-timestep baseline: no message passing, no query conditioning."""
    d_o = params.w.data.shape[0] - a_raw.data.shape[1]
    if det_features.shape[0]:
        pooled = det_features.mean(axis=0, keepdims=True)
    else:
        pooled = np.zeros((1, d_o))
    return ad.concat([a_raw, Tensor(pooled)], axis=1) @ params.w + params.b
