"""Straight-line numpy re-implementations used as oracles.

Everything here is written with explicit loops over plain arrays and shares
no code with the package, so agreement is evidence of correctness rather
than of consistency.
"""

import numpy as np


def _sig(x):
    return 1.0 / (1.0 + np.exp(-x))


def ref_gru_sequence(x, p, reverse=False):
    """x: m x d_in; p: dict of wz,uz,bz,wr,ur,br,wh,uh,bh arrays. Returns m x hidden."""
    m = x.shape[0]
    hidden = p["uz"].shape[0]
    h = np.zeros(hidden)
    out = np.zeros((m, hidden))
    order = range(m - 1, -1, -1) if reverse else range(m)
    for i in order:
        xi = x[i]
        z = _sig(xi @ p["wz"] + h @ p["uz"] + p["bz"][0])
        r = _sig(xi @ p["wr"] + h @ p["ur"] + p["br"][0])
        cand = np.tanh(xi @ p["wh"] + (r * h) @ p["uh"] + p["bh"][0])
        h = (1.0 - z) * h + z * cand
        out[i] = h
    return out


def ref_bigru(x, p_fwd, p_bwd):
    return np.concatenate([ref_gru_sequence(x, p_fwd), ref_gru_sequence(x, p_bwd, reverse=True)], axis=1)


def ref_attention(q, embeddings, contexts, wk, bk):
    """q: 1 x d_q; returns (1 x d_ctx output, weight vector of length m)."""
    m = embeddings.shape[0]
    logits = np.zeros(m)
    for i in range(m):
        key = embeddings[i] @ wk + bk[0]
        logits[i] = float(q[0] @ key)
    e = np.exp(logits - logits.max())
    w = e / e.sum()
    out = np.zeros((1, contexts.shape[1]))
    for i in range(m):
        out[0] += w[i] * contexts[i]
    return out, w


def ref_graph_iteration(a, h, o, a0, h0, o0, sv, sn, vn, p):
    """One message-passing round for a single timestep.

    a/a0: 1 x latent; h/h0: K x latent; o/o0: J x latent; sv/sn/vn: 1 x d_lang.
    p maps block names (phi_sno.w, msg_sv.b, m_a.w, ...) to arrays.
    Returns updated (a, h, o).
    """
    K = h.shape[0]
    J = o.shape[0]
    latent = a.shape[1]

    def aff(name, x):
        return x @ p[f"{name}.w"] + p[f"{name}.b"][0]

    phi_sva = aff("phi_sva", np.concatenate([sv[0], a[0]]))
    phi_vna = aff("phi_vna", np.concatenate([vn[0], a[0]]))
    phi_sno = np.zeros((J, latent))
    phi_vno = np.zeros((J, latent))
    for j in range(J):
        phi_sno[j] = aff("phi_sno", np.concatenate([sn[0], o[j]]))
        phi_vno[j] = aff("phi_vno", np.concatenate([vn[0], o[j]]))
    phi_snh = np.zeros((K, latent))
    phi_svh = np.zeros((K, latent))
    for k in range(K):
        phi_snh[k] = aff("phi_snh", np.concatenate([sn[0], h[k]]))
        phi_svh[k] = aff("phi_svh", np.concatenate([sv[0], h[k]]))

    sum_sno = phi_sno.sum(axis=0) if J else np.zeros(latent)
    sum_vno = phi_vno.sum(axis=0) if J else np.zeros(latent)
    sum_snh = phi_snh.sum(axis=0) if K else np.zeros(latent)
    sum_svh = phi_svh.sum(axis=0) if K else np.zeros(latent)

    msg_h_sv_a = aff("msg_sv", np.concatenate([phi_sva, sum_svh]))
    msg_o_vn_a = aff("msg_vn", np.concatenate([phi_vna, sum_vno]))
    a_new = _sig(aff("m_a", msg_h_sv_a * msg_o_vn_a) * a0[0])[None, :]

    o_new = o.copy()
    for j in range(J):
        msg_h_sn_o = aff("msg_sn", np.concatenate([phi_sno[j], sum_snh]))
        msg_a_vn_o = aff("msg_vn", np.concatenate([phi_vno[j], phi_vna]))
        o_new[j] = _sig(aff("m_o", msg_h_sn_o * msg_a_vn_o) * o0[j])
    h_new = h.copy()
    for k in range(K):
        msg_o_sn_h = aff("msg_sn", np.concatenate([phi_snh[k], sum_sno]))
        msg_a_sv_h = aff("msg_sv", np.concatenate([phi_svh[k], phi_sva]))
        h_new[k] = _sig(aff("m_h", msg_o_sn_h * msg_a_sv_h) * h0[k])
    return a_new, h_new, o_new


def gru_param_arrays(p):
    """Pull plain arrays out of a GruParams dataclass."""
    return {
        name: getattr(p, name).data
        for name in ("wz", "uz", "bz", "wr", "ur", "br", "wh", "uh", "bh")
    }


def ref_temporal(a_ctx, params):
    """Two stacked bidirectional GRUs plus the three affine heads (no dropout).

    Returns (start_dist, end_dist, y) as plain length-t vectors.
    """
    h1 = ref_bigru(a_ctx, gru_param_arrays(params.layer1_fwd), gru_param_arrays(params.layer1_bwd))
    h2 = ref_bigru(h1, gru_param_arrays(params.layer2_fwd), gru_param_arrays(params.layer2_bwd))
    t = a_ctx.shape[0]
    start = np.zeros(t)
    end = np.zeros(t)
    score = np.zeros(t)
    for i in range(t):
        start[i] = float(h2[i] @ params.w_start.data[:, 0] + params.b_start.data[0, 0])
        end[i] = float(h2[i] @ params.w_end.data[:, 0] + params.b_end.data[0, 0])
        score[i] = float(a_ctx[i] @ params.w_score.data[:, 0] + params.b_score.data[0, 0])

    def smax(v):
        e = np.exp(v - v.max())
        return e / e.sum()

    return smax(start), smax(end), smax(score)
