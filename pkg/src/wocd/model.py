"""GCN + single-layer linear-attention graph transformer, loss, and gradients.

Everything is float64 numpy with exact analytic gradients; the linear
attention never materializes the N x N score matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import Cover, Graph, SampledLabels

CLAMP_EPS = 1e-7

CHECKPOINT_VERSION = 1


class DegenerateProjectionError(ValueError):
    """Q or K collapsed to the zero matrix; Frobenius normalization undefined."""


@dataclass(frozen=True)
class FusionParams:
    alpha: float = 0.5  # GCN branch weight
    beta: float = 0.5  # GT branch weight
    gamma: float = 0.1  # attention share of the GT output; the rest is the input projection

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must be in [0, 1]")


@dataclass
class ModelParams:
    """All learnable weights for the fused GCN/GT predictor."""

    input_proj_w: np.ndarray  # D x h, feeds the transformer branch
    input_proj_b: np.ndarray
    gcn_w: list  # [D x h, h x h, h x h]
    gcn_b: list
    gt_q_w: np.ndarray
    gt_q_b: np.ndarray
    gt_k_w: np.ndarray
    gt_k_b: np.ndarray
    gt_v_w: np.ndarray
    gt_v_b: np.ndarray
    head_w: np.ndarray  # h x K
    head_b: np.ndarray
    activate_final: bool = False  # rectify the last GCN layer too

    def named_arrays(self):
        """Fixed-order (name, array) pairs; shared by Adam and grad checks."""
        pairs = [
            ("input_proj_w", self.input_proj_w),
            ("input_proj_b", self.input_proj_b),
        ]
        for i, (w, b) in enumerate(zip(self.gcn_w, self.gcn_b)):
            pairs.append((f"gcn_w{i}", w))
            pairs.append((f"gcn_b{i}", b))
        pairs += [
            ("gt_q_w", self.gt_q_w),
            ("gt_q_b", self.gt_q_b),
            ("gt_k_w", self.gt_k_w),
            ("gt_k_b", self.gt_k_b),
            ("gt_v_w", self.gt_v_w),
            ("gt_v_b", self.gt_v_b),
            ("head_w", self.head_w),
            ("head_b", self.head_b),
        ]
        return pairs

    def copy(self) -> "ModelParams":
        return ModelParams(
            input_proj_w=self.input_proj_w.copy(),
            input_proj_b=self.input_proj_b.copy(),
            gcn_w=[w.copy() for w in self.gcn_w],
            gcn_b=[b.copy() for b in self.gcn_b],
            gt_q_w=self.gt_q_w.copy(),
            gt_q_b=self.gt_q_b.copy(),
            gt_k_w=self.gt_k_w.copy(),
            gt_k_b=self.gt_k_b.copy(),
            gt_v_w=self.gt_v_w.copy(),
            gt_v_b=self.gt_v_b.copy(),
            head_w=self.head_w.copy(),
            head_b=self.head_b.copy(),
            activate_final=self.activate_final,
        )

    def save(self, path, seed=None) -> None:
        arrays = dict(self.named_arrays())
        meta = {
            "version": CHECKPOINT_VERSION,
            "activate_final": self.activate_final,
            "seed": seed,
            "shapes": {k: list(v.shape) for k, v in arrays.items()},
        }
        np.savez(path, __meta__=json.dumps(meta), **arrays)

    @classmethod
    def load(cls, path) -> "ModelParams":
        data = np.load(path, allow_pickle=False)
        meta = json.loads(str(data["__meta__"]))
        if meta.get("version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {meta.get('version')}")
        return cls(
            input_proj_w=data["input_proj_w"],
            input_proj_b=data["input_proj_b"],
            gcn_w=[data[f"gcn_w{i}"] for i in range(3)],
            gcn_b=[data[f"gcn_b{i}"] for i in range(3)],
            gt_q_w=data["gt_q_w"],
            gt_q_b=data["gt_q_b"],
            gt_k_w=data["gt_k_w"],
            gt_k_b=data["gt_k_b"],
            gt_v_w=data["gt_v_w"],
            gt_v_b=data["gt_v_b"],
            head_w=data["head_w"],
            head_b=data["head_b"],
            activate_final=bool(meta["activate_final"]),
        )


def init_params(d: int, h: int, k: int, seed: int, activate_final: bool = False) -> ModelParams:
    """Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases."""
    if min(d, h, k) < 1:
        raise ValueError("dimensions must be positive")
    rng = np.random.default_rng(seed)

    def draw(fan_in, fan_out):
        bound = 1.0 / np.sqrt(fan_in)
        return rng.uniform(-bound, bound, size=(fan_in, fan_out))

    return ModelParams(
        input_proj_w=draw(d, h),
        input_proj_b=np.zeros(h),
        gcn_w=[draw(d, h), draw(h, h), draw(h, h)],
        gcn_b=[np.zeros(h), np.zeros(h), np.zeros(h)],
        gt_q_w=draw(h, h),
        gt_q_b=np.zeros(h),
        gt_k_w=draw(h, h),
        gt_k_b=np.zeros(h),
        gt_v_w=draw(h, h),
        gt_v_b=np.zeros(h),
        head_w=draw(h, k),
        head_b=np.zeros(k),
        activate_final=activate_final,
    )


def gcn_norm(graph: Graph) -> sp.csr_matrix:
    """Symmetrically normalized self-looped adjacency as a CSR matrix."""
    n = graph.n_nodes
    d_tilde = graph.degrees().astype(np.float64) + 1.0
    inv_sqrt = 1.0 / np.sqrt(d_tilde)
    src = np.repeat(np.arange(n), np.diff(graph.indptr))
    rows = np.concatenate([src, np.arange(n)])
    cols = np.concatenate([graph.indices, np.arange(n)])
    vals = inv_sqrt[rows] * inv_sqrt[cols]
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def _relu(x):
    return np.maximum(x, 0.0)


def gcn_forward(params: ModelParams, p_mat, x: np.ndarray, cache: dict | None = None) -> np.ndarray:
    """Three propagation layers; the last one emits pre-activations unless
    activate_final is set."""
    z = np.asarray(x, dtype=np.float64)
    n_layers = len(params.gcn_w)
    if cache is not None:
        cache["gcn_m"] = []  # P @ Z_l per layer
        cache["gcn_pre"] = []
    for l, (w, b) in enumerate(zip(params.gcn_w, params.gcn_b)):
        m = p_mat @ z
        pre = m @ w + b
        if cache is not None:
            cache["gcn_m"].append(m)
            cache["gcn_pre"].append(pre)
        last = l == n_layers - 1
        z = pre if (last and not params.activate_final) else _relu(pre)
    if not np.all(np.isfinite(z)):
        raise FloatingPointError("non-finite GCN activations (divergence)")
    return z


def _gcn_backward(params: ModelParams, p_mat, x, cache, d_out, grads) -> None:
    n_layers = len(params.gcn_w)
    d = d_out
    for l in range(n_layers - 1, -1, -1):
        pre = cache["gcn_pre"][l]
        last = l == n_layers - 1
        if not (last and not params.activate_final):
            d = d * (pre > 0)
        m = cache["gcn_m"][l]
        grads[f"gcn_w{l}"] += m.T @ d
        grads[f"gcn_b{l}"] += d.sum(axis=0)
        if l > 0:
            # P is symmetric, so d(P @ Z) / dZ pulls back through P itself
            d = p_mat @ (d @ params.gcn_w[l].T)


def gt_forward(params: ModelParams, x: np.ndarray, gamma: float, cache: dict | None = None) -> np.ndarray:
    """Single-head linear attention with Frobenius-normalized Q and K.

    Computed in the factored order Q(K^T V), O(N h^2).
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    z0 = x @ params.input_proj_w + params.input_proj_b
    q = z0 @ params.gt_q_w + params.gt_q_b
    k = z0 @ params.gt_k_w + params.gt_k_b
    v = z0 @ params.gt_v_w + params.gt_v_b
    qn = np.linalg.norm(q)
    kn = np.linalg.norm(k)
    if qn == 0.0 or kn == 0.0:
        raise DegenerateProjectionError("Q or K has zero Frobenius norm")
    qt = q / qn
    kt = k / kn
    s = kt.sum(axis=0)  # K~^T 1
    denom = 1.0 + (qt @ s) / n  # diagonal of D
    w_kv = kt.T @ v  # h x h
    u = v + (qt @ w_kv) / n
    z_gt = gamma * (u / denom[:, None]) + (1.0 - gamma) * z0
    if cache is not None:
        cache.update(
            gt_z0=z0, gt_q=q, gt_k=k, gt_v=v, gt_qn=qn, gt_kn=kn, gt_qt=qt,
            gt_kt=kt, gt_s=s, gt_denom=denom, gt_wkv=w_kv, gt_u=u,
        )
    return z_gt


def _gt_backward(params: ModelParams, x, gamma, cache, d_out, grads) -> None:
    n = x.shape[0]
    z0, qt, kt = cache["gt_z0"], cache["gt_qt"], cache["gt_kt"]
    v, s, denom = cache["gt_v"], cache["gt_s"], cache["gt_denom"]
    w_kv, u = cache["gt_wkv"], cache["gt_u"]

    d_u = gamma * d_out / denom[:, None]
    d_denom = -gamma * (d_out * u).sum(axis=1) / denom**2
    d_z0 = (1.0 - gamma) * d_out

    # U = V + Q~ (K~^T V) / N
    d_v = d_u.copy()
    d_qt = (d_u @ w_kv.T) / n
    d_wkv = (qt.T @ d_u) / n
    d_kt = v @ d_wkv.T
    d_v += kt @ d_wkv

    # denom = 1 + Q~ s / N, s = K~^T 1
    d_qt += np.outer(d_denom, s) / n
    d_s = (qt.T @ d_denom) / n
    d_kt += d_s[None, :]

    # Q~ = Q / ||Q||_F
    d_q = (d_qt - (d_qt * qt).sum() * qt) / cache["gt_qn"]
    d_k = (d_kt - (d_kt * kt).sum() * kt) / cache["gt_kn"]

    grads["gt_q_w"] += z0.T @ d_q
    grads["gt_q_b"] += d_q.sum(axis=0)
    grads["gt_k_w"] += z0.T @ d_k
    grads["gt_k_b"] += d_k.sum(axis=0)
    grads["gt_v_w"] += z0.T @ d_v
    grads["gt_v_b"] += d_v.sum(axis=0)

    d_z0 += d_q @ params.gt_q_w.T + d_k @ params.gt_k_w.T + d_v @ params.gt_v_w.T
    grads["input_proj_w"] += x.T @ d_z0
    grads["input_proj_b"] += d_z0.sum(axis=0)


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def predict(params: ModelParams, fusion: FusionParams, p_mat, x: np.ndarray,
            cache: dict | None = None) -> np.ndarray:
    """Fused community-probability matrix, logistic over the linear head."""
    z_gcn = gcn_forward(params, p_mat, x, cache)
    z_gt = gt_forward(params, x, fusion.gamma, cache)
    fused = fusion.alpha * z_gcn + fusion.beta * z_gt
    logits = fused @ params.head_w + params.head_b
    c_pred = _sigmoid(logits)
    if cache is not None:
        cache.update(fused=fused, logits=logits, c_pred=c_pred)
    return c_pred


def _bce_masks(n_nodes: int, sampled: SampledLabels, pseudo: Cover | None):
    """Row masks for the two loss terms; pseudo excludes sampled nodes and
    all-zero pseudo rows."""
    is_sampled = np.zeros(n_nodes, dtype=bool)
    is_sampled[sampled.node_ids] = True
    if pseudo is None:
        pseudo_mask = np.zeros(n_nodes, dtype=bool)
    else:
        pseudo_mask = pseudo.memberships.any(axis=1) & ~is_sampled
    return is_sampled, pseudo_mask


def _bce_term(p, y):
    """Mean BCE over one node-set grid and its gradient w.r.t. raw p."""
    if p.shape[0] == 0:
        return 0.0, np.zeros_like(p)
    pc = np.clip(p, CLAMP_EPS, 1.0 - CLAMP_EPS)
    y = y.astype(np.float64)
    value = -np.mean(y * np.log(pc) + (1.0 - y) * np.log1p(-pc))
    inside = (p > CLAMP_EPS) & (p < 1.0 - CLAMP_EPS)
    grad = np.where(inside, (-y / pc + (1.0 - y) / (1.0 - pc)) / p.size, 0.0)
    return value, grad


def loss(c_pred: np.ndarray, sampled: SampledLabels, pseudo: Cover | None,
         lam1: float, lam2: float) -> float:
    value, _ = _loss_with_pred_grad(c_pred, sampled, pseudo, lam1, lam2)
    return value


def _loss_with_pred_grad(c_pred, sampled, pseudo, lam1, lam2):
    n, k = c_pred.shape
    is_sampled, pseudo_mask = _bce_masks(n, sampled, pseudo)
    d_pred = np.zeros_like(c_pred)
    val1, g1 = _bce_term(c_pred[sampled.node_ids], sampled.rows)
    d_pred[sampled.node_ids] += lam1 * g1
    total = lam1 * val1
    if lam2 != 0.0 and pseudo is not None and pseudo_mask.any():
        rows = np.flatnonzero(pseudo_mask)
        val2, g2 = _bce_term(c_pred[rows], pseudo.memberships[rows])
        d_pred[rows] += lam2 * g2
        total += lam2 * val2
    return float(total), d_pred


def loss_and_gradients(params: ModelParams, fusion: FusionParams, p_mat, x,
                       sampled: SampledLabels, pseudo: Cover | None,
                       lam1: float, lam2: float):
    """Exact analytic gradients of the dual-BCE objective."""
    cache: dict = {}
    c_pred = predict(params, fusion, p_mat, x, cache)
    value, d_pred = _loss_with_pred_grad(c_pred, sampled, pseudo, lam1, lam2)

    grads = {name: np.zeros_like(arr) for name, arr in params.named_arrays()}
    d_logits = d_pred * c_pred * (1.0 - c_pred)
    fused = cache["fused"]
    grads["head_w"] += fused.T @ d_logits
    grads["head_b"] += d_logits.sum(axis=0)
    d_fused = d_logits @ params.head_w.T
    _gcn_backward(params, p_mat, x, cache, fusion.alpha * d_fused, grads)
    _gt_backward(params, x, fusion.gamma, cache, fusion.beta * d_fused, grads)
    return value, grads


def gradients(params, fusion, p_mat, x, sampled, pseudo, lam1, lam2):
    _, grads = loss_and_gradients(params, fusion, p_mat, x, sampled, pseudo, lam1, lam2)
    return grads


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    t: int = 0

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        return cls(
            m={name: np.zeros_like(arr) for name, arr in params.named_arrays()},
            v={name: np.zeros_like(arr) for name, arr in params.named_arrays()},
        )


def adam_step(params: ModelParams, grads: dict, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
    """Bias-corrected Adam update, in place."""
    state.t += 1
    t = state.t
    for name, arr in params.named_arrays():
        g = grads[name]
        state.m[name] = beta1 * state.m[name] + (1.0 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1.0 - beta2) * g * g
        m_hat = state.m[name] / (1.0 - beta1**t)
        v_hat = state.v[name] / (1.0 - beta2**t)
        arr -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return params, state
