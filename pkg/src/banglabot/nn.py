"""Minimal float64 neural-net core with hand-written gradients.

Shared by the joint intent+entity classifier and the learned dialogue
policy: parameter initialization, Adam, layer norm, multi-head
self-attention encoder blocks (pre-norm), and softmax cross-entropy.
Everything is deterministic for a fixed seed; gradients are verified
against finite differences in the test suite.

Shapes follow the convention x: [batch, seq, embed], mask: [batch, seq]
with 1.0 marking real positions.
"""

from __future__ import annotations

import functools
import math

import numpy as np
from scipy.special import erf

from . import kernels

LN_EPS = 1e-5
NEG_INF = -1e9


class NonFiniteLoss(RuntimeError):
    pass


def init_uniform(rng: np.random.Generator, *shape: int, scale: float = 0.1) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)


class Adam:
    """Adam over a named parameter dict, delegating the update to a kernel backend."""

    def __init__(self, params: dict[str, np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8,
                 backend=None):
        self.params = params
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.backend = backend if backend is not None else kernels.ACTIVE

    def step(self, grads: dict[str, np.ndarray]) -> None:
        self.t += 1
        for name, p in self.params.items():
            g = grads[name]
            self.backend.adam_step(
                p.reshape(-1), np.ascontiguousarray(g.reshape(-1)),
                self.m[name].reshape(-1), self.v[name].reshape(-1),
                self.t, self.lr, self.beta1, self.beta2, self.eps)


# ---------------------------------------------------------------------------
# Primitive layers
# ---------------------------------------------------------------------------

def layer_norm_forward(x: np.ndarray, g: np.ndarray, b: np.ndarray):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + LN_EPS)
    xhat = xc * inv
    return g * xhat + b, (xhat, inv)


def layer_norm_backward(dy: np.ndarray, g: np.ndarray, cache):
    xhat, inv = cache
    dg = (dy * xhat).sum(axis=tuple(range(dy.ndim - 1)))
    db = dy.sum(axis=tuple(range(dy.ndim - 1)))
    dxhat = dy * g
    mean1 = dxhat.mean(axis=-1, keepdims=True)
    mean2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
    dx = inv * (dxhat - mean1 - xhat * mean2)
    return dx, dg, db


_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def gelu(z: np.ndarray) -> np.ndarray:
    """Exact (erf) GELU; smooth, so finite-difference checks hold everywhere."""
    return 0.5 * z * (1.0 + erf(z / _SQRT2))


def gelu_grad(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + erf(z / _SQRT2)) + z * _INV_SQRT_2PI * np.exp(-0.5 * z * z)


def softmax(z: np.ndarray, axis: int = -1) -> np.ndarray:
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_xent(logits: np.ndarray, targets: np.ndarray,
                 weights: np.ndarray | None = None):
    """Mean cross-entropy over rows; returns (loss, dlogits, probs).

    `weights` (0/1 per row) masks rows out of both the mean and the gradient.
    """
    n, _ = logits.shape
    probs = softmax(logits, axis=-1)
    if weights is None:
        weights = np.ones(n)
    total = float(weights.sum())
    if total == 0.0:
        return 0.0, np.zeros_like(logits), probs
    picked = probs[np.arange(n), targets]
    loss = float(-(weights * np.log(np.maximum(picked, 1e-300))).sum() / total)
    dlogits = probs.copy()
    dlogits[np.arange(n), targets] -= 1.0
    dlogits *= (weights / total)[:, None]
    if not math.isfinite(loss):
        raise NonFiniteLoss(f"cross-entropy diverged (loss={loss})")
    return loss, dlogits, probs


@functools.lru_cache(maxsize=64)
def positional_encoding(seq_len: int, dim: int) -> np.ndarray:
    pos = np.arange(seq_len)[:, None].astype(np.float64)
    i = np.arange(dim)[None, :].astype(np.float64)
    angle = pos / np.power(10000.0, (2.0 * (i // 2)) / dim)
    pe = np.zeros((seq_len, dim))
    pe[:, 0::2] = np.sin(angle[:, 0::2])
    pe[:, 1::2] = np.cos(angle[:, 1::2])
    pe.setflags(write=False)
    return pe


# ---------------------------------------------------------------------------
# Transformer encoder
# ---------------------------------------------------------------------------

ENCODER_PARAM_SUFFIXES = (
    "ln1_g", "ln1_b", "wq", "bq", "wk", "bk", "wv", "bv", "wo", "bo",
    "ln2_g", "ln2_b", "w1", "b1", "w2", "b2",
)


def init_encoder_params(rng: np.random.Generator, layers: int, embed_dim: int,
                        ffn_dim: int | None = None) -> dict[str, np.ndarray]:
    """Per-layer attention + feedforward parameters.

    Weight matrices and biases draw from uniform(-0.1, 0.1); norm gains and
    shifts start at 1 and 0 (a near-zero gain would mute the whole block).
    """
    ffn_dim = ffn_dim or 2 * embed_dim
    params: dict[str, np.ndarray] = {}
    for layer in range(layers):
        p = f"enc{layer}_"
        params[p + "ln1_g"] = np.ones(embed_dim)
        params[p + "ln1_b"] = np.zeros(embed_dim)
        for name, shape in (("wq", (embed_dim, embed_dim)), ("wk", (embed_dim, embed_dim)),
                            ("wv", (embed_dim, embed_dim)), ("wo", (embed_dim, embed_dim))):
            params[p + name] = init_uniform(rng, *shape)
        for name in ("bq", "bk", "bv", "bo"):
            params[p + name] = init_uniform(rng, embed_dim)
        params[p + "ln2_g"] = np.ones(embed_dim)
        params[p + "ln2_b"] = np.zeros(embed_dim)
        params[p + "w1"] = init_uniform(rng, embed_dim, ffn_dim)
        params[p + "b1"] = init_uniform(rng, ffn_dim)
        params[p + "w2"] = init_uniform(rng, ffn_dim, embed_dim)
        params[p + "b2"] = init_uniform(rng, embed_dim)
    return params


def _split_heads(x: np.ndarray, heads: int) -> np.ndarray:
    b, t, e = x.shape
    return x.reshape(b, t, heads, e // heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    b, h, t, dk = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dk)


def encoder_forward(params: dict[str, np.ndarray], layers: int, heads: int,
                    x: np.ndarray, mask: np.ndarray):
    """Pre-norm transformer stack with sinusoidal positions; returns (y, caches)."""
    if layers == 0:
        return x, []
    b, t, e = x.shape
    x = x + positional_encoding(t, e)[None, :, :]
    key_bias = (1.0 - mask)[:, None, None, :] * NEG_INF  # [B,1,1,T]
    caches = []
    for layer in range(layers):
        p = f"enc{layer}_"
        h1, ln1_cache = layer_norm_forward(x, params[p + "ln1_g"], params[p + "ln1_b"])
        q = _split_heads(h1 @ params[p + "wq"] + params[p + "bq"], heads)
        k = _split_heads(h1 @ params[p + "wk"] + params[p + "bk"], heads)
        v = _split_heads(h1 @ params[p + "wv"] + params[p + "bv"], heads)
        scale = 1.0 / math.sqrt(e // heads)
        scores = q @ k.swapaxes(-1, -2) * scale + key_bias
        attn = softmax(scores, axis=-1)
        ctx = _merge_heads(attn @ v)
        attn_out = ctx @ params[p + "wo"] + params[p + "bo"]
        x2 = x + attn_out
        h2, ln2_cache = layer_norm_forward(x2, params[p + "ln2_g"], params[p + "ln2_b"])
        z1 = h2 @ params[p + "w1"] + params[p + "b1"]
        r = gelu(z1)
        y = x2 + r @ params[p + "w2"] + params[p + "b2"]
        caches.append((x, h1, ln1_cache, q, k, v, attn, ctx, x2, h2, ln2_cache, z1, r, scale))
        x = y
    return x, caches


def encoder_backward(params: dict[str, np.ndarray], layers: int, heads: int,
                     caches, dy: np.ndarray):
    """Backward through the stack; returns (dx, grads)."""
    grads: dict[str, np.ndarray] = {}
    if layers == 0:
        return dy, grads
    for layer in reversed(range(layers)):
        p = f"enc{layer}_"
        x, h1, ln1_cache, q, k, v, attn, ctx, x2, h2, ln2_cache, z1, r, scale = caches[layer]
        b, t, e = x.shape
        flat = lambda a: a.reshape(-1, a.shape[-1])

        # y = x2 + gelu(h2@w1+b1)@w2+b2
        dr = dy @ params[p + "w2"].T
        grads[p + "w2"] = flat(r).T @ flat(dy)
        grads[p + "b2"] = flat(dy).sum(axis=0)
        dz1 = dr * gelu_grad(z1)
        grads[p + "w1"] = flat(h2).T @ flat(dz1)
        grads[p + "b1"] = flat(dz1).sum(axis=0)
        dh2 = dz1 @ params[p + "w1"].T
        dx2_from_ln, grads[p + "ln2_g"], grads[p + "ln2_b"] = layer_norm_backward(
            dh2, params[p + "ln2_g"], ln2_cache)
        dx2 = dy + dx2_from_ln

        # x2 = x + (merge(attn@v))@wo+bo
        dattn_out = dx2
        grads[p + "wo"] = flat(ctx).T @ flat(dattn_out)
        grads[p + "bo"] = flat(dattn_out).sum(axis=0)
        dctx = _split_heads(dattn_out @ params[p + "wo"].T, heads)
        dattn = dctx @ v.swapaxes(-1, -2)
        dv = attn.swapaxes(-1, -2) @ dctx
        dscores = attn * (dattn - (dattn * attn).sum(axis=-1, keepdims=True))
        dq = dscores @ k * scale
        dk = dscores.swapaxes(-1, -2) @ q * scale

        dh1 = np.zeros_like(h1)
        for name, grad_heads in (("wq", dq), ("wk", dk), ("wv", dv)):
            merged = _merge_heads(grad_heads)
            grads[p + "w" + name[1]] = flat(h1).T @ flat(merged)
            grads[p + "b" + name[1]] = flat(merged).sum(axis=0)
            dh1 += merged @ params[p + name].T
        dx_from_ln, grads[p + "ln1_g"], grads[p + "ln1_b"] = layer_norm_backward(
            dh1, params[p + "ln1_g"], ln1_cache)
        dy = dx2 + dx_from_ln
    return dy, grads
