"""Dense tensor kernels backing the attention block and pose decoder.

Tensors are plain numpy arrays, row-major, float64 unless the caller feeds
float32 (the benchmark's reduced-precision mode).  Feature maps use the
(C, H, W) layout; the attention block permutes its own (H, W, C) views.
Every kernel here is pure and deterministic.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import BadPermutation, NonFiniteFunction, ShapeMismatch


def _pair(v) -> tuple[int, int]:
    if np.isscalar(v):
        return int(v), int(v)
    a, b = v
    return int(a), int(b)


def permute(x: np.ndarray, order) -> np.ndarray:
    """Reorder axes; inverse order restores the input bitwise."""
    x = np.asarray(x)
    order = tuple(int(a) for a in order)
    if sorted(order) != list(range(x.ndim)):
        raise BadPermutation(f"{order} is not a permutation of 0..{x.ndim - 1}")
    return np.transpose(x, order).copy()


def inverse_order(order) -> tuple[int, ...]:
    order = tuple(int(a) for a in order)
    inv = [0] * len(order)
    for i, a in enumerate(order):
        inv[a] = i
    return tuple(inv)


def pool_last_axis(x: np.ndarray, kind: str) -> np.ndarray:
    """Reduce the final axis to extent 1 by max or mean."""
    x = np.asarray(x)
    if kind == "max":
        return x.max(axis=-1, keepdims=True)
    if kind == "avg":
        return x.mean(axis=-1, keepdims=True)
    raise ValueError(f"unknown pooling kind {kind!r}")


def conv2d(x: np.ndarray, w: np.ndarray, b=None, stride=1, pad=0, groups: int = 1) -> np.ndarray:
    """Grouped 2-D cross-correlation with zero padding.

    x: (C_in, H, W); w: (C_out, C_in/groups, kh, kw); b: (C_out,) or None.
    Output spatial extent is floor((H + 2*pad - kh)/stride) + 1.
    """
    x = np.asarray(x)
    w = np.asarray(w)
    if x.ndim != 3 or w.ndim != 4:
        raise ShapeMismatch(f"conv2d expects (C,H,W) input and 4-D weights, got {x.shape}, {w.shape}")
    c_in, h, wd = x.shape
    c_out, c_per_g, kh, kw = w.shape
    if groups < 1 or c_in % groups or c_out % groups:
        raise ShapeMismatch(f"groups={groups} must divide C_in={c_in} and C_out={c_out}")
    if c_per_g != c_in // groups:
        raise ShapeMismatch(f"weight channel dim {c_per_g} != C_in/groups = {c_in // groups}")
    sh, sw = _pair(stride)
    ph, pw = _pair(pad)
    h_out = (h + 2 * ph - kh) // sh + 1
    w_out = (wd + 2 * pw - kw) // sw + 1
    if h_out < 1 or w_out < 1:
        raise ShapeMismatch(f"kernel {kh}x{kw} exceeds padded input {h + 2 * ph}x{wd + 2 * pw}")

    dtype = np.result_type(x, w)
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw))).astype(dtype, copy=False)
    # (C_in, H_out, W_out, kh, kw) strided view, then one matmul per group.
    win = sliding_window_view(xp, (kh, kw), axis=(1, 2))[:, ::sh, ::sw]
    out = np.empty((c_out, h_out, w_out), dtype=dtype)
    og = c_out // groups
    for g in range(groups):
        xs = win[g * c_per_g:(g + 1) * c_per_g]
        cols = xs.transpose(1, 2, 0, 3, 4).reshape(h_out * w_out, c_per_g * kh * kw)
        wg = w[g * og:(g + 1) * og].reshape(og, -1).astype(dtype, copy=False)
        out[g * og:(g + 1) * og] = (cols @ wg.T).T.reshape(og, h_out, w_out)
    if b is not None:
        b = np.asarray(b)
        if b.shape != (c_out,):
            raise ShapeMismatch(f"bias must have shape ({c_out},), got {b.shape}")
        out += b[:, None, None].astype(dtype, copy=False)
    return out


def layernorm(x: np.ndarray, gamma: np.ndarray, beta: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Normalize over the channel axis at each spatial position.

    x: (C, H, W); gamma, beta: (C,).
    """
    x = np.asarray(x)
    gamma = np.asarray(gamma)
    beta = np.asarray(beta)
    if x.ndim != 3 or gamma.shape != (x.shape[0],) or beta.shape != (x.shape[0],):
        raise ShapeMismatch(f"layernorm shapes: x {x.shape}, gamma {gamma.shape}, beta {beta.shape}")
    mu = x.mean(axis=0, keepdims=True)
    var = x.var(axis=0, keepdims=True)
    z = (x - mu) / np.sqrt(var + eps)
    return z * gamma[:, None, None] + beta[:, None, None]


def activation(x: np.ndarray, kind: str) -> np.ndarray:
    """Elementwise relu or sigmoid.

    The sigmoid is evaluated branch-wise so large |x| cannot overflow, and
    the result is nudged into the open interval (0, 1): saturated values
    land one ulp inside the bounds instead of on them.
    """
    x = np.asarray(x)
    if kind == "relu":
        return np.maximum(x, 0)
    if kind == "sigmoid":
        dtype = x.dtype if x.dtype in (np.float32, np.float64) else np.float64
        x = x.astype(dtype, copy=False)
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        info = np.finfo(dtype)
        return np.clip(out, info.tiny, 1.0 - info.epsneg)
    raise ValueError(f"unknown activation kind {kind!r}")


def concat_channels(xs) -> np.ndarray:
    """Concatenate along axis 0; all other extents must match."""
    xs = [np.asarray(x) for x in xs]
    if not xs:
        raise ShapeMismatch("need at least one tensor to concatenate")
    rest = xs[0].shape[1:]
    for x in xs[1:]:
        if x.ndim != xs[0].ndim or x.shape[1:] != rest:
            raise ShapeMismatch(f"non-channel extents differ: {x.shape[1:]} vs {rest}")
    return np.concatenate(xs, axis=0)


def affine(x: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """y = W @ flatten(x) + b."""
    x = np.asarray(x).ravel()
    W = np.asarray(W)
    b = np.asarray(b)
    if W.ndim != 2 or W.shape[1] != x.size or b.shape != (W.shape[0],):
        raise ShapeMismatch(f"affine shapes: x {x.size}, W {W.shape}, b {b.shape}")
    return W @ x + b


def finite_diff_grad(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function, one probe per element.

    Intended for small verification problems; cost is 2*size evaluations.
    Raises NonFiniteFunction if any probe returns NaN/Inf.
    """
    if h <= 0:
        raise ValueError("step h must be positive")
    x = np.asarray(x, dtype=float)
    grad = np.zeros_like(x)
    flat = grad.ravel()
    xf = x.copy().ravel()
    for i in range(xf.size):
        orig = xf[i]
        xf[i] = orig + h
        fp = float(f(xf.reshape(x.shape)))
        xf[i] = orig - h
        fm = float(f(xf.reshape(x.shape)))
        xf[i] = orig
        if not (np.isfinite(fp) and np.isfinite(fm)):
            raise NonFiniteFunction(f"objective non-finite at element {i}")
        flat[i] = (fp - fm) / (2.0 * h)
    return grad
