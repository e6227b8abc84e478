"""Pose decoder: squeeze, normalized downsample, two separable-conv residual
blocks, and a global-pool head projecting to a 7-parameter pose vector.

Block structure: a 7x7 grouped (3-group) depthwise stage, two 1x1 pointwise
convs with one ReLU between them, a learnable residual scale gamma
(initialized to 1e-6 so each block starts as a near-identity), and the skip
connection back to the block input.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import BadChannelCount, ShapeMismatch
from .kernels import activation, affine, conv2d, layernorm
from .se3 import PoseVec, quat_normalize

GAMMA_INIT = 1e-6
LN_EPS = 1e-6


@dataclass(frozen=True)
class DscBlockParams:
    dw_w: np.ndarray   # (C, C/3, 7, 7), groups=3
    dw_b: np.ndarray
    pw1_w: np.ndarray  # (C, C, 1, 1)
    pw1_b: np.ndarray
    pw2_w: np.ndarray
    pw2_b: np.ndarray
    gamma: float

    def astype(self, dtype) -> "DscBlockParams":
        return DscBlockParams(
            self.dw_w.astype(dtype), self.dw_b.astype(dtype),
            self.pw1_w.astype(dtype), self.pw1_b.astype(dtype),
            self.pw2_w.astype(dtype), self.pw2_b.astype(dtype),
            self.gamma,
        )


@dataclass(frozen=True)
class DecoderParams:
    squeeze_w: np.ndarray  # (C, C_in, 1, 1)
    squeeze_b: np.ndarray
    ln_gamma: np.ndarray
    ln_beta: np.ndarray
    down_w: np.ndarray     # (C, C, 2, 2), stride 2
    down_b: np.ndarray
    blocks: tuple
    head_w: np.ndarray     # (7, C)
    head_b: np.ndarray

    def astype(self, dtype) -> "DecoderParams":
        return DecoderParams(
            self.squeeze_w.astype(dtype), self.squeeze_b.astype(dtype),
            self.ln_gamma.astype(dtype), self.ln_beta.astype(dtype),
            self.down_w.astype(dtype), self.down_b.astype(dtype),
            tuple(b.astype(dtype) for b in self.blocks),
            self.head_w.astype(dtype), self.head_b.astype(dtype),
        )


def _uniform(rng, shape, fan_in):
    k = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-k, k, size=shape)


def decoder_init(in_channels: int, channels: int, seed: int = 0) -> DecoderParams:
    """Seeded parameters; ``channels`` is the post-squeeze width.

    Raises BadChannelCount unless channels is divisible by 3 (the grouped
    depthwise stage needs it).  Conv/affine weights use the fan-in uniform
    rule; every block's gamma starts at 1e-6.
    """
    if channels % 3 != 0:
        raise BadChannelCount(f"channels={channels} not divisible by 3")
    if in_channels < 1 or channels < 3:
        raise BadChannelCount(f"need in_channels >= 1 and channels >= 3, got {in_channels}, {channels}")
    rng = np.random.default_rng(seed)
    c = channels
    blocks = []
    for _ in range(2):
        blocks.append(
            DscBlockParams(
                dw_w=_uniform(rng, (c, c // 3, 7, 7), (c // 3) * 49),
                dw_b=_uniform(rng, (c,), (c // 3) * 49),
                pw1_w=_uniform(rng, (c, c, 1, 1), c),
                pw1_b=_uniform(rng, (c,), c),
                pw2_w=_uniform(rng, (c, c, 1, 1), c),
                pw2_b=_uniform(rng, (c,), c),
                gamma=GAMMA_INIT,
            )
        )
    return DecoderParams(
        squeeze_w=_uniform(rng, (c, in_channels, 1, 1), in_channels),
        squeeze_b=_uniform(rng, (c,), in_channels),
        ln_gamma=np.ones(c),
        ln_beta=np.zeros(c),
        down_w=_uniform(rng, (c, c, 2, 2), c * 4),
        down_b=_uniform(rng, (c,), c * 4),
        blocks=tuple(blocks),
        head_w=_uniform(rng, (7, c), c),
        head_b=_uniform(rng, (7,), c),
    )


def dsc_block_forward(x: np.ndarray, block: DscBlockParams) -> np.ndarray:
    """x + gamma * pw2(relu(pw1(depthwise7x7(x)))); shape preserved."""
    x = np.asarray(x)
    if x.ndim != 3 or x.shape[0] % 3 != 0:
        raise ShapeMismatch(f"block input must be (C,H,W) with C divisible by 3, got {x.shape}")
    y = conv2d(x, block.dw_w, block.dw_b, pad=3, groups=3)
    y = activation(conv2d(y, block.pw1_w, block.pw1_b), "relu")
    y = conv2d(y, block.pw2_w, block.pw2_b)
    return x + block.gamma * y


def decoder_forward(f: np.ndarray, params: DecoderParams) -> PoseVec:
    """Feature map (C_in, H, W) to a pose vector [t(3), q(4)].

    The raw quaternion from the head is normalized (and canonicalized);
    a degenerate raw norm surfaces as ZeroQuaternion rather than being
    silently replaced.
    """
    f = np.asarray(f)
    if f.ndim != 3 or f.shape[0] != params.squeeze_w.shape[1]:
        raise ShapeMismatch(
            f"expected ({params.squeeze_w.shape[1]}, H, W) input, got {f.shape}"
        )
    x = activation(conv2d(f, params.squeeze_w, params.squeeze_b), "relu")
    x = layernorm(x, params.ln_gamma, params.ln_beta, eps=LN_EPS)
    x = conv2d(x, params.down_w, params.down_b, stride=2)
    for block in params.blocks:
        x = dsc_block_forward(x, block)
    feats = x.mean(axis=(1, 2))
    y = affine(feats, params.head_w, params.head_b)
    return PoseVec(y[:3], quat_normalize(y[3:]))


def decoder_grad_check(f: np.ndarray, params: DecoderParams, h: float = 1e-4):
    """Step-size consistency of d loss(decoder(f)) / d(gamma, head weights).

    The objective is the geometric pose loss against a fixed reference
    pose, so the gradients exercise the full forward path including the
    quaternion normalization.
    """
    from .checks import GradCheckEntry, two_step_rel_err
    from .losses import LossWeights, geometric_loss
    from .se3 import rotmat_to_quat, rotmat_from_axis_angle

    target = PoseVec(
        np.array([0.1, -0.2, 0.15]),
        rotmat_to_quat(rotmat_from_axis_angle([1.0, 2.0, -1.0], 0.3)),
    )
    weights = LossWeights()

    def loss_with(p: DecoderParams) -> float:
        return geometric_loss(decoder_forward(f, p), target, weights)

    entries = []
    for i, block in enumerate(params.blocks):
        def f_gamma(v, i=i):
            blocks = list(params.blocks)
            blocks[i] = replace(blocks[i], gamma=float(v))
            return loss_with(replace(params, blocks=tuple(blocks)))
        err = two_step_rel_err(f_gamma, block.gamma, h)
        entries.append(GradCheckEntry(f"decoder gamma block {i}", err, 0.05))

    worst = 0.0
    for idx in np.ndindex(params.head_w.shape):
        def f_w(v, idx=idx):
            w = params.head_w.copy()
            w[idx] = v
            return loss_with(replace(params, head_w=w))
        worst = max(worst, two_step_rel_err(f_w, params.head_w[idx], h))
    entries.append(GradCheckEntry("decoder head affine", worst, 0.05))
    return entries
