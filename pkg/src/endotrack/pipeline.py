"""Four-stream feature front end.

Two scene features (one per frame) and a motion feature (from the optical
flow, zero-padded to 3 channels) come from a shared 2-stage strided conv
stack with seeded random weights.  The joint feature comes from the stacked
frame pair through stem conv + attention, twice.  All four maps are
standardized per channel and concatenated in the order
(current scene, previous scene, motion, joint).

The extractors are randomly initialized stand-ins, not trained networks;
the pipeline's guarantees are structural (shapes, fusion order, the
attention math), not representational.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .attention import AttentionParams, attention_forward, attention_init
from .errors import BadExtent, ShapeMismatch
from .kernels import activation, concat_channels, conv2d


@dataclass(frozen=True)
class PipelineConfig:
    height: int = 64
    width: int = 64
    scene_channels: tuple = (8, 8)
    joint_channels: tuple = (8, 8)
    norm_eps: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        for name in ("height", "width"):
            if getattr(self, name) < 4:
                raise BadExtent(f"{name} must be >= 4, got {getattr(self, name)}")
        for name in ("scene_channels", "joint_channels"):
            pair = tuple(int(c) for c in getattr(self, name))
            if len(pair) != 2 or min(pair) < 1:
                raise BadExtent(f"{name} must be two positive extents, got {pair}")
            object.__setattr__(self, name, pair)
        if self.norm_eps <= 0:
            raise BadExtent("norm_eps must be positive")

    @property
    def fused_channels(self) -> int:
        return 3 * self.scene_channels[1] + self.joint_channels[1]


@dataclass(frozen=True)
class PipelineParams:
    config: PipelineConfig
    scene1_w: np.ndarray
    scene1_b: np.ndarray
    scene2_w: np.ndarray
    scene2_b: np.ndarray
    joint1_w: np.ndarray
    joint1_b: np.ndarray
    att1: AttentionParams
    joint2_w: np.ndarray
    joint2_b: np.ndarray
    att2: AttentionParams

    def astype(self, dtype) -> "PipelineParams":
        return replace(
            self,
            scene1_w=self.scene1_w.astype(dtype), scene1_b=self.scene1_b.astype(dtype),
            scene2_w=self.scene2_w.astype(dtype), scene2_b=self.scene2_b.astype(dtype),
            joint1_w=self.joint1_w.astype(dtype), joint1_b=self.joint1_b.astype(dtype),
            att1=self.att1.astype(dtype),
            joint2_w=self.joint2_w.astype(dtype), joint2_b=self.joint2_b.astype(dtype),
            att2=self.att2.astype(dtype),
        )


def _conv_init(rng, c_out, c_in, kh, kw):
    k = 1.0 / np.sqrt(c_in * kh * kw)
    return rng.uniform(-k, k, size=(c_out, c_in, kh, kw)), rng.uniform(-k, k, size=(c_out,))


def init_pipeline(config: PipelineConfig) -> PipelineParams:
    rng = np.random.default_rng(config.seed)
    s1, s2 = config.scene_channels
    j1, j2 = config.joint_channels
    scene1_w, scene1_b = _conv_init(rng, s1, 3, 3, 3)
    scene2_w, scene2_b = _conv_init(rng, s2, s1, 3, 3)
    joint1_w, joint1_b = _conv_init(rng, j1, 6, 3, 3)
    joint2_w, joint2_b = _conv_init(rng, j2, j1, 3, 3)
    att1 = attention_init(int(rng.integers(2**32)))
    att2 = attention_init(int(rng.integers(2**32)))
    return PipelineParams(
        config,
        scene1_w, scene1_b, scene2_w, scene2_b,
        joint1_w, joint1_b, att1, joint2_w, joint2_b, att2,
    )


def _stem(x, w, b):
    return activation(conv2d(x, w, b, stride=2, pad=1), "relu")


def extract_scene(img: np.ndarray, params: PipelineParams) -> np.ndarray:
    """Single image (3, H, W) to a (C, H/4, W/4) feature map."""
    img = np.asarray(img)
    cfg = params.config
    if img.shape != (3, cfg.height, cfg.width):
        raise ShapeMismatch(f"expected (3, {cfg.height}, {cfg.width}), got {img.shape}")
    return _stem(_stem(img, params.scene1_w, params.scene1_b), params.scene2_w, params.scene2_b)


def extract_motion(flow: np.ndarray, params: PipelineParams) -> np.ndarray:
    """Optical flow (2, H, W), zero-padded to 3 channels, through the same
    extractor as the scene features."""
    flow = np.asarray(flow)
    cfg = params.config
    if flow.shape != (2, cfg.height, cfg.width):
        raise ShapeMismatch(f"expected (2, {cfg.height}, {cfg.width}), got {flow.shape}")
    padded = np.concatenate([flow, np.zeros((1,) + flow.shape[1:], dtype=flow.dtype)])
    return extract_scene(padded, params)


def _attend(x: np.ndarray, att: AttentionParams) -> np.ndarray:
    # Attention operates on (H, W, C) views of the (C, H, W) map.
    return attention_forward(x.transpose(1, 2, 0), att).transpose(2, 0, 1)


def extract_joint(pair: np.ndarray, params: PipelineParams) -> np.ndarray:
    """Stacked frame pair (6, H, W) through stem + attention, twice."""
    pair = np.asarray(pair)
    cfg = params.config
    if pair.shape != (6, cfg.height, cfg.width):
        raise ShapeMismatch(f"expected (6, {cfg.height}, {cfg.width}), got {pair.shape}")
    x = _attend(_stem(pair, params.joint1_w, params.joint1_b), params.att1)
    return _attend(_stem(x, params.joint2_w, params.joint2_b), params.att2)


def channel_standardize(x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Zero mean, unit variance per channel over the spatial extent."""
    x = np.asarray(x)
    mu = x.mean(axis=(1, 2), keepdims=True)
    var = x.var(axis=(1, 2), keepdims=True)
    return (x - mu) / np.sqrt(var + eps)


def fuse(f_cur, f_prev, f_motion, f_joint, eps: float = 1e-6) -> np.ndarray:
    """Standardize each stream, then concatenate channels in fixed order."""
    maps = [np.asarray(m) for m in (f_cur, f_prev, f_motion, f_joint)]
    spatial = maps[0].shape[1:]
    for m in maps[1:]:
        if m.shape[1:] != spatial:
            raise ShapeMismatch(f"spatial extents differ: {m.shape[1:]} vs {spatial}")
    return concat_channels([channel_standardize(m, eps) for m in maps])


def pipeline_forward(img_prev: np.ndarray, img_cur: np.ndarray, flow: np.ndarray,
                     params: PipelineParams) -> np.ndarray:
    """Full front end for one frame pair; returns the fused feature map."""
    f_cur = extract_scene(img_cur, params)
    f_prev = extract_scene(img_prev, params)
    f_motion = extract_motion(flow, params)
    f_joint = extract_joint(np.concatenate([img_prev, img_cur]), params)
    return fuse(f_cur, f_prev, f_motion, f_joint, params.config.norm_eps)
