"""Training losses: homoscedastic-weighted geometric pose loss with analytic
weight gradients, and the multi-scale robust optical-flow loss with its
pyramid constructor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadExtent, BadPenalty, InvalidQuaternion, ShapeMismatch
from .se3 import PoseVec, quat_log

PYRAMID_LEVELS = (2, 3, 4, 5, 6)
FLOW_EPS_DEFAULT = 0.01
FLOW_Q_DEFAULT = 0.4


@dataclass(frozen=True)
class LossWeights:
    """Learnable balance scalars; lam_t starts at 0, lam_r at -3."""

    lam_t: float = 0.0
    lam_r: float = -3.0


def _canonical_unit(q, which: str) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if abs(n - 1.0) > 1e-6:
        raise InvalidQuaternion(f"{which} quaternion norm {n} not within 1e-6 of 1")
    return -q if q[0] < 0 else q


def _errors_l1(pred: PoseVec, target: PoseVec) -> tuple[float, float]:
    qp = _canonical_unit(pred.q, "predicted")
    qt = _canonical_unit(target.q, "target")
    t_err = float(np.sum(np.abs(target.t - pred.t)))
    r_err = float(np.sum(np.abs(quat_log(qt) - quat_log(qp))))
    return t_err, r_err


def geometric_loss(pred: PoseVec, target: PoseVec, w: LossWeights) -> float:
    """L1 translation and quaternion-log errors, each weighted by exp(-lam)
    plus the additive lam regularizer.

    Equal poses give exactly lam_t + lam_r.  Both quaternions are
    canonicalized first, so sign flips of either argument cannot change
    the value.
    """
    t_err, r_err = _errors_l1(pred, target)
    return t_err * np.exp(-w.lam_t) + w.lam_t + r_err * np.exp(-w.lam_r) + w.lam_r


def geometric_loss_lambda_grad(pred: PoseVec, target: PoseVec, w: LossWeights) -> tuple[float, float]:
    """Closed-form d loss / d(lam_t, lam_r): 1 - err * exp(-lam)."""
    t_err, r_err = _errors_l1(pred, target)
    return 1.0 - t_err * np.exp(-w.lam_t), 1.0 - r_err * np.exp(-w.lam_r)


def descend_loss_weights(
    t_err: float, r_err: float, steps: int = 50, lr: float = 0.1, start: LossWeights = LossWeights()
) -> tuple[list[float], LossWeights]:
    """Plain gradient descent on the two weights with the pose errors fixed.

    Returns the loss at every iterate (steps+1 values) and the final
    weights.  The objective is convex in each weight, so moderate step
    sizes decrease it monotonically.
    """
    lam_t, lam_r = start.lam_t, start.lam_r

    def value():
        return t_err * np.exp(-lam_t) + lam_t + r_err * np.exp(-lam_r) + lam_r

    history = [float(value())]
    for _ in range(steps):
        lam_t -= lr * (1.0 - t_err * np.exp(-lam_t))
        lam_r -= lr * (1.0 - r_err * np.exp(-lam_r))
        history.append(float(value()))
    return history, LossWeights(lam_t, lam_r)


@dataclass(frozen=True)
class FlowPyramid:
    """2-channel flow fields at levels 2..6; level l is (H/2^(l-1), W/2^(l-1), 2)."""

    levels: tuple
    height: int
    width: int

    def level(self, l: int) -> np.ndarray:
        if l not in PYRAMID_LEVELS:
            raise BadExtent(f"level {l} outside {PYRAMID_LEVELS}")
        return self.levels[l - 2]


def pad_to_multiple(flow: np.ndarray, multiple: int = 32) -> np.ndarray:
    """Zero-pad bottom/right so both spatial extents divide ``multiple``."""
    flow = np.asarray(flow)
    h, w = flow.shape[:2]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph == 0 and pw == 0:
        return flow
    return np.pad(flow, ((0, ph), (0, pw), (0, 0)))


def _halve(flow: np.ndarray) -> np.ndarray:
    h, w, c = flow.shape
    # 2x2 average pooling; magnitudes halve with the resolution.
    return flow.reshape(h // 2, 2, w // 2, 2, c).mean(axis=(1, 3)) * 0.5


def flow_pyramid(flow: np.ndarray) -> FlowPyramid:
    """Build levels 2..6 by repeated 2x2 mean pooling with flow halving.

    Raises BadExtent unless both extents are positive multiples of 32
    (use pad_to_multiple first).
    """
    flow = np.asarray(flow, dtype=float)
    if flow.ndim != 3 or flow.shape[2] != 2:
        raise ShapeMismatch(f"expected (H, W, 2) flow, got {flow.shape}")
    h, w = flow.shape[:2]
    if h < 32 or w < 32 or h % 32 or w % 32:
        raise BadExtent(f"extents {h}x{w} must be positive multiples of 32")
    levels = []
    cur = flow
    for _ in PYRAMID_LEVELS:
        cur = _halve(cur)
        levels.append(cur)
    return FlowPyramid(tuple(levels), h, w)


def flow_robust_loss(pred: FlowPyramid, gt: FlowPyramid, theta=None,
                     eps: float = FLOW_EPS_DEFAULT, q: float = FLOW_Q_DEFAULT) -> float:
    """Sum over levels of theta_l * sum over pixels of (|du|+|dv| + eps)^q.

    The sub-unit exponent q tempers large-magnitude outliers; eps keeps the
    power well-defined at zero error.
    """
    if not 0.0 < q < 1.0:
        raise BadPenalty(f"penalty exponent q={q} must lie in (0, 1)")
    if eps <= 0.0:
        raise BadPenalty(f"noise constant eps={eps} must be positive")
    if theta is None:
        theta = np.ones(len(PYRAMID_LEVELS))
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (len(PYRAMID_LEVELS),):
        raise ShapeMismatch(f"theta must have {len(PYRAMID_LEVELS)} entries, got {theta.shape}")
    total = 0.0
    for i, l in enumerate(PYRAMID_LEVELS):
        p = pred.level(l)
        g = gt.level(l)
        if p.shape != g.shape:
            raise ShapeMismatch(f"level {l}: {p.shape} vs {g.shape}")
        d = np.abs(p - g).sum(axis=-1)
        total += theta[i] * float(np.sum((d + eps) ** q))
    return total
