"""Text trajectory files, the run configuration, and parameter archives.

Trajectory format: '#' comment lines anywhere, then one header line
``unit=<mm|cm> k=<stride>``, then one row per pose::

    index tx ty tz qx qy qz qw

The quaternion is scalar-LAST on disk (the common trajectory-file layout)
and converted to the scalar-first internal form at this boundary.  Floats
are written with shortest round-trip repr, so parse(serialize(t)) is exact.
Relative-pose sequences use the same format; their indices are the target
frames (k, 2k, ...).
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import (
    BadChannelCount,
    BadExtent,
    BadPenalty,
    NotARotation,
    TrajectoryParseError,
    ZeroQuaternion,
)
from .pipeline import PipelineConfig
from .se3 import Pose, PoseVec, pose_from_vec, pose_to_vec
from .tracker import Trajectory

UNITS = ("mm", "cm")


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the same directory, then rename."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def format_trajectory(traj: Trajectory) -> str:
    lines = [f"unit={traj.unit} k={traj.k}"]
    for frame, pose in zip(traj.frames, traj.poses):
        v = pose_to_vec(pose)
        w, x, y, z = v.q
        vals = (*v.t, x, y, z, w)
        lines.append(f"{frame} " + " ".join(repr(float(a)) for a in vals))
    return "\n".join(lines) + "\n"


def write_trajectory(path, traj: Trajectory) -> None:
    atomic_write_text(path, format_trajectory(traj))


def _parse_header(line_no: int, line: str) -> tuple[str, int]:
    kv = {}
    for token in line.split():
        if "=" not in token:
            raise TrajectoryParseError(line_no, f"expected key=value header tokens, got {token!r}")
        key, _, value = token.partition("=")
        kv[key] = value
    if set(kv) != {"unit", "k"}:
        raise TrajectoryParseError(line_no, f"header must declare unit and k, got {sorted(kv)}")
    if kv["unit"] not in UNITS:
        raise TrajectoryParseError(line_no, f"unit must be one of {UNITS}, got {kv['unit']!r}")
    try:
        k = int(kv["k"])
    except ValueError:
        raise TrajectoryParseError(line_no, f"stride k must be an integer, got {kv['k']!r}") from None
    if k < 1:
        raise TrajectoryParseError(line_no, f"stride k must be >= 1, got {k}")
    return kv["unit"], k


def parse_trajectory(text: str) -> Trajectory:
    unit = None
    k = 0
    frames: list[int] = []
    poses: list[Pose] = []
    line_no = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if unit is None:
            unit, k = _parse_header(line_no, line)
            continue
        tokens = line.split()
        if len(tokens) != 8:
            raise TrajectoryParseError(line_no, f"expected 8 fields, got {len(tokens)}")
        try:
            frame = int(tokens[0])
            vals = [float(t) for t in tokens[1:]]
        except ValueError as e:
            raise TrajectoryParseError(line_no, str(e)) from None
        if not np.all(np.isfinite(vals)):
            raise NotARotation(f"line {line_no}: pose contains non-finite values")
        if frames and frame - frames[-1] != k:
            raise TrajectoryParseError(
                line_no, f"frame index {frame} does not follow {frames[-1]} by k={k}"
            )
        tx, ty, tz, qx, qy, qz, qw = vals
        try:
            poses.append(pose_from_vec(PoseVec([tx, ty, tz], [qw, qx, qy, qz]), unit))
        except ZeroQuaternion as e:
            raise ZeroQuaternion(f"line {line_no}: {e}") from None
        frames.append(frame)
    if unit is None:
        raise TrajectoryParseError(line_no, "missing header line 'unit=<mm|cm> k=<int>'")
    if not poses:
        raise TrajectoryParseError(line_no, "no pose rows")
    return Trajectory(tuple(frames), tuple(poses), k=k, unit=unit)


def read_trajectory(path) -> Trajectory:
    return parse_trajectory(Path(path).read_text())


@dataclass(frozen=True)
class RunConfig:
    """Flat run configuration with the package defaults."""

    k: int = 4
    lam_t: float = 0.0
    lam_r: float = -3.0
    flow_eps: float = 0.01
    flow_q: float = 0.4
    flow_theta: tuple = (1.0, 1.0, 1.0, 1.0, 1.0)
    seed: int = 0
    height: int = 64
    width: int = 64
    scene_channels: tuple = (8, 8)
    joint_channels: tuple = (8, 8)
    decoder_channels: int = 12

    def __post_init__(self):
        if self.k < 1:
            raise BadExtent(f"k must be >= 1, got {self.k}")
        if not 0.0 < self.flow_q < 1.0:
            raise BadPenalty(f"flow_q must lie in (0, 1), got {self.flow_q}")
        if self.flow_eps <= 0.0:
            raise BadPenalty(f"flow_eps must be positive, got {self.flow_eps}")
        theta = tuple(float(t) for t in self.flow_theta)
        if len(theta) != 5:
            raise BadExtent(f"flow_theta needs 5 entries, got {len(theta)}")
        object.__setattr__(self, "flow_theta", theta)
        if self.decoder_channels % 3 != 0:
            raise BadChannelCount(f"decoder_channels={self.decoder_channels} not divisible by 3")
        # Delegates extent/channel validation.
        self.pipeline_config()

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            height=self.height,
            width=self.width,
            scene_channels=tuple(self.scene_channels),
            joint_channels=tuple(self.joint_channels),
            seed=self.seed,
        )


_INT_KEYS = {"k", "seed", "height", "width", "decoder_channels"}
_FLOAT_KEYS = {"lam_t", "lam_r", "flow_eps", "flow_q"}
_TUPLE_KEYS = {"flow_theta", "scene_channels", "joint_channels"}


def parse_config(text: str) -> RunConfig:
    """key = value lines; '#' comments; commas for tuple-valued keys."""
    values = {}
    known = {f.name for f in fields(RunConfig)}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise TrajectoryParseError(line_no, f"expected key = value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in known:
            raise TrajectoryParseError(line_no, f"unknown config key {key!r}")
        try:
            if key in _INT_KEYS:
                values[key] = int(value)
            elif key in _FLOAT_KEYS:
                values[key] = float(value)
            elif key in _TUPLE_KEYS:
                values[key] = tuple(float(v) for v in value.split(","))
            else:
                raise TrajectoryParseError(line_no, f"unhandled key {key!r}")
        except ValueError:
            raise TrajectoryParseError(line_no, f"bad value for {key}: {value!r}") from None
    if "scene_channels" in values:
        values["scene_channels"] = tuple(int(v) for v in values["scene_channels"])
    if "joint_channels" in values:
        values["joint_channels"] = tuple(int(v) for v in values["joint_channels"])
    return RunConfig(**values)


def read_config(path) -> RunConfig:
    return parse_config(Path(path).read_text())


def save_attention_params(path, params) -> None:
    np.savez(
        path,
        kind="attention",
        alpha=params.alpha,
        beta=params.beta,
        **{f"w{i}": params.conv_w[i] for i in range(3)},
        **{f"b{i}": params.conv_b[i] for i in range(3)},
    )


def load_attention_params(path):
    from .attention import AttentionParams

    with np.load(path) as z:
        return AttentionParams(
            float(z["alpha"]),
            float(z["beta"]),
            tuple(z[f"w{i}"] for i in range(3)),
            tuple(z[f"b{i}"] for i in range(3)),
        )


def save_decoder_params(path, params) -> None:
    arrays = {
        "squeeze_w": params.squeeze_w, "squeeze_b": params.squeeze_b,
        "ln_gamma": params.ln_gamma, "ln_beta": params.ln_beta,
        "down_w": params.down_w, "down_b": params.down_b,
        "head_w": params.head_w, "head_b": params.head_b,
    }
    for i, blk in enumerate(params.blocks):
        for name in ("dw_w", "dw_b", "pw1_w", "pw1_b", "pw2_w", "pw2_b"):
            arrays[f"block{i}_{name}"] = getattr(blk, name)
        arrays[f"block{i}_gamma"] = blk.gamma
    np.savez(path, kind="decoder", **arrays)


def load_decoder_params(path):
    from .decoder import DecoderParams, DscBlockParams

    with np.load(path) as z:
        blocks = tuple(
            DscBlockParams(
                z[f"block{i}_dw_w"], z[f"block{i}_dw_b"],
                z[f"block{i}_pw1_w"], z[f"block{i}_pw1_b"],
                z[f"block{i}_pw2_w"], z[f"block{i}_pw2_b"],
                float(z[f"block{i}_gamma"]),
            )
            for i in range(2)
        )
        return DecoderParams(
            z["squeeze_w"], z["squeeze_b"], z["ln_gamma"], z["ln_beta"],
            z["down_w"], z["down_b"], blocks, z["head_w"], z["head_b"],
        )
