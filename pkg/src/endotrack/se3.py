"""Quaternion and SE(3) algebra for relative/absolute pose handling.

Conventions, fixed once for the whole package:

* Quaternions are numpy arrays ``[q0, qx, qy, qz]`` (scalar first, Hamilton).
  The canonical representative of the double cover has ``q0 >= 0``.
* A :class:`Pose` maps points from its own frame into the world frame:
  ``x_world = R @ x_local + t``.  Translation units (mm or cm) ride along as
  a metadata tag; the algebra never converts them.
* Euler angles are extrinsic X-Y-Z: ``R = Rz(rz) @ Ry(ry) @ Rx(rx)`` about
  the fixed world axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotARotation, ShapeMismatch, ZeroQuaternion

# Degenerate-axis threshold for the quaternion logarithm.
LOG_EPS = 1e-8
# Orthonormality defect that triggers re-orthonormalization after composing.
ORTHO_TOL = 1e-9


@dataclass(frozen=True)
class Pose:
    """Rigid transform: 3x3 rotation ``R`` plus translation ``t``."""

    R: np.ndarray
    t: np.ndarray
    unit: str = "mm"

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if R.shape != (3, 3):
            raise ShapeMismatch(f"rotation must be 3x3, got {R.shape}")
        if t.shape != (3,):
            raise ShapeMismatch(f"translation must be a 3-vector, got {t.shape}")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)


@dataclass(frozen=True)
class PoseVec:
    """7-parameter pose: translation plus scalar-first unit quaternion."""

    t: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if t.shape != (3,):
            raise ShapeMismatch(f"translation must be a 3-vector, got {t.shape}")
        if q.shape != (4,):
            raise ShapeMismatch(f"quaternion must be a 4-vector, got {q.shape}")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "q", q)


def identity_pose(unit: str = "mm") -> Pose:
    return Pose(np.eye(3), np.zeros(3), unit)


def quat_normalize(q) -> np.ndarray:
    """Scale to unit norm and resolve the double cover (q0 >= 0).

    Raises ZeroQuaternion when the norm is below 1e-12.
    """
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n <= 1e-12:
        raise ZeroQuaternion(f"quaternion norm {n} too small to normalize")
    q = q / n
    if q[0] < 0.0:
        q = -q
    return q


def quat_log(q) -> np.ndarray:
    """Logarithm of a unit quaternion: (v/|v|) * acos(q0), zero at identity.

    The magnitude is the half-angle of the encoded rotation.  Callers are
    expected to pass a canonical unit quaternion; the acos argument is
    clamped for floating-point safety.
    """
    q = np.asarray(q, dtype=float)
    v = q[1:]
    vn = np.linalg.norm(v)
    if vn <= LOG_EPS:
        return np.zeros(3)
    return (v / vn) * np.arccos(np.clip(q[0], -1.0, 1.0))


def quat_to_rotmat(q) -> np.ndarray:
    """Unit quaternion to rotation matrix (Hamilton convention)."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]
    )


def rotmat_to_quat(R) -> np.ndarray:
    """Rotation matrix to canonical unit quaternion.

    Uses the largest of trace/diagonal branches so the divisor stays well
    away from zero for every input rotation.
    """
    R = np.asarray(R, dtype=float)
    check_rotation(R, tol=1e-6)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = 1.0 + tr
        q = np.array([s, R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = 1.0 + R[0, 0] - R[1, 1] - R[2, 2]
        q = np.array([R[2, 1] - R[1, 2], s, R[0, 1] + R[1, 0], R[0, 2] + R[2, 0]])
    elif R[1, 1] >= R[2, 2]:
        s = 1.0 - R[0, 0] + R[1, 1] - R[2, 2]
        q = np.array([R[0, 2] - R[2, 0], R[0, 1] + R[1, 0], s, R[1, 2] + R[2, 1]])
    else:
        s = 1.0 - R[0, 0] - R[1, 1] + R[2, 2]
        q = np.array([R[1, 0] - R[0, 1], R[0, 2] + R[2, 0], R[1, 2] + R[2, 1], s])
    q *= 0.5 / np.sqrt(s)
    if q[0] < 0.0:
        q = -q
    return q


def rotmat_from_axis_angle(axis, angle: float) -> np.ndarray:
    """Rodrigues formula; ``axis`` need not be normalized."""
    axis = np.asarray(axis, dtype=float)
    n = np.linalg.norm(axis)
    if n <= 1e-12:
        return np.eye(3)
    x, y, z = axis / n
    K = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def euler_from_rotmat(R) -> tuple[float, float, float]:
    """Extrinsic X-Y-Z angles (rx, ry, rz) with R = Rz @ Ry @ Rx.

    At gimbal lock (|R[2,0]| within 1e-9 of 1) the decomposition is not
    unique; rz is fixed to 0 and rx absorbs the remaining freedom.
    """
    R = np.asarray(R, dtype=float)
    sy = -R[2, 0]
    cy = np.hypot(R[2, 1], R[2, 2])
    ry = np.arctan2(sy, cy)
    if abs(R[2, 0]) >= 1.0 - 1e-9:
        s = 1.0 if sy > 0 else -1.0
        rx = np.arctan2(s * R[0, 1], s * R[0, 2])
        rz = 0.0
    else:
        rx = np.arctan2(R[2, 1], R[2, 2])
        rz = np.arctan2(R[1, 0], R[0, 0])
    return float(rx), float(ry), float(rz)


def rotmat_from_euler(rx: float, ry: float, rz: float) -> np.ndarray:
    """Inverse of euler_from_rotmat: R = Rz(rz) @ Ry(ry) @ Rx(rx)."""
    Rx = rotmat_from_axis_angle([1.0, 0.0, 0.0], rx)
    Ry = rotmat_from_axis_angle([0.0, 1.0, 0.0], ry)
    Rz = rotmat_from_axis_angle([0.0, 0.0, 1.0], rz)
    return Rz @ Ry @ Rx


def check_rotation(R, tol: float = 1e-6) -> None:
    """Raise NotARotation unless R'R = I and det(R) = 1 within tol."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise NotARotation(f"expected 3x3 matrix, got {R.shape}")
    defect = np.max(np.abs(R.T @ R - np.eye(3)))
    if not np.isfinite(defect) or defect > tol:
        raise NotARotation(f"R'R deviates from identity by {defect}")
    if abs(np.linalg.det(R) - 1.0) > max(tol, 1e-9):
        raise NotARotation("determinant differs from +1")


def orthonormalize(R) -> np.ndarray:
    """Nearest rotation in the Frobenius sense (polar factor via SVD)."""
    U, _, Vt = np.linalg.svd(np.asarray(R, dtype=float))
    if np.linalg.det(U @ Vt) < 0.0:
        U = U.copy()
        U[:, -1] = -U[:, -1]
    return U @ Vt


def _ortho_defect(R: np.ndarray) -> float:
    return float(np.max(np.abs(R.T @ R - np.eye(3))))


def pose_compose(a: Pose, b: Pose) -> Pose:
    """a then b applied in b's frame: R = Ra Rb, t = Ra tb + ta.

    Re-orthonormalizes the rotation when accumulated drift exceeds 1e-9
    so long chains stay valid.
    """
    R = a.R @ b.R
    t = a.R @ b.t + a.t
    if _ortho_defect(R) > ORTHO_TOL:
        R = orthonormalize(R)
    return Pose(R, t, a.unit)


def pose_inverse(p: Pose) -> Pose:
    return Pose(p.R.T, -(p.R.T @ p.t), p.unit)


def relative_pose(p_prev: Pose, p_cur: Pose) -> Pose:
    """Transform taking p_prev's frame to p_cur's: inverse(p_prev) * p_cur."""
    return pose_compose(pose_inverse(p_prev), p_cur)


def pose_to_matrix(p: Pose) -> np.ndarray:
    M = np.eye(4)
    M[:3, :3] = p.R
    M[:3, 3] = p.t
    return M


def pose_from_matrix(M, unit: str = "mm") -> Pose:
    M = np.asarray(M, dtype=float)
    if M.shape != (4, 4):
        raise ShapeMismatch(f"expected 4x4 homogeneous matrix, got {M.shape}")
    return Pose(M[:3, :3], M[:3, 3], unit)


def pose_to_vec(p: Pose) -> PoseVec:
    return PoseVec(p.t.copy(), rotmat_to_quat(p.R))


def pose_from_vec(v: PoseVec, unit: str = "mm") -> Pose:
    return Pose(quat_to_rotmat(quat_normalize(v.q)), v.t, unit)
