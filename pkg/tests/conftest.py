import numpy as np
import pytest

from endotrack import Pose, quat_to_rotmat


def random_unit_quat(rng) -> np.ndarray:
    while True:
        q = rng.standard_normal(4)
        n = np.linalg.norm(q)
        if n > 1e-3:
            return q / n


def random_pose(rng, t_scale: float = 1.0, unit: str = "mm") -> Pose:
    return Pose(quat_to_rotmat(random_unit_quat(rng)), t_scale * rng.standard_normal(3), unit)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
