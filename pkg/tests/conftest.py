import numpy as np
import pytest

from nhdmp.constraints import ConstraintSpec
from nhdmp.dmp import RolloutMode, rollout
from nhdmp.pipeline import (gen_numerical_demo, preprocess,
                            rotation_from_euler_xyz, train)
from nhdmp.trajectory import PoseTrajectory


@pytest.fixture(scope="session")
def demo():
    return gen_numerical_demo(dt=0.001, T=1.0)


@pytest.fixture(scope="session")
def trained(demo):
    pre = preprocess(demo)
    return train(pre.trajectory, n_rbf=100, tau=1.0, alpha_x=25.0,
                 beta_x=6.25, alpha_s=1.0,
                 initial_velocity=pre.initial_velocity)


@pytest.fixture(scope="session")
def nominal_result(trained):
    return rollout(trained.model, RolloutMode.NOMINAL, dt=0.001)


@pytest.fixture(scope="session")
def constrained_result(trained):
    return rollout(trained.model, RolloutMode.CONSTRAINED, dt=0.001)


@pytest.fixture(scope="session")
def optimized_result(trained):
    return rollout(trained.model, RolloutMode.OPTIMIZED, dt=0.001)


@pytest.fixture(scope="session")
def satisfying_demo():
    """Synthetic demonstration that satisfies the lateral constraint
    everywhere: constant orientation, motion confined to the allowed
    plane, starting and ending at rest."""
    n = 1001
    t = np.arange(n) * 0.001
    R0 = rotation_from_euler_xyz(0.0, np.pi / 4, 0.3)
    u1 = R0 @ np.array([1.0, 0.0, 0.0])
    u2 = R0 @ np.array([0.0, 0.0, 1.0])
    phi1 = np.sin(np.pi * t) ** 2
    phi2 = 0.3 * (1.0 - np.cos(np.pi * t))
    positions = np.outer(phi1, u1) + np.outer(phi2, u2)
    rotations = np.broadcast_to(R0, (n, 3, 3)).copy()
    return PoseTrajectory(t=t, positions=positions, rotations=rotations)


def random_rotation(rng, max_angle=np.pi - 0.01):
    from nhdmp.rotations import exp_map
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    angle = rng.uniform(0.0, max_angle)
    return exp_map(axis * angle, 1.0)


def euler_series(rotations):
    from nhdmp.pipeline import euler_xyz_from_rotation
    return np.array([euler_xyz_from_rotation(R) for R in rotations])


def per_axis_rmse(a, b):
    return np.sqrt(((a - b) ** 2).mean(axis=0))


@pytest.fixture
def spec():
    return ConstraintSpec()
