import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from nhdmp.constraints import constraint_violation
from nhdmp.dmp import RolloutMode, rollout
from nhdmp.pipeline import (NyquistViolation, RigidTransform,
                            apply_rigid_transform, butterworth_coefficients,
                            euler_xyz_from_rotation, finite_difference,
                            gen_numerical_demo, lowpass_filter, preprocess,
                            rotation_from_euler_xyz, train)
from nhdmp.trajectory import PoseTrajectory

from conftest import per_axis_rmse


def test_demo_closed_forms(demo):
    assert len(demo) == 1001
    assert np.array_equal(demo.positions[0], np.zeros(3))
    assert demo.positions[500][0] == pytest.approx(1.0, abs=1e-12)
    assert demo.positions[500][1] == pytest.approx(np.sin(np.pi / 4) ** 3, abs=1e-12)
    assert np.all(demo.positions[:, 2] == 0.0)


def test_demo_constant_pitch(demo):
    for k in (0, 137, 500, 1000):
        _, pitch, _ = euler_xyz_from_rotation(demo.rotations[k])
        assert pitch == pytest.approx(np.pi / 4, abs=1e-12)


def test_demo_yaw_continuous_at_start(demo):
    # atan2(0, 0) is undefined at t=0; the generator uses the limit pi/2
    _, _, yaw0 = euler_xyz_from_rotation(demo.rotations[0])
    _, _, yaw1 = euler_xyz_from_rotation(demo.rotations[1])
    assert yaw0 == pytest.approx(np.pi / 2, abs=1e-12)
    assert abs(yaw1 - yaw0) < 1e-3


def test_demo_yaw_matches_position_heading(demo):
    x, y = demo.positions[250, 0], demo.positions[250, 1]
    _, _, yaw = euler_xyz_from_rotation(demo.rotations[250])
    assert yaw == pytest.approx(np.arctan2(x, y), abs=1e-12)


def test_demo_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gen_numerical_demo(dt=0.0)


def test_euler_convention_matches_scipy():
    rng = np.random.default_rng(0)
    for _ in range(50):
        rpy = rng.uniform(-1.2, 1.2, size=3)
        R = rotation_from_euler_xyz(*rpy)
        assert np.allclose(R, Rotation.from_euler("xyz", rpy).as_matrix(),
                           atol=1e-12)
        assert np.allclose(euler_xyz_from_rotation(R), rpy, atol=1e-9)


def test_rigid_transform_identity(demo):
    out = apply_rigid_transform(demo, RigidTransform())
    assert np.array_equal(out.positions, demo.positions)
    assert np.array_equal(out.rotations, demo.rotations)


def test_rigid_transform_offset():
    t = np.arange(2) * 0.1
    traj = PoseTrajectory(t=t, positions=np.zeros((2, 3)),
                          rotations=np.broadcast_to(np.eye(3), (2, 3, 3)).copy())
    out = apply_rigid_transform(traj, RigidTransform(t=np.array([0.052, 0.0, 0.013])))
    assert np.allclose(out.positions, [[0.052, 0.0, 0.013]] * 2, atol=1e-15)


def test_rigid_transform_associative(demo):
    rng = np.random.default_rng(1)
    a = RigidTransform(R=rotation_from_euler_xyz(0.2, -0.1, 0.4),
                       t=rng.normal(size=3))
    b = RigidTransform(R=rotation_from_euler_xyz(-0.3, 0.2, 0.1),
                       t=rng.normal(size=3))
    lhs = apply_rigid_transform(apply_rigid_transform(demo, a), b)
    rhs = apply_rigid_transform(demo, a.compose(b))
    assert np.abs(lhs.positions - rhs.positions).max() < 1e-12
    assert np.abs(lhs.rotations - rhs.rotations).max() < 1e-12


def test_rigid_transform_preserves_rotation_validity(demo):
    x = RigidTransform(R=rotation_from_euler_xyz(0.3, 0.5, -0.2),
                       t=np.array([0.1, 0.0, -0.05]))
    out = apply_rigid_transform(demo, x)
    assert out.validate_rotations(tol=1e-12)


def test_butterworth_dc_gain():
    b, a = butterworth_coefficients(3, 4.8, 120.0)
    assert abs(np.sum(b) / np.sum(a) - 1.0) < 1e-12


def test_butterworth_nyquist_guard(demo):
    with pytest.raises(NyquistViolation):
        butterworth_coefficients(3, 60.0, 120.0)
    with pytest.raises(NyquistViolation):
        lowpass_filter(demo, 500.0)


def test_lowpass_constant_unchanged():
    n = 200
    t = np.arange(n) / 120.0
    positions = np.tile([0.3, -0.2, 1.0], (n, 1))
    R = rotation_from_euler_xyz(0.1, 0.2, 0.3)
    traj = PoseTrajectory(t=t, positions=positions,
                          rotations=np.broadcast_to(R, (n, 3, 3)).copy())
    out = lowpass_filter(traj, 4.8)
    assert np.abs(out.positions - positions).max() < 1e-12
    assert np.abs(out.rotations - traj.rotations).max() < 1e-12


def test_lowpass_zero_input():
    n = 200
    t = np.arange(n) / 120.0
    traj = PoseTrajectory(t=t, positions=np.zeros((n, 3)),
                          rotations=np.broadcast_to(np.eye(3), (n, 3, 3)).copy())
    out = lowpass_filter(traj, 4.8)
    assert np.abs(out.positions).max() == 0.0


def test_lowpass_linear_in_positions():
    rng = np.random.default_rng(2)
    n = 300
    t = np.arange(n) / 120.0
    R = np.broadcast_to(np.eye(3), (n, 3, 3)).copy()
    xa = rng.normal(size=(n, 3))
    xb = rng.normal(size=(n, 3))
    fa = lowpass_filter(PoseTrajectory(t, xa, R.copy()), 4.8).positions
    fb = lowpass_filter(PoseTrajectory(t, xb, R.copy()), 4.8).positions
    fab = lowpass_filter(PoseTrajectory(t, 2.0 * xa - 0.5 * xb, R.copy()),
                         4.8).positions
    assert np.abs(fab - (2.0 * fa - 0.5 * fb)).max() < 1e-9


def test_preprocess_rebases_and_projects(demo, spec):
    pre = preprocess(demo)
    assert np.array_equal(pre.trajectory.positions[0], np.zeros(3))
    v = finite_difference(pre.trajectory.positions, pre.trajectory.dt)
    v0 = pre.initial_velocity
    assert abs(constraint_violation(spec, pre.trajectory.rotations[0], v0)) < 1e-12
    assert pre.pre_projection_violation >= 0.0
    # already-smooth synthetic input passes through nearly unchanged
    assert np.abs(pre.trajectory.positions - demo.positions).max() < 1e-3


def test_train_constant_trajectory_stays_put():
    n = 300
    t = np.arange(n) * 0.001
    p = np.tile([0.1, 0.2, 0.3], (n, 1))
    R = rotation_from_euler_xyz(0.0, 0.4, 0.9)
    traj = PoseTrajectory(t=t, positions=p,
                          rotations=np.broadcast_to(R, (n, 3, 3)).copy())
    res = train(traj, n_rbf=20)
    for term in res.model.f_p + res.model.f_q:
        assert np.abs(term.weights).max() < 1e-9
    out = rollout(res.model, RolloutMode.NOMINAL, dt=0.001, T=0.3)
    assert np.abs(out.trajectory.positions - [0.1, 0.2, 0.3]).max() < 1e-9


def test_more_bases_fit_no_worse(demo, trained, nominal_result):
    pre = preprocess(demo)
    small = train(pre.trajectory, n_rbf=10,
                  initial_velocity=pre.initial_velocity)
    small_roll = rollout(small.model, RolloutMode.NOMINAL, dt=0.001)
    rmse_small = per_axis_rmse(small_roll.trajectory.positions, demo.positions)
    rmse_big = per_axis_rmse(nominal_result.trajectory.positions, demo.positions)
    assert np.all(rmse_big <= rmse_small + 1e-12)


def test_train_requires_samples():
    t = np.arange(2) * 0.001
    traj = PoseTrajectory(t=t, positions=np.zeros((2, 3)),
                          rotations=np.broadcast_to(np.eye(3), (2, 3, 3)).copy())
    with pytest.raises(ValueError):
        train(traj, n_rbf=5)


def test_preprocess_removes_lateral_initial_velocity(spec):
    # demonstration launched with a lateral velocity component; no filter so
    # the boundary velocity survives intact
    n = 400
    t = np.arange(n) / 120.0
    positions = np.column_stack([0.2 * t, 0.1 * t, np.zeros(n)])
    traj = PoseTrajectory(t=t, positions=positions,
                          rotations=np.broadcast_to(np.eye(3), (n, 3, 3)).copy())
    pre = preprocess(traj, cutoff_hz=None)
    assert pre.pre_projection_violation > 0.05
    assert abs(constraint_violation(spec, np.eye(3), pre.initial_velocity)) < 1e-12
    assert pre.initial_velocity[1] == 0.0
