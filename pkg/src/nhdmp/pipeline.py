"""Demonstration handling: synthetic demo generation, rigid transforms,
low-pass filtering, differentiation and model training.

All lengths are meters internally; centimeter sensor offsets are converted
at ingestion. Euler angles follow the extrinsic xyz convention throughout
(rotate about fixed x, then fixed y, then fixed z).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .canonical import fit_forcing, phase_sequence
from .constraints import (ConstraintSpec, constraint_violation,
                          project_initial_velocity)
from .dmp import DmpModel
from .rotations import exp_map, is_rotation, log_map, orthonormalize
from .trajectory import PoseTrajectory


class NyquistViolation(ValueError):
    """Filter cutoff at or above half the sample rate."""


@dataclass(frozen=True)
class RigidTransform:
    """Fixed frame offset, e.g. sensor frame to blade frame. Translation in
    meters."""

    R: np.ndarray = field(default_factory=lambda: np.eye(3))
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if not is_rotation(R, tol=1e-9):
            raise ValueError("transform rotation must be a valid rotation matrix")
        if t.shape != (3,):
            raise ValueError("transform translation must be a 3-vector")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "t", t)

    def compose(self, other: "RigidTransform") -> "RigidTransform":
        return RigidTransform(self.R @ other.R, self.t + self.R @ other.t)


def rotation_from_euler_xyz(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Rotation matrix from extrinsic-xyz Euler angles: Rz(yaw) Ry(pitch) Rx(roll)."""
    cr, sr = np.cos(roll), np.sin(roll)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cy, sy = np.cos(yaw), np.sin(yaw)
    Rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    Ry = np.array([[cp, 0.0, sp], [0.0, 1.0, 0.0], [-sp, 0.0, cp]])
    Rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    return Rz @ Ry @ Rx


def euler_xyz_from_rotation(R) -> tuple[float, float, float]:
    """Extrinsic-xyz Euler angles (roll, pitch, yaw) of a rotation matrix."""
    R = np.asarray(R, dtype=float)
    pitch = float(np.arcsin(min(max(-R[2, 0], -1.0), 1.0)))
    roll = float(np.arctan2(R[2, 1], R[2, 2]))
    yaw = float(np.arctan2(R[1, 0], R[0, 0]))
    return roll, pitch, yaw


def gen_numerical_demo(dt: float = 0.001, T: float = 1.0) -> PoseTrajectory:
    """Closed-form cutting demonstration on the XY plane.

    Positions x = sin^2(pi t), y = sin^3(pi t / 2), z = 0; orientation has
    zero roll, constant pi/4 pitch, and yaw = atan2(x, y), which points the
    blade's lateral axis into the direction of travel for part of the
    stroke, deliberately violating the no-lateral-motion constraint.
    """
    if dt <= 0.0 or T <= 0.0:
        raise ValueError("dt and T must be positive")
    n = int(round(T / dt)) + 1
    t = np.arange(n) * dt
    x = np.sin(np.pi * t) ** 2
    y = np.sin(0.5 * np.pi * t) ** 3
    positions = np.column_stack([x, y, np.zeros(n)])
    yaw = np.arctan2(x, y)
    if x[0] == 0.0 and y[0] == 0.0:
        yaw[0] = 0.5 * np.pi   # t -> 0+ limit: x ~ t^2 dominates y ~ t^3
    rotations = np.empty((n, 3, 3))
    for k in range(n):
        rotations[k] = rotation_from_euler_xyz(0.0, 0.25 * np.pi, yaw[k])
    return PoseTrajectory(t=t, positions=positions, rotations=rotations)


def apply_rigid_transform(traj: PoseTrajectory,
                          x: RigidTransform) -> PoseTrajectory:
    """Right-compose a fixed body-frame offset onto every sample:
    R' = R Rx, p' = p + R tx."""
    positions = traj.positions + np.einsum("nij,j->ni", traj.rotations, x.t)
    rotations = traj.rotations @ x.R
    return PoseTrajectory(t=traj.t.copy(), positions=positions,
                          rotations=rotations)


def butterworth_coefficients(order: int, cutoff_hz: float,
                             sample_rate_hz: float) -> tuple[np.ndarray, np.ndarray]:
    """Digital low-pass Butterworth (b, a) via the bilinear transform."""
    if cutoff_hz <= 0.0 or cutoff_hz >= 0.5 * sample_rate_hz:
        raise NyquistViolation(
            f"cutoff {cutoff_hz} Hz not inside (0, {0.5 * sample_rate_hz}) Hz")
    b, a = signal.butter(order, cutoff_hz, btype="low", fs=sample_rate_hz)
    return b, a


def _filtfilt(b, a, series: np.ndarray, cutoff_hz: float,
              sample_rate_hz: float) -> np.ndarray:
    n = series.shape[0]
    # the default pad (3 * filter length) is far too short for cutoffs well
    # below the sample rate; pad on the order of the filter's settling time.
    # Even-symmetric padding is exact for segments that begin and end at
    # rest, which is how demonstrations are recorded.
    padlen = int(min(n - 2, max(12, round(3.0 * sample_rate_hz / cutoff_hz))))
    if padlen < 1:
        return series.copy()
    return signal.filtfilt(b, a, series, axis=0, padtype="even", padlen=padlen)


def lowpass_filter(traj: PoseTrajectory, cutoff_hz: float,
                   order: int = 3) -> PoseTrajectory:
    """Zero-phase (forward-backward) Butterworth low-pass of a trajectory.

    Positions are filtered per axis. Rotations are filtered through their
    incremental rotation vectors log(R[k+1] R[k]^T) and rebuilt from the
    first sample, which avoids Euler-angle gimbal artifacts.
    """
    b, a = butterworth_coefficients(order, cutoff_hz, traj.sample_rate)
    positions = _filtfilt(b, a, traj.positions, cutoff_hz, traj.sample_rate)
    n = len(traj)
    increments = np.empty((n - 1, 3))
    for k in range(n - 1):
        increments[k] = log_map(traj.rotations[k + 1] @ traj.rotations[k].T)
    if n - 1 >= 12:
        increments = _filtfilt(b, a, increments, cutoff_hz, traj.sample_rate)
    rotations = np.empty_like(traj.rotations)
    rotations[0] = traj.rotations[0]
    for k in range(n - 1):
        rotations[k + 1] = exp_map(increments[k], 1.0) @ rotations[k]
        if (k + 1) % 100 == 0:
            rotations[k + 1] = orthonormalize(rotations[k + 1])
    return PoseTrajectory(t=traj.t.copy(), positions=positions,
                          rotations=rotations)


def finite_difference(series: np.ndarray, dt: float) -> np.ndarray:
    """Central differences with second-order one-sided stencils at the ends."""
    series = np.asarray(series, dtype=float)
    d = np.empty_like(series)
    d[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
    d[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt)
    d[-1] = (3.0 * series[-1] - 4.0 * series[-2] + series[-3]) / (2.0 * dt)
    return d


def angular_velocity_series(rotations: np.ndarray, dt: float) -> np.ndarray:
    """Body angular velocities from forward rotation increments,
    w[k] = log(R[k+1] R[k]^T) / dt, with the last value held."""
    n = rotations.shape[0]
    w = np.empty((n, 3))
    for k in range(n - 1):
        w[k] = log_map(rotations[k + 1] @ rotations[k].T) / dt
    w[-1] = w[-2]
    return w


@dataclass
class PreprocessResult:
    trajectory: PoseTrajectory
    initial_velocity: np.ndarray        # projected onto the allowed plane
    pre_projection_violation: float


def preprocess(traj: PoseTrajectory, x: RigidTransform | None = None,
               cutoff_hz: float | None = 4.8,
               spec: ConstraintSpec | None = None) -> PreprocessResult:
    """Standard demonstration conditioning.

    Applies the sensor-to-blade transform, rebases positions to start at
    the origin, low-pass filters, differentiates, and projects the initial
    velocity onto the constraint plane (reporting how much was removed).
    """
    spec = spec or ConstraintSpec()
    if x is not None:
        traj = apply_rigid_transform(traj, x)
    positions = traj.positions - traj.positions[0]
    traj = PoseTrajectory(t=traj.t.copy(), positions=positions,
                          rotations=traj.rotations.copy())
    if cutoff_hz is not None:
        traj = lowpass_filter(traj, cutoff_hz)
        # the filter leaves a sub-tolerance start offset; pin the origin
        traj.positions -= traj.positions[0].copy()
    v = finite_difference(traj.positions, traj.dt)
    violation0 = abs(constraint_violation(spec, traj.rotations[0], v[0]))
    v0 = project_initial_velocity(spec, traj.rotations[0], v[0])
    return PreprocessResult(trajectory=traj, initial_velocity=v0,
                            pre_projection_violation=violation0)


@dataclass
class TrainResult:
    model: DmpModel
    forcing_rmse_position: np.ndarray     # per axis
    forcing_rmse_orientation: np.ndarray


def train(traj: PoseTrajectory, n_rbf: int = 100, tau: float = 1.0,
          alpha_x: float = 25.0, beta_x: float = 6.25, alpha_s: float = 1.0,
          initial_velocity: np.ndarray | None = None) -> TrainResult:
    """Fit position and orientation forcing weights to a demonstration.

    Forcing targets invert the rollout dynamics sample by sample,

        f_p = tau * a - alpha_x * (beta_x * (p_g - p) - tau * v)
        f_q = tau * wdot - alpha_x * (beta_x * log(R_g R^T) - tau * w)

    with derivatives from central finite differences and angular
    velocities from forward rotation increments. Goal states come from
    the final sample.
    """
    n = len(traj)
    if n < 3:
        raise ValueError("training needs at least 3 samples")
    dt = traj.dt
    p = traj.positions
    p_g = p[-1]
    R_g = traj.rotations[-1]
    s = phase_sequence(tau, alpha_s, dt, n)

    v = finite_difference(p, dt)
    a = finite_difference(v, dt)
    w = angular_velocity_series(traj.rotations, dt)
    wdot = finite_difference(w, dt)
    e_q = np.empty((n, 3))
    for k in range(n):
        e_q[k] = log_map(R_g @ traj.rotations[k].T)

    f_p_target = tau * a - alpha_x * (beta_x * (p_g - p) - tau * v)
    f_q_target = tau * wdot - alpha_x * (beta_x * e_q - tau * w)

    duration = traj.duration
    terms_p, terms_q = [], []
    rmse_p = np.empty(3)
    rmse_q = np.empty(3)
    for axis in range(3):
        term, rmse_p[axis] = fit_forcing(s, f_p_target[:, axis], n_rbf,
                                         tau, alpha_s, duration)
        terms_p.append(term)
        term, rmse_q[axis] = fit_forcing(s, f_q_target[:, axis], n_rbf,
                                         tau, alpha_s, duration)
        terms_q.append(term)

    v0 = v[0] if initial_velocity is None else np.asarray(initial_velocity, float)
    model = DmpModel(tau=tau, alpha_x=alpha_x, beta_x=beta_x, alpha_s=alpha_s,
                     f_p=tuple(terms_p), f_q=tuple(terms_q),
                     p0=p[0].copy(), p_g=p_g.copy(),
                     R0=traj.rotations[0].copy(), R_g=R_g.copy(),
                     p_dot0=v0.copy(), w0=w[0].copy())
    return TrainResult(model=model, forcing_rmse_position=rmse_p,
                       forcing_rmse_orientation=rmse_q)
