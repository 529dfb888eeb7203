"""Pose movement primitives and the coupled constrained rollout integrator.

A trained model combines a second-order attractor per position axis with a
phase-indexed forcing term, and the matching attractor on SO(3) for
orientation. Rollouts integrate with semi-implicit Euler (velocities from
accelerations first, then positions from the new velocities; orientation
via the exponential map at the new angular velocity) in one of three
modes:

* NOMINAL      - plain imitation of the demonstration,
* CONSTRAINED  - the position acceleration is augmented with the
                 minimum-norm force that cancels lateral blade motion,
* OPTIMIZED    - additionally the angular velocity is re-optimized every
                 step so that the constraint force itself vanishes.

In the constrained modes the velocity is re-projected onto the allowed
plane after each step; the acceleration-level correction is exact but
discrete integration would otherwise drift, and the projection magnitude
is recorded as a diagnostic.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .canonical import CanonicalSystem, ForcingTerm, phase_step
from .constraints import (ConstraintSpec, blade_constraint_force,
                          constraint_violation, project_initial_velocity)
from .orientation_opt import OptimizerConfig, OptStepResult, optimize_step
from .rotations import (NearPiSingularity, exp_map, is_rotation, log_map,
                        orthonormalize)
from .trajectory import PoseTrajectory

_REORTHONORMALIZE_EVERY = 100


class RolloutMode(Enum):
    NOMINAL = "nominal"
    CONSTRAINED = "constrained"
    OPTIMIZED = "optimized"


@dataclass(frozen=True)
class DmpModel:
    """Trained pose primitive: gains, phase parameters, per-axis forcing
    terms and boundary states."""

    tau: float
    alpha_x: float
    beta_x: float
    alpha_s: float
    f_p: tuple[ForcingTerm, ForcingTerm, ForcingTerm]
    f_q: tuple[ForcingTerm, ForcingTerm, ForcingTerm]
    p0: np.ndarray
    p_g: np.ndarray
    R0: np.ndarray
    R_g: np.ndarray
    p_dot0: np.ndarray = field(default_factory=lambda: np.zeros(3))
    w0: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.tau <= 0 or self.alpha_x <= 0 or self.beta_x <= 0:
            raise ValueError("tau, alpha_x and beta_x must be positive")
        for name, R in (("start", self.R0), ("goal", self.R_g)):
            if not is_rotation(R, tol=1e-6):
                raise ValueError(f"{name} orientation is not a rotation matrix")


@dataclass(frozen=True)
class RolloutState:
    t: float
    s: float
    p: np.ndarray
    p_dot: np.ndarray
    R: np.ndarray
    w: np.ndarray


@dataclass(frozen=True)
class StepOutcome:
    state: RolloutState
    f_con: np.ndarray
    opt: OptStepResult | None
    velocity_correction: float


class RolloutStepError(RuntimeError):
    """A rollout step failed; carries the failing step index."""

    def __init__(self, step_index: int, cause: Exception):
        super().__init__(f"rollout failed at step {step_index}: {cause}")
        self.step_index = step_index
        self.cause = cause


def position_accel(model: DmpModel, st: RolloutState) -> np.ndarray:
    """Unconstrained position acceleration of the attractor plus forcing."""
    f = np.array([ft.evaluate(st.s) for ft in model.f_p])
    return (model.alpha_x * (model.beta_x * (model.p_g - st.p)
                             - model.tau * st.p_dot) + f) / model.tau


def orientation_rate(model: DmpModel, st: RolloutState) -> np.ndarray:
    """Angular acceleration of the orientation attractor plus forcing."""
    return _orientation_rate(model, st.R, st.w, st.s)


def _orientation_rate(model: DmpModel, R, w, s) -> np.ndarray:
    e = log_map(model.R_g @ np.asarray(R).T)
    f = np.array([ft.evaluate(s) for ft in model.f_q])
    return (model.alpha_x * (model.beta_x * e - model.tau * w) + f) / model.tau


def _project_velocity(v, c):
    r = float(c @ v) / float(c @ c)
    return v - r * c, abs(r) * float(np.linalg.norm(c))


def step(model: DmpModel, st: RolloutState, mode: RolloutMode,
         spec: ConstraintSpec, dt: float, *,
         opt_cfg: OptimizerConfig | None = None) -> StepOutcome:
    """Advance one semi-implicit Euler step in the requested mode.

    In OPTIMIZED mode the optimizer is warm-started from, and its
    rotation-distance term anchored to, the orientation increment the
    unconstrained dynamics would take from the current state. Anchoring
    per increment (rather than to a separately integrated unconstrained
    orientation) keeps the optimizer from cashing in accumulated
    divergence: a whole-trajectory anchor rewards swinging the blade back
    through the velocity plane, which stays on the zero-force manifold
    but makes the drift projection destroy the velocity.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    a_unc = position_accel(model, st)
    s_new = phase_step(CanonicalSystem(model.tau, model.alpha_s, st.s), dt).s
    opt = None
    correction = 0.0

    wdot = orientation_rate(model, st)
    w_nom = st.w + wdot * dt
    if mode is RolloutMode.OPTIMIZED:
        R_anchor = exp_map(w_nom, dt) @ st.R
        opt = optimize_step(spec, opt_cfg or OptimizerConfig(), R_anchor,
                            st.R, w_nom, st.p_dot, a_unc, dt)
        w_new = opt.w_opt
        R_new = opt.R_opt
    else:
        w_new = w_nom
        R_new = exp_map(w_new, dt) @ st.R

    if mode is RolloutMode.NOMINAL:
        f_con = np.zeros(3)
        v_new = st.p_dot + a_unc * dt
    else:
        f_con = blade_constraint_force(spec, R_new, w_new, st.p_dot, a_unc)
        v_new = st.p_dot + (a_unc + f_con) * dt
        v_new, correction = _project_velocity(v_new, R_new @ spec.body_axis)
    p_new = st.p + v_new * dt

    state = RolloutState(t=st.t + dt, s=s_new, p=p_new, p_dot=v_new,
                         R=R_new, w=w_new)
    return StepOutcome(state=state, f_con=f_con, opt=opt,
                       velocity_correction=correction)


@dataclass
class RolloutResult:
    """Trajectory plus per-sample diagnostics of a rollout."""

    trajectory: PoseTrajectory
    velocities: np.ndarray
    violation: np.ndarray            # c . p_dot at each stored sample
    fcon_norm: np.ndarray
    opt_iters: np.ndarray
    opt_loss: np.ndarray
    opt_converged: np.ndarray
    velocity_correction: np.ndarray  # drift-control projection magnitudes
    pre_projection_violation: float
    mode: RolloutMode

    @property
    def max_violation(self) -> float:
        return float(np.max(np.abs(self.violation)))

    @property
    def max_fcon_norm(self) -> float:
        return float(np.max(self.fcon_norm))


def rollout(model: DmpModel, mode: RolloutMode = RolloutMode.NOMINAL,
            spec: ConstraintSpec | None = None, dt: float = 0.001,
            T: float | None = None,
            opt_cfg: OptimizerConfig | None = None) -> RolloutResult:
    """Integrate the primitive for T seconds (default: the model's tau).

    Produces ceil(T/dt) + 1 samples with per-sample constraint violation,
    constraint-force norm and optimizer diagnostics. In CONSTRAINED and
    OPTIMIZED modes the initial velocity is projected onto the allowed
    plane first and the pre-projection violation magnitude reported.

    Raises RolloutStepError (with the failing step index) if a step's
    orientation update hits the log-map singularity.
    """
    if T is None:
        T = model.tau
    if T <= 0.0 or dt <= 0.0:
        raise ValueError("T and dt must be positive")
    spec = spec or ConstraintSpec()
    n_steps = int(np.ceil(T / dt - 1e-9))
    n = n_steps + 1

    v0 = np.asarray(model.p_dot0, dtype=float).copy()
    pre_violation = 0.0
    if mode is not RolloutMode.NOMINAL:
        pre_violation = abs(constraint_violation(spec, model.R0, v0))
        v0 = project_initial_velocity(spec, model.R0, v0)
    st = RolloutState(t=0.0, s=1.0, p=np.asarray(model.p0, float).copy(),
                      p_dot=v0, R=np.asarray(model.R0, float).copy(),
                      w=np.asarray(model.w0, float).copy())

    t = np.empty(n)
    positions = np.empty((n, 3))
    rotations = np.empty((n, 3, 3))
    velocities = np.empty((n, 3))
    violation = np.zeros(n)
    fcon_norm = np.zeros(n)
    opt_iters = np.zeros(n, dtype=int)
    opt_loss = np.zeros(n)
    opt_converged = np.ones(n, dtype=bool)
    corrections = np.zeros(n)

    def record(k, state, outcome=None):
        t[k] = state.t
        positions[k] = state.p
        rotations[k] = state.R
        velocities[k] = state.p_dot
        violation[k] = constraint_violation(spec, state.R, state.p_dot)
        if outcome is not None:
            fcon_norm[k] = float(np.linalg.norm(outcome.f_con))
            corrections[k] = outcome.velocity_correction
            if outcome.opt is not None:
                opt_iters[k] = outcome.opt.iterations
                opt_loss[k] = outcome.opt.loss
                opt_converged[k] = outcome.opt.converged

    record(0, st)
    for k in range(1, n):
        try:
            out = step(model, st, mode, spec, dt, opt_cfg=opt_cfg)
        except NearPiSingularity as exc:
            raise RolloutStepError(k, exc) from exc
        st = out.state
        if k % _REORTHONORMALIZE_EVERY == 0:
            st = dataclasses.replace(st, R=orthonormalize(st.R))
        record(k, st, out)

    traj = PoseTrajectory(t=t, positions=positions, rotations=rotations)
    return RolloutResult(trajectory=traj, velocities=velocities,
                         violation=violation, fcon_norm=fcon_norm,
                         opt_iters=opt_iters, opt_loss=opt_loss,
                         opt_converged=opt_converged,
                         velocity_correction=corrections,
                         pre_projection_violation=pre_violation, mode=mode)


def goal_errors(model: DmpModel, result: RolloutResult) -> tuple[float, float]:
    """Final position distance (m) and orientation angle (rad) to the goal."""
    p_err = float(np.linalg.norm(result.trajectory.positions[-1] - model.p_g))
    R_end = result.trajectory.rotations[-1]
    r_err = float(np.linalg.norm(log_map(model.R_g @ R_end.T)))
    return p_err, r_err
