"""Pose-trajectory movement primitives with guaranteed no-lateral-motion
constraints: training from demonstrations, constrained rollouts, and
per-step orientation optimization."""

__version__ = "0.1.0"

from .canonical import (CanonicalSystem, DegenerateBasis, ForcingTerm,
                        fit_forcing, phase_step)
from .constraints import (ConstraintSpec, GeneralConstraint,
                          blade_constraint_force, constraint_force,
                          constraint_violation, project_initial_velocity)
from .dmp import (DmpModel, RolloutMode, RolloutResult, RolloutState,
                  RolloutStepError, goal_errors, orientation_rate,
                  position_accel, rollout, step)
from .orientation_opt import (OptimizerConfig, OptStepResult, loss,
                              loss_gradient, optimize_step)
from .pipeline import (NyquistViolation, PreprocessResult, RigidTransform,
                       TrainResult, apply_rigid_transform,
                       butterworth_coefficients, euler_xyz_from_rotation,
                       gen_numerical_demo, lowpass_filter, preprocess,
                       rotation_from_euler_xyz, train)
from .rotations import (NearPiSingularity, exp_map, hat, is_rotation,
                        log_map, orthonormalize)
from .trajectory import PoseTrajectory

__all__ = [
    "__version__",
    "CanonicalSystem", "DegenerateBasis", "ForcingTerm", "fit_forcing",
    "phase_step",
    "ConstraintSpec", "GeneralConstraint", "blade_constraint_force",
    "constraint_force", "constraint_violation", "project_initial_velocity",
    "DmpModel", "RolloutMode", "RolloutResult", "RolloutState",
    "RolloutStepError", "goal_errors", "orientation_rate", "position_accel",
    "rollout", "step",
    "OptimizerConfig", "OptStepResult", "loss", "loss_gradient",
    "optimize_step",
    "NyquistViolation", "PreprocessResult", "RigidTransform", "TrainResult",
    "apply_rigid_transform", "butterworth_coefficients",
    "euler_xyz_from_rotation", "gen_numerical_demo", "lowpass_filter",
    "preprocess", "rotation_from_euler_xyz", "train",
    "NearPiSingularity", "exp_map", "hat", "is_rotation", "log_map",
    "orthonormalize",
    "PoseTrajectory",
]
