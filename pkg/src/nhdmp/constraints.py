"""Constraint forces for equality-constrained second-order systems.

The general form (Udwadia-Kalaba): for a unit-mass system with
unconstrained acceleration f_unc subject to A @ accel = b, the
minimum-norm corrective acceleration is

    f_con = pinv(A) @ (b - A @ f_unc)

The blade specialization forbids lateral motion of a body frame: with
c = R @ y_axis the velocity constraint is c . v = 0; differentiating once
gives cdot . v + c . a = 0, i.e. A = c^T and b = -cdot . v with
cdot = hat(w) @ c.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .rotations import hat

_Y_AXIS = (0.0, 1.0, 0.0)


@dataclass(frozen=True)
class ConstraintSpec:
    """Forbidden translation axis, expressed in the body frame (unit norm)."""

    body_axis: np.ndarray = field(default_factory=lambda: np.array(_Y_AXIS))

    def __post_init__(self):
        axis = np.asarray(self.body_axis, dtype=float)
        if axis.shape != (3,) or abs(float(np.linalg.norm(axis)) - 1.0) > 1e-12:
            raise ValueError("body_axis must be a unit 3-vector")
        object.__setattr__(self, "body_axis", axis)

    def plane_axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Right-handed pair of body axes spanning the allowed plane.

        For the default lateral axis [0,1,0] this is exactly ([1,0,0],
        [0,0,1]); for other axes a deterministic orthonormal complement.
        """
        u = self.body_axis
        e = np.zeros(3)
        e[int(np.argmin(np.abs(u)))] = 1.0
        x_b = e - (e @ u) * u
        x_b = x_b / np.linalg.norm(x_b)
        z_b = np.cross(x_b, u)
        return x_b, z_b


@dataclass(frozen=True)
class GeneralConstraint:
    """m acceleration-level equality constraints A @ accel = b."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError("A must be m x n with an m-vector b")
        if not (np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError("constraint entries must be finite")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)


def constraint_force(gc: GeneralConstraint, f_unc) -> np.ndarray:
    """Minimum-norm acceleration correction satisfying gc in the
    least-squares sense: pinv(A) @ (b - A @ f_unc)."""
    f_unc = np.asarray(f_unc, dtype=float)
    A, b = gc.A, gc.b
    r = b - A @ f_unc
    if A.shape[0] == 1:
        a = A[0]
        aa = float(a @ a)
        if aa < 1e-300:
            return np.zeros_like(f_unc)
        return a * (r[0] / aa)
    rcond = max(A.shape) * np.finfo(float).eps
    return np.linalg.pinv(A, rcond=rcond) @ r


def blade_constraint_force(spec: ConstraintSpec, R, w, p_dot,
                           p_ddot_unc) -> np.ndarray:
    """Acceleration correction that cancels lateral motion of the blade.

    Post condition: c . (p_ddot_unc + f_con) == -cdot . p_dot exactly
    (up to rounding), where c = R @ body_axis.
    """
    R = np.asarray(R, dtype=float)
    c = R @ spec.body_axis
    cdot = hat(w) @ c
    b = -float(cdot @ np.asarray(p_dot, dtype=float))
    return c * ((b - float(c @ np.asarray(p_ddot_unc, dtype=float))) / float(c @ c))


def project_initial_velocity(spec: ConstraintSpec, R_wb, p_dot0) -> np.ndarray:
    """Orthogonal projection of a start velocity onto the allowed plane,
    P (P^T P)^-1 P^T v with P = [R x_b, R z_b]."""
    R_wb = np.asarray(R_wb, dtype=float)
    x_b, z_b = spec.plane_axes()
    P = np.column_stack([R_wb @ x_b, R_wb @ z_b])
    v = np.asarray(p_dot0, dtype=float)
    return P @ np.linalg.solve(P.T @ P, P.T @ v)


def constraint_violation(spec: ConstraintSpec, R, p_dot) -> float:
    """Signed lateral speed c . p_dot (m/s); zero when the constraint holds."""
    c = np.asarray(R, dtype=float) @ spec.body_axis
    return float(c @ np.asarray(p_dot, dtype=float))
