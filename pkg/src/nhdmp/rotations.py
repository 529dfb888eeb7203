"""SO(3) primitives: skew operator, Rodrigues exponential, logarithmic map."""

from __future__ import annotations

import numpy as np

_SMALL_ANGLE = 1e-8
_PI_MARGIN = 1e-6


class NearPiSingularity(ValueError):
    """Rotation angle too close to pi for a stable axis extraction."""


def hat(w) -> np.ndarray:
    """Skew-symmetric cross-product matrix: hat(w) @ v == np.cross(w, v)."""
    wx, wy, wz = w
    return np.array([[0.0, -wz, wy],
                     [wz, 0.0, -wx],
                     [-wy, wx, 0.0]])


def exp_map(w, dt: float = 1.0) -> np.ndarray:
    """Rotation reached by spinning at angular velocity w (rad/s) for dt seconds.

    Rodrigues formula; below 1e-8 rad the sin/cos coefficients switch to
    their Taylor forms to avoid 0/0.
    """
    u = np.asarray(w, dtype=float) * dt
    a = float(np.linalg.norm(u))
    K = hat(u)
    if a < _SMALL_ANGLE:
        sa = 1.0 - a * a / 6.0
        cb = 0.5 - a * a / 24.0
    else:
        sa = np.sin(a) / a
        cb = (1.0 - np.cos(a)) / (a * a)
    return np.eye(3) + sa * K + cb * (K @ K)


def log_map(R) -> np.ndarray:
    """Rotation vector (axis * angle, rad) of a rotation matrix.

    The angle comes from atan2(|vee(R - R^T)| / 2, (trace - 1) / 2), which is
    well conditioned everywhere except near pi, where the axis extraction
    divides by a vanishing sine and the call raises NearPiSingularity.
    """
    R = np.asarray(R, dtype=float)
    v = 0.5 * np.array([R[2, 1] - R[1, 2],
                        R[0, 2] - R[2, 0],
                        R[1, 0] - R[0, 1]])
    s = float(np.linalg.norm(v))            # |sin(theta)|
    c = 0.5 * (float(np.trace(R)) - 1.0)    # cos(theta)
    theta = float(np.arctan2(s, min(max(c, -1.0), 1.0)))
    if theta > np.pi - _PI_MARGIN:
        raise NearPiSingularity(f"rotation angle {theta!r} is within 1e-6 of pi")
    if s < _SMALL_ANGLE:
        return v * (1.0 + theta * theta / 6.0)   # theta/sin(theta) series
    return v * (theta / s)


def orthonormalize(R) -> np.ndarray:
    """Closest rotation matrix in the Frobenius sense (polar projection)."""
    U, _, Vt = np.linalg.svd(np.asarray(R, dtype=float))
    D = U @ Vt
    if np.linalg.det(D) < 0.0:
        U = U.copy()
        U[:, -1] = -U[:, -1]
        D = U @ Vt
    return D


def is_rotation(R, tol: float = 1e-9) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        return False
    return (float(np.linalg.norm(R @ R.T - np.eye(3))) < tol
            and abs(float(np.linalg.det(R)) - 1.0) < tol)
