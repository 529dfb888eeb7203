"""Uniformly sampled pose trajectories (position + rotation time series)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .rotations import is_rotation


@dataclass
class PoseTrajectory:
    """Time series of (t, position, rotation) at a fixed sample rate.

    t is in seconds, positions in meters (n x 3), rotations are n x 3 x 3
    world-from-body matrices.
    """

    t: np.ndarray
    positions: np.ndarray
    rotations: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.positions = np.asarray(self.positions, dtype=float)
        self.rotations = np.asarray(self.rotations, dtype=float)
        n = len(self.t)
        if n < 2:
            raise ValueError("a trajectory needs at least 2 samples")
        if self.positions.shape != (n, 3) or self.rotations.shape != (n, 3, 3):
            raise ValueError("inconsistent trajectory array shapes")
        steps = np.diff(self.t)
        if np.any(np.abs(steps - steps[0]) > 1e-9):
            raise ValueError("timestamps must be uniform within 1e-9 s")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.dt

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def validate_rotations(self, tol: float = 1e-9) -> bool:
        return all(is_rotation(R, tol) for R in self.rotations)
