"""File formats: trajectory CSV, rollout report CSV, model JSON.

Trajectory CSV: header ``t,px,py,pz,r11,r12,r13,r21,r22,r23,r31,r32,r33``,
rotation entries row-major, 17 significant digits, LF line endings, ``.``
decimal separator. Report CSV: ``t,violation,fcon_norm,opt_iters``.
The model JSON document is the serialized ModelPayload schema.
"""

from __future__ import annotations

import json

import numpy as np

from .dmp import RolloutResult
from .rotations import orthonormalize
from .schemas import ModelPayload
from .trajectory import PoseTrajectory

TRAJECTORY_HEADER = "t,px,py,pz,r11,r12,r13,r21,r22,r23,r31,r32,r33"
REPORT_HEADER = "t,violation,fcon_norm,opt_iters"

_ROTATION_READ_TOL = 1e-6


class TrajectoryParseError(ValueError):
    """Malformed trajectory CSV; carries the 1-based file line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


def _fmt(x: float) -> str:
    return format(x, ".17g")


def write_trajectory_csv(traj: PoseTrajectory, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(TRAJECTORY_HEADER + "\n")
        flat_R = traj.rotations.reshape(len(traj), 9)
        for k in range(len(traj)):
            row = [traj.t[k], *traj.positions[k], *flat_R[k]]
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def read_trajectory_csv(path) -> PoseTrajectory:
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != TRAJECTORY_HEADER:
        raise TrajectoryParseError(1, f"expected header '{TRAJECTORY_HEADER}'")
    rows = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 13:
            raise TrajectoryParseError(i, f"expected 13 fields, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise TrajectoryParseError(i, str(exc)) from exc
    if len(rows) < 2:
        raise TrajectoryParseError(len(lines), "need at least 2 data rows")
    data = np.asarray(rows)
    t = data[:, 0]
    steps = np.diff(t)
    bad = np.nonzero(np.abs(steps - steps[0]) > 1e-9)[0]
    if len(bad):
        raise TrajectoryParseError(int(bad[0]) + 3, "non-uniform timestamp")
    rotations = data[:, 4:13].reshape(-1, 3, 3)
    for k, R in enumerate(rotations):
        drift = float(np.linalg.norm(R @ R.T - np.eye(3)))
        if drift > _ROTATION_READ_TOL or np.linalg.det(R) < 0.0:
            raise TrajectoryParseError(k + 2, "rotation entries are not a rotation matrix")
        if drift > 1e-12:
            rotations[k] = orthonormalize(R)
    return PoseTrajectory(t=t, positions=data[:, 1:4], rotations=rotations)


def write_report_csv(result: RolloutResult, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(REPORT_HEADER + "\n")
        for k in range(len(result.trajectory)):
            fh.write(f"{_fmt(result.trajectory.t[k])},"
                     f"{_fmt(result.violation[k])},"
                     f"{_fmt(result.fcon_norm[k])},"
                     f"{int(result.opt_iters[k])}\n")


def write_model_json(payload: ModelPayload, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(payload.model_dump(), indent=2) + "\n")


def read_model_json(path) -> ModelPayload:
    with open(path, "r") as fh:
        return ModelPayload.model_validate(json.load(fh))
