"""Pydantic request/response models and converters to the core types.

The model payload doubles as the on-disk model JSON document, so the wire
format and the file format are one schema.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel

from .canonical import ForcingTerm
from .dmp import DmpModel, RolloutResult
from .pipeline import RigidTransform
from .trajectory import PoseTrajectory


class TrajectoryPayload(BaseModel):
    sample_rate_hz: float
    t: list[float]
    positions: list[list[float]]      # n x 3
    rotations: list[list[float]]      # n x 9, row-major


class ForcingPayload(BaseModel):
    centers: list[float]
    widths: list[float]
    weights: list[float]


class ModelPayload(BaseModel):
    tau: float
    alpha_x: float
    beta_x: float
    alpha_s: float
    n_rbf: int
    position_forcing: list[ForcingPayload]      # x, y, z
    orientation_forcing: list[ForcingPayload]
    p_start: list[float]
    p_goal: list[float]
    r_start: list[float]                        # 9, row-major
    r_goal: list[float]
    v_start: list[float]
    w_start: list[float]


class TransformPayload(BaseModel):
    rotation: list[float] = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]
    translation_m: list[float] = [0.0, 0.0, 0.0]


class DemoRequest(BaseModel):
    dt: float = 0.001
    duration: float = 1.0


class DemoResponse(BaseModel):
    trajectory: TrajectoryPayload


class TrainRequest(BaseModel):
    trajectory: TrajectoryPayload
    n_rbf: int = 100
    tau: float = 1.0
    alpha_x: float = 25.0
    beta_x: float = 6.25
    alpha_s: float = 1.0
    cutoff_hz: float | None = 4.8
    transform: TransformPayload | None = None
    body_axis: list[float] = [0.0, 1.0, 0.0]


class TrainResponse(BaseModel):
    model: ModelPayload
    forcing_rmse_position: list[float]
    forcing_rmse_orientation: list[float]
    pre_projection_violation: float


class RolloutRequest(BaseModel):
    model: ModelPayload
    mode: Literal["nominal", "constrained", "optimized"] = "nominal"
    dt: float = 0.001
    duration: float | None = None
    body_axis: list[float] = [0.0, 1.0, 0.0]


class ReportPayload(BaseModel):
    t: list[float]
    violation: list[float]
    fcon_norm: list[float]
    opt_iters: list[int]


class RolloutSummary(BaseModel):
    max_violation: float
    max_fcon_norm: float
    final_position_error: float
    final_orientation_error: float
    pre_projection_violation: float
    samples: int


class RolloutResponse(BaseModel):
    trajectory: TrajectoryPayload
    report: ReportPayload
    summary: RolloutSummary


class ErrorDetail(BaseModel):
    kind: Literal["validation", "training", "rollout"]
    message: str
    step: int | None = None


def trajectory_to_payload(traj: PoseTrajectory) -> TrajectoryPayload:
    return TrajectoryPayload(
        sample_rate_hz=traj.sample_rate,
        t=traj.t.tolist(),
        positions=traj.positions.tolist(),
        rotations=traj.rotations.reshape(len(traj), 9).tolist(),
    )


def trajectory_from_payload(payload: TrajectoryPayload) -> PoseTrajectory:
    rotations = np.asarray(payload.rotations, dtype=float).reshape(-1, 3, 3)
    return PoseTrajectory(t=np.asarray(payload.t, dtype=float),
                          positions=np.asarray(payload.positions, dtype=float),
                          rotations=rotations)


def _forcing_to_payload(term: ForcingTerm) -> ForcingPayload:
    return ForcingPayload(centers=term.centers.tolist(),
                          widths=term.widths.tolist(),
                          weights=term.weights.tolist())


def _forcing_from_payload(payload: ForcingPayload) -> ForcingTerm:
    return ForcingTerm(centers=np.asarray(payload.centers, dtype=float),
                       widths=np.asarray(payload.widths, dtype=float),
                       weights=np.asarray(payload.weights, dtype=float))


def model_to_payload(model: DmpModel) -> ModelPayload:
    return ModelPayload(
        tau=model.tau, alpha_x=model.alpha_x, beta_x=model.beta_x,
        alpha_s=model.alpha_s, n_rbf=len(model.f_p[0].centers),
        position_forcing=[_forcing_to_payload(t) for t in model.f_p],
        orientation_forcing=[_forcing_to_payload(t) for t in model.f_q],
        p_start=model.p0.tolist(), p_goal=model.p_g.tolist(),
        r_start=model.R0.reshape(9).tolist(),
        r_goal=model.R_g.reshape(9).tolist(),
        v_start=model.p_dot0.tolist(), w_start=model.w0.tolist(),
    )


def model_from_payload(payload: ModelPayload) -> DmpModel:
    return DmpModel(
        tau=payload.tau, alpha_x=payload.alpha_x, beta_x=payload.beta_x,
        alpha_s=payload.alpha_s,
        f_p=tuple(_forcing_from_payload(t) for t in payload.position_forcing),
        f_q=tuple(_forcing_from_payload(t) for t in payload.orientation_forcing),
        p0=np.asarray(payload.p_start, dtype=float),
        p_g=np.asarray(payload.p_goal, dtype=float),
        R0=np.asarray(payload.r_start, dtype=float).reshape(3, 3),
        R_g=np.asarray(payload.r_goal, dtype=float).reshape(3, 3),
        p_dot0=np.asarray(payload.v_start, dtype=float),
        w0=np.asarray(payload.w_start, dtype=float),
    )


def transform_from_payload(payload: TransformPayload) -> RigidTransform:
    return RigidTransform(
        R=np.asarray(payload.rotation, dtype=float).reshape(3, 3),
        t=np.asarray(payload.translation_m, dtype=float),
    )


def report_to_payload(result: RolloutResult) -> ReportPayload:
    return ReportPayload(t=result.trajectory.t.tolist(),
                         violation=result.violation.tolist(),
                         fcon_norm=result.fcon_norm.tolist(),
                         opt_iters=result.opt_iters.tolist())
