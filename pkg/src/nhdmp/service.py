"""HTTP service wrapping the core package.

Stateless compute endpoints: the model document travels in the request so
any number of clients can train and roll out against one running instance.
Errors carry a structured detail ``{kind, message, step}`` that clients
map onto their own error handling.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, HTTPException

from . import __version__
from .canonical import DegenerateBasis
from .constraints import ConstraintSpec
from .dmp import RolloutMode, RolloutStepError, goal_errors, rollout
from .pipeline import NyquistViolation, gen_numerical_demo, preprocess, train
from .schemas import (DemoRequest, DemoResponse, RolloutRequest,
                      RolloutResponse, RolloutSummary, TrainRequest,
                      TrainResponse, model_from_payload,
                      model_to_payload, report_to_payload,
                      trajectory_from_payload, trajectory_to_payload,
                      transform_from_payload)

app = FastAPI(title="nhdmp", version=__version__)


def _error(status: int, kind: str, message: str, step: int | None = None):
    detail = {"kind": kind, "message": message}
    if step is not None:
        detail["step"] = step
    return HTTPException(status_code=status, detail=detail)


def _constraint_spec(body_axis) -> ConstraintSpec:
    try:
        return ConstraintSpec(body_axis=np.asarray(body_axis, dtype=float))
    except ValueError as exc:
        raise _error(422, "validation", str(exc)) from exc


@app.get("/health")
def health():
    return {"status": "ok", "service": "nhdmp", "version": __version__}


@app.post("/demo", response_model=DemoResponse)
def demo(req: DemoRequest) -> DemoResponse:
    """Generate the closed-form cutting demonstration."""
    try:
        traj = gen_numerical_demo(dt=req.dt, T=req.duration)
    except ValueError as exc:
        raise _error(422, "validation", str(exc)) from exc
    return DemoResponse(trajectory=trajectory_to_payload(traj))


@app.post("/train", response_model=TrainResponse)
def train_endpoint(req: TrainRequest) -> TrainResponse:
    """Preprocess a demonstration and fit a movement primitive."""
    spec = _constraint_spec(req.body_axis)
    try:
        traj = trajectory_from_payload(req.trajectory)
        transform = (transform_from_payload(req.transform)
                     if req.transform is not None else None)
        pre = preprocess(traj, transform, req.cutoff_hz, spec)
        result = train(pre.trajectory, n_rbf=req.n_rbf, tau=req.tau,
                       alpha_x=req.alpha_x, beta_x=req.beta_x,
                       alpha_s=req.alpha_s,
                       initial_velocity=pre.initial_velocity)
    except (DegenerateBasis, NyquistViolation) as exc:
        raise _error(422, "training", str(exc)) from exc
    except ValueError as exc:
        raise _error(422, "validation", str(exc)) from exc
    return TrainResponse(
        model=model_to_payload(result.model),
        forcing_rmse_position=result.forcing_rmse_position.tolist(),
        forcing_rmse_orientation=result.forcing_rmse_orientation.tolist(),
        pre_projection_violation=pre.pre_projection_violation,
    )


@app.post("/rollout", response_model=RolloutResponse)
def rollout_endpoint(req: RolloutRequest) -> RolloutResponse:
    """Integrate a trained primitive in nominal, constrained or optimized
    mode and report per-sample constraint diagnostics."""
    spec = _constraint_spec(req.body_axis)
    try:
        model = model_from_payload(req.model)
    except ValueError as exc:
        raise _error(422, "validation", str(exc)) from exc
    try:
        result = rollout(model, RolloutMode(req.mode), spec, dt=req.dt,
                         T=req.duration)
    except RolloutStepError as exc:
        raise _error(422, "rollout", str(exc), step=exc.step_index) from exc
    except ValueError as exc:
        raise _error(422, "validation", str(exc)) from exc
    if not bool(result.opt_converged.all()):
        step = int(np.nonzero(~result.opt_converged)[0][0])
        raise _error(422, "rollout",
                     f"optimizer did not converge at step {step}", step=step)
    p_err, r_err = goal_errors(model, result)
    return RolloutResponse(
        trajectory=trajectory_to_payload(result.trajectory),
        report=report_to_payload(result),
        summary=RolloutSummary(
            max_violation=result.max_violation,
            max_fcon_norm=result.max_fcon_norm,
            final_position_error=p_err,
            final_orientation_error=r_err,
            pre_projection_violation=result.pre_projection_violation,
            samples=len(result.trajectory),
        ),
    )
