"""Command-line client: generate demonstrations, train primitives, roll
them out, or serve the HTTP API.

Exit codes: 0 ok, 2 I/O failure, 3 malformed input CSV, 4 training
failure, 5 rollout failure. Diagnostics go to stderr; data only to files.
"""

from __future__ import annotations

import argparse
import sys

import httpx
import numpy as np

from . import __version__
from .client import ServiceClient, ServiceError
from .io import (TrajectoryParseError, read_model_json, read_trajectory_csv,
                 write_model_json, write_trajectory_csv)
from .pipeline import rotation_from_euler_xyz
from .schemas import (DemoRequest, ReportPayload, RolloutRequest,
                      TrainRequest, TransformPayload, trajectory_from_payload,
                      trajectory_to_payload)

EXIT_OK = 0
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_TRAIN = 4
EXIT_ROLLOUT = 5

_KIND_EXIT = {"validation": EXIT_TRAIN, "training": EXIT_TRAIN,
              "rollout": EXIT_ROLLOUT}


def _fail(code: int, message: str) -> int:
    print(f"nhdmp: error: {message}", file=sys.stderr)
    return code


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _write_report_csv(report: ReportPayload, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("t,violation,fcon_norm,opt_iters\n")
        for k in range(len(report.t)):
            fh.write(f"{_fmt(report.t[k])},{_fmt(report.violation[k])},"
                     f"{_fmt(report.fcon_norm[k])},{report.opt_iters[k]}\n")


def cmd_gen_demo(args, client: ServiceClient) -> int:
    try:
        resp = client.gen_demo(DemoRequest(dt=args.dt, duration=args.duration))
    except ServiceError as exc:
        return _fail(_KIND_EXIT.get(exc.kind, EXIT_TRAIN), str(exc))
    except httpx.HTTPError as exc:
        return _fail(EXIT_IO, f"service unreachable: {exc}")
    try:
        write_trajectory_csv(trajectory_from_payload(resp.trajectory), args.out)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {args.out}: {exc}")
    print(f"wrote {len(resp.trajectory.t)} samples to {args.out}", file=sys.stderr)
    return EXIT_OK


def _transform_payload(args) -> TransformPayload | None:
    offset_cm = np.asarray(args.offset_cm, dtype=float)
    rpy_deg = np.asarray(args.rpy_deg, dtype=float)
    if not offset_cm.any() and not rpy_deg.any():
        return None
    R = rotation_from_euler_xyz(*np.deg2rad(rpy_deg))
    return TransformPayload(rotation=R.reshape(9).tolist(),
                            translation_m=(offset_cm / 100.0).tolist())


def cmd_train(args, client: ServiceClient) -> int:
    try:
        traj = read_trajectory_csv(args.input)
    except TrajectoryParseError as exc:
        return _fail(EXIT_PARSE, f"{args.input}: {exc}")
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read {args.input}: {exc}")
    req = TrainRequest(trajectory=trajectory_to_payload(traj), n_rbf=args.rbf,
                       tau=args.tau, alpha_x=args.alpha_x, beta_x=args.beta_x,
                       alpha_s=args.alpha_s, cutoff_hz=args.cutoff_hz,
                       transform=_transform_payload(args))
    try:
        resp = client.train(req)
    except ServiceError as exc:
        return _fail(_KIND_EXIT.get(exc.kind, EXIT_TRAIN), str(exc))
    except httpx.HTTPError as exc:
        return _fail(EXIT_IO, f"service unreachable: {exc}")
    try:
        write_model_json(resp.model, args.model_out)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {args.model_out}: {exc}")
    rp = ", ".join(f"{v:.3g}" for v in resp.forcing_rmse_position)
    rq = ", ".join(f"{v:.3g}" for v in resp.forcing_rmse_orientation)
    print(f"forcing reconstruction RMSE position [{rp}] orientation [{rq}]",
          file=sys.stderr)
    print(f"initial velocity violation removed: "
          f"{resp.pre_projection_violation:.3g} m/s", file=sys.stderr)
    return EXIT_OK


def cmd_rollout(args, client: ServiceClient) -> int:
    try:
        model = read_model_json(args.model)
    except (ValueError, KeyError) as exc:
        return _fail(EXIT_PARSE, f"{args.model}: {exc}")
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot read {args.model}: {exc}")
    req = RolloutRequest(model=model, mode=args.mode, dt=args.dt,
                         duration=args.duration)
    try:
        resp = client.rollout(req)
    except ServiceError as exc:
        code = _KIND_EXIT.get(exc.kind, EXIT_ROLLOUT)
        suffix = f" (step {exc.step})" if exc.step is not None else ""
        return _fail(code, str(exc) + suffix)
    except httpx.HTTPError as exc:
        return _fail(EXIT_IO, f"service unreachable: {exc}")
    report_path = args.report or f"{args.out}.report.csv"
    try:
        write_trajectory_csv(trajectory_from_payload(resp.trajectory), args.out)
        _write_report_csv(resp.report, report_path)
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write output: {exc}")
    s = resp.summary
    print(f"max |violation| = {s.max_violation:.6g} m/s, "
          f"max ||f_con|| = {s.max_fcon_norm:.6g} m/s^2, "
          f"final goal error = {s.final_position_error:.6g} m / "
          f"{s.final_orientation_error:.6g} rad", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args, _client: ServiceClient | None = None) -> int:
    import uvicorn
    uvicorn.run("nhdmp.service:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nhdmp",
        description="Constrained pose movement primitives: demo generation, "
                    "training and rollouts over the nhdmp service.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--server", default=None,
                        help="base URL of a running service; default runs "
                             "the service in-process")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-demo", help="generate the synthetic cutting demonstration")
    p.add_argument("--out", required=True, help="output trajectory CSV")
    p.add_argument("--dt", type=float, default=0.001)
    p.add_argument("--duration", type=float, default=1.0)
    p.set_defaults(func=cmd_gen_demo)

    p = sub.add_parser("train", help="fit a movement primitive to a trajectory CSV")
    p.add_argument("input", help="demonstration trajectory CSV")
    p.add_argument("--model-out", required=True, help="output model JSON")
    p.add_argument("--rbf", type=int, default=100, help="basis functions per axis")
    p.add_argument("--tau", type=float, default=1.0)
    p.add_argument("--alpha-x", type=float, default=25.0)
    p.add_argument("--beta-x", type=float, default=6.25)
    p.add_argument("--alpha-s", type=float, default=1.0)
    p.add_argument("--cutoff-hz", type=float, default=4.8)
    p.add_argument("--offset-cm", type=float, nargs=3, default=[0.0, 0.0, 0.0],
                   metavar=("X", "Y", "Z"),
                   help="sensor-to-blade translation in centimeters")
    p.add_argument("--rpy-deg", type=float, nargs=3, default=[0.0, 0.0, 0.0],
                   metavar=("R", "P", "Y"),
                   help="sensor-to-blade rotation, extrinsic xyz Euler, degrees")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("rollout", help="integrate a trained primitive")
    p.add_argument("model", help="model JSON from 'train'")
    p.add_argument("--mode", choices=["nominal", "constrained", "optimized"],
                   default="nominal")
    p.add_argument("--out", required=True, help="output trajectory CSV")
    p.add_argument("--report", default=None,
                   help="output report CSV (default: <out>.report.csv)")
    p.add_argument("--dt", type=float, default=0.001)
    p.add_argument("--duration", type=float, default=None,
                   help="rollout length in seconds (default: the model's tau)")
    p.set_defaults(func=cmd_rollout)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "serve":
        return cmd_serve(args)
    with ServiceClient(base_url=args.server) as client:
        return args.func(args, client)


if __name__ == "__main__":
    sys.exit(main())
