import json

import numpy as np
import pytest

from nhdmp.cli import main
from nhdmp.io import read_trajectory_csv

from conftest import per_axis_rmse

DT = "0.005"


def run(*argv):
    return main(list(argv))


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    ws = tmp_path_factory.mktemp("cli")
    demo = ws / "demo.csv"
    model = ws / "model.json"
    assert run("gen-demo", "--out", str(demo), "--dt", DT) == 0
    assert run("train", str(demo), "--model-out", str(model), "--rbf", "60") == 0
    return ws


def test_gen_demo_row_counts(tmp_path):
    out = tmp_path / "demo.csv"
    assert run("gen-demo", "--out", str(out)) == 0
    assert len(out.read_text().splitlines()) == 1 + 1001
    assert run("gen-demo", "--out", str(out), "--dt", "0.01") == 0
    assert len(out.read_text().splitlines()) == 1 + 101


def test_gen_demo_unwritable_path_exits_2(tmp_path):
    assert run("gen-demo", "--out", str(tmp_path / "nodir" / "demo.csv")) == 2


def test_gen_demo_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run("gen-demo", "--out", str(a))
    run("gen-demo", "--out", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_train_truncated_csv_exits_3(workspace, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    lines = (workspace / "demo.csv").read_text().splitlines()
    lines[7] = ",".join(lines[7].split(",")[:5])
    bad.write_text("\n".join(lines) + "\n")
    code = run("train", str(bad), "--model-out", str(tmp_path / "m.json"))
    assert code == 3
    assert "line 8" in capsys.readouterr().err


def test_train_missing_input_exits_2(tmp_path):
    code = run("train", str(tmp_path / "missing.csv"),
               "--model-out", str(tmp_path / "m.json"))
    assert code == 2


def test_train_one_basis_exits_4(workspace, tmp_path):
    code = run("train", str(workspace / "demo.csv"),
               "--model-out", str(tmp_path / "m.json"), "--rbf", "1")
    assert code == 4


def test_train_deterministic(workspace, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("train", str(workspace / "demo.csv"), "--model-out", str(a), "--rbf", "60")
    run("train", str(workspace / "demo.csv"), "--model-out", str(b), "--rbf", "60")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_bytes() == (workspace / "model.json").read_bytes()


def test_train_model_document_shape(workspace):
    doc = json.loads((workspace / "model.json").read_text())
    for key in ("tau", "alpha_x", "beta_x", "alpha_s", "n_rbf",
                "position_forcing", "orientation_forcing",
                "p_start", "p_goal", "r_start", "r_goal"):
        assert key in doc
    assert len(doc["position_forcing"]) == 3
    assert len(doc["position_forcing"][0]["weights"]) == 60


def test_rollout_nominal_round_trip(workspace, tmp_path, capsys):
    out = tmp_path / "roll.csv"
    report = tmp_path / "report.csv"
    code = run("rollout", str(workspace / "model.json"), "--mode", "nominal",
               "--out", str(out), "--report", str(report), "--dt", DT)
    assert code == 0
    err = capsys.readouterr().err
    assert "max |violation|" in err

    demo = read_trajectory_csv(workspace / "demo.csv")
    roll = read_trajectory_csv(out)
    assert len(roll) == len(demo)
    assert np.all(per_axis_rmse(roll.positions, demo.positions) < 1e-2)

    lines = report.read_text().splitlines()
    assert lines[0] == "t,violation,fcon_norm,opt_iters"
    violations = np.array([float(l.split(",")[1]) for l in lines[1:]])
    assert np.abs(violations).max() > 0.1   # the demonstration violates


def test_rollout_constrained_report(workspace, tmp_path):
    out = tmp_path / "roll.csv"
    code = run("rollout", str(workspace / "model.json"), "--mode", "constrained",
               "--out", str(out), "--dt", DT)
    assert code == 0
    report = tmp_path / "roll.csv.report.csv"   # default derived path
    lines = report.read_text().splitlines()
    violations = np.array([float(l.split(",")[1]) for l in lines[1:]])
    assert np.abs(violations).max() < 1e-5


def test_rollout_deterministic(workspace, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for path in (a, b):
        run("rollout", str(workspace / "model.json"), "--mode", "constrained",
            "--out", str(path), "--dt", DT)
    assert a.read_bytes() == b.read_bytes()


def test_rollout_bad_model_file_exits_3(tmp_path):
    bad = tmp_path / "model.json"
    bad.write_text("{not json")
    assert run("rollout", str(bad), "--out", str(tmp_path / "r.csv")) == 3


def test_rollout_missing_model_exits_2(tmp_path):
    assert run("rollout", str(tmp_path / "missing.json"),
               "--out", str(tmp_path / "r.csv")) == 2


def _near_pi_model_path(tmp_path):
    from nhdmp.canonical import ForcingTerm, rbf_centers_widths
    from nhdmp.dmp import DmpModel
    from nhdmp.io import write_model_json
    from nhdmp.rotations import exp_map
    from nhdmp.schemas import model_to_payload

    centers, widths = rbf_centers_widths(5, 1.0, 1.0, 1.0)
    f = tuple(ForcingTerm(centers, widths, np.zeros(5)) for _ in range(3))
    model = DmpModel(tau=1.0, alpha_x=25.0, beta_x=6.25, alpha_s=1.0,
                     f_p=f, f_q=f, p0=np.zeros(3), p_g=np.zeros(3),
                     R0=np.eye(3), R_g=exp_map([0.0, 0.0, 1.0], np.pi - 1e-9))
    path = tmp_path / "nearpi.json"
    write_model_json(model_to_payload(model), path)
    return path


def test_rollout_singularity_exits_5(tmp_path, capsys):
    path = _near_pi_model_path(tmp_path)
    code = run("rollout", str(path), "--mode", "nominal",
               "--out", str(tmp_path / "r.csv"), "--duration", "0.01")
    assert code == 5
    assert "step 1" in capsys.readouterr().err


def test_rollout_optimized_mode(workspace, tmp_path):
    out = tmp_path / "opt.csv"
    report = tmp_path / "opt-report.csv"
    code = run("rollout", str(workspace / "model.json"), "--mode", "optimized",
               "--out", str(out), "--report", str(report), "--dt", "0.002")
    assert code == 0
    lines = report.read_text().splitlines()
    violations = np.array([float(l.split(",")[1]) for l in lines[1:]])
    fcon = np.array([float(l.split(",")[2]) for l in lines[1:]])
    iters = np.array([int(l.split(",")[3]) for l in lines[1:]])
    assert np.abs(violations).max() < 1e-5
    assert fcon.max() < 1e-4
    assert iters.max() > 0   # the optimizer actually ran
