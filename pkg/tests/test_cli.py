import json

import numpy as np
import pytest

from cvnn_landscape import __version__
from cvnn_landscape import io as cio
from cvnn_landscape import quadratic_net as qn
from cvnn_landscape.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip() else None)


@pytest.fixture
def trap_files(tmp_path, capsys):
    ds, w, g = tmp_path / "data.json", tmp_path / "trap.json", tmp_path / "global.json"
    assert main(["export-fixture", "--dataset", str(ds), "--weights", str(w)]) == 0
    assert main(["export-fixture", "--dataset", str(ds), "--weights", str(g), "--global-point"]) == 0
    capsys.readouterr()
    return ds, w, g


def test_report_header(capsys):
    code, rep = run(capsys, "experiment", "--instances", "0")
    assert code == 0
    assert rep["schema"] == "v1" and rep["version"] == __version__ and rep["command"] == "experiment"
    assert rep["config"]["seed"] == 7
    assert set(rep["config"]["tolerances"]) == {"grad_fd", "fixture", "gap"}
    assert "wall_clock_s" in rep


def test_no_timing_reports_are_byte_identical(capsys, tmp_path):
    path = tmp_path / "report.json"
    argv = ["experiment", "--instances", "1", "--inits", "2", "--no-timing", "--out", str(path)]
    outs = []
    for _ in range(2):
        assert main(argv) == 0
        stdout = capsys.readouterr().out
        assert path.read_text() == stdout
        outs.append(stdout.encode())
    assert outs[0] == outs[1]
    assert b"wall_clock_s" not in outs[0]


def test_verify_fixtures(capsys):
    code, rep = run(capsys, "verify-fixtures")
    checks = rep["checks"]
    assert checks["loss"]["passed"] and checks["h_real"]["passed"] and checks["h_complex"]["passed"]
    assert checks["h_complex"]["negative_eigs"] == 1
    # the expanded perturbation matches its closed form but does not lower the loss
    for row in checks["lemma24"].values():
        assert row["rel_error"] <= 1e-12 and not row["below_trap"]
    assert all(row["below_trap"] for row in checks["null_direction"].values())
    assert code == 1 and rep["passed"] is False


def test_certify_trap_is_not_global(capsys, trap_files):
    ds, w, _ = trap_files
    code, rep = run(capsys, "certify", str(w), str(ds))
    assert code == 3
    assert not rep["optimality"]["is_global"]
    assert abs(rep["saddle"]["quad_value"] + 1 / 54) < 1e-12


def test_certify_global_point(capsys, trap_files):
    ds, _, g = trap_files
    code, rep = run(capsys, "certify", str(g), str(ds))
    assert code == 0 and rep["optimality"]["is_global"]
    assert "saddle" not in rep


def test_exported_files_round_trip(trap_files):
    ds, w, _ = trap_files
    data, net = cio.load_dataset(ds), cio.load_weights(w)
    assert abs(qn.loss(net, data) - 1 / 9) < 1e-15


def test_io_errors_exit_2(capsys, tmp_path, trap_files):
    ds, w, _ = trap_files
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["certify", str(bad), str(ds)]) == 2
    assert main(["certify", str(w), str(tmp_path / "missing.json")]) == 2
    bad.write_text(json.dumps({"W": [[1, 2]]}))
    assert main(["certify", str(bad), str(ds)]) == 2


def test_usage_errors_exit_64(capsys):
    for argv in (["gallery", "no_such_function"], ["frobnicate"], ["experiment", "--step", "-1"], []):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main(["experiment", "--d", "3", "--k", "2"])
    assert exc.value.code == 64


def test_crelu_on_trap(capsys, tmp_path):
    wout = tmp_path / "crelu.json"
    code, rep = run(capsys, "crelu", "--inits", "3", "--iters", "3000", "--weights-out", str(wout))
    assert code == 0 and rep["passed"]
    assert abs(rep["constructed"]["loss"] - rep["baseline"]["ell"]) < 1e-10
    assert rep["local_min"]["is_local_min_sampled"] and rep["spurious"]["is_spurious"]
    assert wout.exists()


def test_crelu_linearly_fittable_exits_4(capsys, tmp_path):
    ds = tmp_path / "fit.json"
    X = np.array([[1.0, 0, 2], [0, 1, 3]])
    cio.save_dataset(qn.Dataset(X, 2 * X[0] - X[1] + 1), ds)
    code, rep = run(capsys, "crelu", "--dataset", str(ds))
    assert code == 4 and rep["hypothesis_unmet"]["reason"] == "LinearlyFittable"


def test_crelu_complex_targets_exit_4(capsys, tmp_path):
    ds = tmp_path / "cplx.json"
    cio.save_dataset(qn.Dataset(np.eye(2), [1j, 0]), ds)
    code, rep = run(capsys, "crelu", "--dataset", str(ds))
    assert code == 4 and rep["hypothesis_unmet"]["reason"] == "NotReal"


def test_gallery_all(capsys, tmp_path):
    out = tmp_path / "g"
    code, rep = run(capsys, "gallery", "all", "--out-dir", str(out), "--resolution", "21", "--samples", "2000")
    assert code == 0 and rep["passed"]
    assert len(list(out.iterdir())) == 18
    assert all(c["escapes"] for c in rep["spot_checks"])
    assert any(c["function"] == "cos_plus_2" and abs(c["x"] - np.pi) < 1e-12 for c in rep["spot_checks"])


def test_gallery_csv_single(capsys, tmp_path):
    code, rep = run(capsys, "gallery", "cubic", "--format", "csv", "--out-dir", str(tmp_path), "--resolution", "5")
    assert code == 0 and len(rep["files"]) == 2
    lines = (tmp_path / "cubic_complex.csv").read_text().splitlines()
    assert lines[0] == "re,im,mod2" and len(lines) == 26


def test_experiment_empty_and_small(capsys):
    code, rep = run(capsys, "experiment", "--instances", "0")
    assert code == 0 and rep["summary"]["instances_run"] == 0
    code, rep = run(capsys, "experiment", "--instances", "2", "--inits", "2")
    assert code == 0 and rep["summary"]["instances_run"] == 2


def test_real_projected_trap_fails(capsys):
    code, rep = run(capsys, "experiment", "--instances", "0", "--inits", "1", "--real-projected", "--seed-trap")
    assert code == 1 and not rep["passed"]
    (record,) = rep["summary"]["per_instance"]
    assert record["trap_start"] and abs(record["gap"] - 1 / 9) < 1e-9
