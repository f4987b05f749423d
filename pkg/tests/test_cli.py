import json

import numpy as np
import pytest

from eimkit import SampleSet, SnapshotMatrix, deserialize_model, ingest_snapshots, write_snapshots
from eimkit.cli import main


@pytest.fixture
def snapshots(tmp_path, rng):
    xs = SampleSet("X", rng.uniform(size=(30, 2)))
    ys = SampleSet("Y", np.linspace(0.1, 0.9, 20))
    A = SnapshotMatrix(np.cos(np.outer(xs.points @ [1.0, 2.0], ys.points[:, 0])) + 0.1 * rng.standard_normal((30, 20)))
    path = tmp_path / "s.csv"
    with open(path, "w", newline="") as fh:
        write_snapshots(xs, ys, A, fh)
    return str(path), A


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_build_writes_model_and_pivot_table(snapshots, tmp_path, capsys):
    path, A = snapshots
    out = tmp_path / "m.json"
    code, stdout, _ = run(
        ["build", "--snapshots", path, "--dmax", "8", "--norm", "linf-joint", "--tol", "1e-12", "--out", str(out)],
        capsys,
    )
    assert code == 0
    m = deserialize_model(out.read_bytes())
    assert m.d == 8
    assert "pivot" in stdout and len(stdout.strip().splitlines()) == 9
    meta = json.loads(out.read_text())["meta"]
    assert meta == {"command": "build", "dmax": 8, "norm": "linf-joint", "innerNorm": "linf", "tol": 1e-12}


def test_build_to_stdout(snapshots, capsys):
    path, _ = snapshots
    code, stdout, _ = run(["build", "--snapshots", path, "--dmax", "3"], capsys)
    assert code == 0 and json.loads(stdout)["kind"] == "square"


def test_build_is_byte_identical(snapshots, tmp_path, capsys):
    path, _ = snapshots
    outs = []
    for k, threads in enumerate(["1", "3"]):
        out = tmp_path / f"m{k}.json"
        argv = ["--threads", threads, "build", "--snapshots", path, "--dmax", "6", "--norm", "y-norm-first"]
        assert run(argv + ["--inner-norm", "l2", "--out", str(out)], capsys)[0] == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_discard_evaluate_report(snapshots, tmp_path, capsys):
    path, A = snapshots
    model = tmp_path / "m.json"
    rect = tmp_path / "r.json"
    assert run(["build", "--snapshots", path, "--dmax", "8", "--out", str(model)], capsys)[0] == 0
    code, _, _ = run(["discard", "--model", str(model), "--snapshots", path, "--drop", "2,5", "--out", str(rect)], capsys)
    assert code == 0
    r = deserialize_model(rect.read_bytes())
    assert r.kind == "rectangular" and r.D.shape == (8, 6) and r.dropped == (2, 5)

    code, stdout, _ = run(["evaluate", "--model", str(model), "--snapshots", path, "--cell", "3,4"], capsys)
    m = deserialize_model(model.read_bytes())
    assert code == 0 and float(stdout) == pytest.approx(A.values[3, list(m.y_idx)] @ m.D.T @ A.values[list(m.x_idx), 4])

    grid = tmp_path / "g.csv"
    assert run(["evaluate", "--model", str(rect), "--snapshots", path, "--out", str(grid)], capsys)[0] == 0
    _, _, G = ingest_snapshots(str(grid))
    assert G.values.shape == A.values.shape

    code, stdout, _ = run(["report", "--model", str(model), "--snapshots", path], capsys)
    rep = json.loads(stdout)
    assert code == 0 and rep["interpolatory"] and rep["rowViolation"] <= 1e-10
    code, stdout, _ = run(["report", "--model", str(rect), "--snapshots", path], capsys)
    assert code == 0 and not json.loads(stdout)["interpolatory"]


def test_geim_round_trip(tmp_path, rng, capsys):
    library = rng.standard_normal((15, 12))
    dictionary = np.eye(12)
    np.savetxt(tmp_path / "lib.csv", library, delimiter=",", fmt="%.17g")
    np.savetxt(tmp_path / "dict.csv", dictionary, delimiter=",", fmt="%.17g")
    model = tmp_path / "g.json"
    argv = ["geim-build", "--library", str(tmp_path / "lib.csv"), "--dictionary", str(tmp_path / "dict.csv")]
    assert run(argv + ["--dmax", "5", "--out", str(model)], capsys)[0] == 0
    g = deserialize_model(model.read_bytes())
    assert g.kind == "geim" and g.d == 5

    p = g.func_idx[0]
    meas = ",".join(repr(float(v)) for v in library[p, list(g.form_idx)])
    code, stdout, _ = run(["geim-reconstruct", "--model", str(model), "--measurements=" + meas], capsys)
    assert code == 0
    np.testing.assert_allclose([float(v) for v in stdout.split(",")], library[p], atol=1e-10)

    meas = ",".join(repr(float(v)) for k, v in enumerate(library[p, list(g.form_idx)]) if k != 1)
    code, stdout, _ = run(["geim-reconstruct", "--model", str(model), "--measurements=" + meas, "--drop", "1"], capsys)
    assert code == 0 and len(stdout.split(",")) == 12


def test_paper_experiment(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, stdout, _ = run(["paper-experiment", "--seed", "42", "--n-eval", "1000", "--out", str(out)], capsys)
    assert code == 0
    stats = json.loads(out.read_text())["stats"]
    assert 1e-6 <= stats["square"]["mean"] <= 1e-3
    assert stats["rectangular"]["mean"] < stats["square"]["mean"]
    assert "mean" in stdout


def test_usage_errors_exit_1(snapshots, capsys):
    path, _ = snapshots
    assert run(["build", "--snapshots", path], capsys)[0] == 1
    assert run(["frobnicate"], capsys)[0] == 1
    code, _, err = run(["build", "--snapshots", path, "--dmax", "2", "--bogus"], capsys)
    assert code == 1 and "unrecognized" in err
    assert run(["discard", "--model", "m", "--snapshots", path, "--drop", "a,b"], capsys)[0] == 1


def test_threads_env_fallback(snapshots, monkeypatch, capsys):
    path, _ = snapshots
    monkeypatch.setenv("EIMKIT_THREADS", "nope")
    assert run(["build", "--snapshots", path, "--dmax", "2"], capsys)[0] == 1
    monkeypatch.setenv("EIMKIT_THREADS", "2")
    assert run(["build", "--snapshots", path, "--dmax", "2"], capsys)[0] == 0


def test_data_errors_exit_2(tmp_path, snapshots, capsys):
    path, _ = snapshots
    bad = tmp_path / "bad.csv"
    bad.write_text("x\\y,0,1\n0,1,nan\n")
    code, _, err = run(["build", "--snapshots", str(bad), "--dmax", "1"], capsys)
    assert code == 2 and err.startswith("model:") and "column 3" in err
    code, _, err = run(["build", "--snapshots", path, "--dmax", "50"], capsys)
    assert code == 2 and "d_max" in err
    code, _, err = run(["build", "--snapshots", str(tmp_path / "missing.csv"), "--dmax", "1"], capsys)
    assert code == 2


def test_discard_all_is_data_error(snapshots, tmp_path, capsys):
    path, _ = snapshots
    model = tmp_path / "m.json"
    run(["build", "--snapshots", path, "--dmax", "2", "--out", str(model)], capsys)
    code, _, err = run(["discard", "--model", str(model), "--snapshots", path, "--drop", "0,1"], capsys)
    assert code == 2 and err.startswith("rectangular:")
