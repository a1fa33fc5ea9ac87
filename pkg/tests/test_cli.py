import csv
import io
import json
import os
import subprocess
import sys

import pytest

from lift_spectra import cli
from lift_spectra.verify import InequalityReport


def run(argv, capsys):
    rc = cli.main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def tree(root):
    return sorted(os.path.relpath(os.path.join(d, f), root) for d, _, fs in os.walk(root) for f in fs)


def test_spectrum_of_one_lift(tmp_path, capsys):
    rc, out, _ = run(["spectrum", "--base", "petersen", "--n", "1", "--seed", "1", "--out", str(tmp_path)], capsys)
    assert rc == 0
    result = json.loads(out)
    assert result["lambda_new"] == pytest.approx(2, abs=1e-12)
    assert result["ramanujan"] is True and result["method"] == "dense"
    assert json.loads((tmp_path / "spectrum.json").read_text()) == result
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["command"] == "spectrum" and manifest["args"]["seed"] == 1
    assert set(manifest["outputs"]) == {"spectrum.json", "spectrum.csv"}


def test_reproduce_fig2_outputs(tmp_path, capsys):
    rc, out, _ = run(["reproduce-fig2", "--trials", "50", "--seed", "9", "--jobs", "1", "--out", str(tmp_path)], capsys)
    assert rc == 0
    files = tree(tmp_path)
    ecdfs = [f for f in files if f.endswith(".ecdf.csv")]
    assert len(ecdfs) == 3
    assert "fig2b.gp" in files and "fig2b_ks.csv" in files
    rows = list(csv.reader(io.StringIO((tmp_path / "fig2b_ks.csv").read_text())))
    assert len(rows) == 4 and all(len(r) == 4 for r in rows)
    ks = [[float(x) for x in r[1:]] for r in rows[1:]]
    for i in range(3):
        assert ks[i][i] == 0
        for j in range(3):
            assert ks[i][j] == ks[j][i]
    summary = json.loads(out)
    assert [b["n"] for b in summary["b"]["batches"]] == [500, 200, 100]
    assert all(b["trials"] == 50 for b in summary["b"]["batches"])


def test_verify_petersen(tmp_path, capsys):
    argv = ["verify", "--base", "petersen", "--n", "50", "--seed", "3", "--out", str(tmp_path)]
    rc, out, _ = run(argv + ["--trials", "50", "--lifts", "3", "--pairs", "50"], capsys)
    assert rc == 0
    lines = (tmp_path / "reports.jsonl").read_text().splitlines()
    reports = [json.loads(line) for line in lines]
    assert reports and all(r["margin"] >= 0 for r in reports if r["status"] in ("ok", "violated"))
    assert json.loads(out)["mixing"]["status"] == "ok"


def test_verify_counterexample_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.setattr(cli, "run_suite", lambda *a, **k: [InequalityReport("fake", 2.0, 1.0)])
    rc, _, err = run(["verify", "--base", "k4", "--n", "2", "--out", str(tmp_path)], capsys)
    assert rc == 5 and "fake" in err


def test_solver_failure_exit_code(tmp_path, capsys):
    argv = ["spectrum", "--base", "petersen", "--n", "100", "--dense-cap", "10", "--lanczos-tol", "1e-30"]
    rc, _, err = run(argv + ["--out", str(tmp_path)], capsys)
    assert rc == 4 and "lift-spectra:" in err


@pytest.mark.parametrize(
    "argv,code",
    [
        (["spectrum", "--base", "nosuchgraph", "--n", "3"], 3),
        (["spectrum", "--base", "missing/file.txt", "--n", "3"], 3),
        (["ecdf", "--base", "k4", "--n", "3", "--trials", "2", "--quantiles", "x"], 3),
        (["cheeger", "--base", "cycle(30)"], 3),
    ],
)
def test_input_errors(tmp_path, capsys, argv, code):
    rc, _, err = run(argv + ["--out", str(tmp_path)], capsys)
    assert rc == code and err.startswith("lift-spectra:")


@pytest.mark.parametrize(
    "argv",
    [
        ["spectrum", "--base", "petersen"],
        ["spectrum", "--base", "petersen", "--n", "0"],
        ["ecdf", "--base", "k4", "--n", "3", "--seed", "-1"],
        ["nosuchcommand"],
        [],
    ],
)
def test_usage_errors_exit_2(tmp_path, argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv + ["--out", str(tmp_path)] if argv and argv[0] != "nosuchcommand" else argv)
    assert exc.value.code == 2


def test_console_script_runs():
    out = subprocess.run(
        [sys.executable, "-m", "lift_spectra.cli", "spectrum", "--base", "petersen"],
        capture_output=True, text=True,
    )
    assert out.returncode == 2 and "--n" in out.stderr


@pytest.mark.parametrize(
    "argv",
    [
        ["catalog"],
        ["cheeger", "--base", "petersen"],
        ["lift", "--base", "k4", "--n", "4"],
        ["ecdf", "--base", "k4", "--n", "4", "--trials", "5"],
        ["reproduce-fig1", "--ns", "3", "5", "--trials", "4"],
    ],
)
def test_no_writes_outside_out(tmp_path, capsys, monkeypatch, argv):
    work = tmp_path / "work"
    work.mkdir()
    monkeypatch.chdir(work)
    rc, _, _ = run(argv + ["--out", "results", "--jobs", "1"], capsys)
    assert rc == 0
    assert os.listdir(work) == ["results"]
    assert os.listdir(tmp_path) == ["work"]
    assert "manifest.json" in os.listdir(work / "results")


def test_cheeger_command(tmp_path, capsys):
    rc, out, _ = run(["cheeger", "--base", "k4", "--out", str(tmp_path)], capsys)
    assert rc == 0
    result = json.loads(out)
    assert result["h"] == 2 and len(result["argmin"]) == 2


def test_lift_command_round_trips(tmp_path, capsys):
    from lift_spectra.lift import LiftedGraph, random_lift
    from lift_spectra.graphs import catalog

    rc, out, _ = run(["lift", "--base", "k4", "--n", "5", "--seed", "4", "--out", str(tmp_path)], capsys)
    assert rc == 0
    h = LiftedGraph.from_json((tmp_path / "lift.json").read_text())
    assert h.identical(random_lift(catalog("k4"), 5, 4))
    assert json.loads(out)["edges"] == 30


def test_replay_is_identical_across_jobs(tmp_path, capsys):
    first = tmp_path / "first"
    argv = ["reproduce-fig1", "--ns", "5", "10", "--trials", "12", "--seed", "21", "--jobs", "1"]
    assert run(argv + ["--out", str(first)], capsys)[0] == 0
    for jobs in ("1", "3"):
        again = tmp_path / f"replay{jobs}"
        rc, _, err = run(["replay", "--manifest", str(first / "manifest.json"), "--jobs", jobs, "--out", str(again)], capsys)
        assert rc == 0
        assert json.loads(err.splitlines()[-1])["identical"] is True
        for name in json.loads((first / "manifest.json").read_text())["outputs"]:
            assert (again / name).read_bytes() == (first / name).read_bytes()


def test_replay_detects_changed_outputs(tmp_path, capsys):
    first = tmp_path / "first"
    assert run(["spectrum", "--base", "k4", "--n", "6", "--seed", "2", "--out", str(first)], capsys)[0] == 0
    manifest = json.loads((first / "manifest.json").read_text())
    manifest["outputs"]["spectrum.json"] = "0" * 64
    (first / "manifest.json").write_text(json.dumps(manifest))
    rc, _, err = run(["replay", "--manifest", str(first / "manifest.json"), "--out", str(tmp_path / "r")], capsys)
    assert rc == 1 and "spectrum.json" in err


def test_replay_rejects_bad_manifest(tmp_path, capsys):
    bad = tmp_path / "m.json"
    bad.write_text("{}")
    rc, _, _ = run(["replay", "--manifest", str(bad), "--out", str(tmp_path / "r")], capsys)
    assert rc == 3


def test_seed_environment_fallback(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "77")
    rc, out, _ = run(["spectrum", "--base", "k4", "--n", "8", "--out", str(tmp_path / "a")], capsys)
    assert rc == 0 and json.loads(out)["seed"] == 77
    monkeypatch.delenv(cli.SEED_ENV)
    rc, out2, _ = run(["spectrum", "--base", "k4", "--n", "8", "--seed", "77", "--out", str(tmp_path / "b")], capsys)
    assert json.loads(out2) == json.loads(out)
    rc, out3, _ = run(["spectrum", "--base", "k4", "--n", "8", "--out", str(tmp_path / "c")], capsys)
    assert json.loads(out3)["seed"] == 0
    monkeypatch.setenv(cli.SEED_ENV, "notanumber")
    rc, _, _ = run(["spectrum", "--base", "k4", "--n", "8", "--out", str(tmp_path / "d")], capsys)
    assert rc == 3


def test_csv_format(tmp_path, capsys):
    rc, out, _ = run(["ecdf", "--base", "k4", "--n", "4", "--trials", "6", "--format", "csv", "--out", str(tmp_path)], capsys)
    assert rc == 0 and out.startswith("lambda,ecdf\n")
    assert out == (tmp_path / "ecdf.csv").read_text()
