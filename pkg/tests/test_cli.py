import json
import subprocess
import sys

import pytest

from paraqube.cli import dispatch, parse_range, UsageError
from paraqube.qubo import read_instance
from paraqube.solvers import SampleSet


@pytest.fixture
def h1(tmp_path):
    path = tmp_path / "h1.qubo"
    assert dispatch(["generate", "--system", "H1", "--timepoints", "3", "--bits", "2", "--range-exp", "0",
                     "--psi0", "basis:0", "--out", str(path)]) == 0
    return path


def test_parse_range():
    assert parse_range("2..6") == [2, 3, 4, 5, 6]
    assert parse_range("2,4,8") == [2, 4, 8]
    assert parse_range("3") == [3]
    with pytest.raises(UsageError):
        parse_range("5..2")


def test_generate(h1):
    inst = read_instance(h1)
    assert inst.n_bits == 24 and inst.metadata["system"] == "H1" and inst.metadata["psi0"] == "basis:0"


def test_generate_h7_params(tmp_path):
    out = tmp_path / "h7.qubo"
    assert dispatch(["generate", "--system", "H7", "--alpha", "0.1", "--timepoints", "2", "--out", str(out)]) == 0
    assert read_instance(out).metadata["alpha"] == 0.1
    assert dispatch(["generate", "--system", "H7", "--alpha", "2.0", "--timepoints", "2", "--out", str(out)]) == 1


def test_solve_decode_pipeline(h1, tmp_path):
    s = tmp_path / "s.csv"
    args = ["solve", "--in", str(h1), "--solver", "sa", "--samples", "100", "--runs", "3", "--seed", "7",
            "--config", str(_config(tmp_path, {"sweeps": 300})), "--deterministic", "--out", str(s)]
    assert dispatch(args) == 0
    first = s.read_bytes()
    assert dispatch(args) == 0
    assert s.read_bytes() == first
    samples = SampleSet.from_csv(s)
    assert samples.total == 300 and samples.metadata["seed"] == "7"
    assert "created" not in samples.metadata and "wall_time" not in samples.metadata

    obs = tmp_path / "obs.csv"
    assert dispatch(["decode", "--in", str(h1), "--samples", str(s), "--deterministic", "--out", str(obs)]) == 0
    lines = obs.read_text().splitlines()
    assert "t,qubit,sigma_z,fidelity" in lines and len(lines) == lines.index("t,qubit,sigma_z,fidelity") + 4
    assert dispatch(["decode", "--in", str(h1), "--samples", str(s), "--selector", "1", "--out", str(obs)]) == 0


def test_solve_timestamps_without_deterministic(h1, tmp_path):
    s = tmp_path / "s.csv"
    assert dispatch(["solve", "--in", str(h1), "--solver", "ballistic", "--samples", "10", "--out", str(s)]) == 0
    meta = SampleSet.from_csv(s).metadata
    assert "created" in meta and "wall_time" in meta


def test_solve_bruteforce(tmp_path):
    path = tmp_path / "h2.qubo"
    dispatch(["generate", "--system", "H2", "--timepoints", "2", "--out", str(path)])
    out = tmp_path / "bf.csv"
    assert dispatch(["solve", "--in", str(path), "--solver", "bruteforce", "--out", str(out)]) == 0
    assert SampleSet.from_csv(out).total >= 1
    big = tmp_path / "h6.qubo"
    dispatch(["generate", "--system", "H6", "--timepoints", "2", "--out", str(big)])
    assert dispatch(["solve", "--in", str(big), "--solver", "bruteforce", "--out", str(out)]) == 1


def test_oracle(tmp_path):
    out = tmp_path / "o.csv"
    assert dispatch(["oracle", "--system", "H4", "--timepoints", "3", "--psi0", "basis:1", "--deterministic",
                     "--out", str(out)]) == 0
    rows = [l for l in out.read_text().splitlines() if l and not l.startswith("#")][1:]
    assert len(rows) == 6


def _config(tmp_path, data):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return path


def test_bench_deterministic(tmp_path):
    cfg = _config(tmp_path, {"sa": {"sweeps": 200}})
    out_a, out_b, csv = tmp_path / "a.json", tmp_path / "b.json", tmp_path / "a.csv"
    args = ["bench", "--system", "H1", "--timepoints", "2..3", "--solver", "sa,bruteforce", "--samples", "100",
            "--runs", "2", "--config", str(cfg), "--deterministic"]
    assert dispatch(args + ["--out", str(out_a), "--csv", str(csv)]) == 0
    assert dispatch(args + ["--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()
    report = json.loads(out_a.read_text())
    assert len(report["records"]) == 4
    assert report["settings"]["sa"]["sweeps"] == 200 and report["settings"]["timing"] == "model"
    assert {f["system"] for f in report["fits"]} == {"H1", "pooled"}
    assert csv.read_text().count("\n") == 5


def test_verify_passes(capsys):
    assert dispatch(["verify", "--systems", "H1,H4"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] energy-identity" in out and "[INFO] printed-coefficients" in out and "0 failed" in out


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["generate", "--system", "H9", "--timepoints", "2", "--out", "x"],
    ["solve", "--in", "x.qubo", "--solver", "qpu", "--out", "y"],
    ["bench", "--system", "H1", "--timepoints", "4..2", "--out", "r.json"],
    ["bench", "--system", "H1", "--timepoints", "2", "--solver", "qpu", "--out", "r.json"],
])
def test_usage_errors(argv, capsys):
    assert dispatch(argv) == 2


def test_missing_and_malformed_files(tmp_path):
    assert dispatch(["solve", "--in", str(tmp_path / "nope.qubo"), "--out", str(tmp_path / "s.csv")]) == 2
    bad = tmp_path / "bad.qubo"
    bad.write_text("not an instance\n")
    assert dispatch(["solve", "--in", str(bad), "--out", str(tmp_path / "s.csv")]) == 1


def test_threads_env(h1, tmp_path, monkeypatch):
    monkeypatch.setenv("PARAQUBE_THREADS", "2")
    out = tmp_path / "s.csv"
    assert dispatch(["solve", "--in", str(h1), "--samples", "20", "--deterministic", "--out", str(out)]) == 0
    first = out.read_bytes()
    monkeypatch.setenv("PARAQUBE_THREADS", "1")
    assert dispatch(["solve", "--in", str(h1), "--samples", "20", "--deterministic", "--out", str(out)]) == 0
    assert out.read_bytes() == first


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "paraqube", "oracle", "--system", "H1", "--timepoints", "2",
                           "--out", str(tmp_path / "o.csv")], capture_output=True, text=True)
    assert proc.returncode == 0 and "wrote" in proc.stdout
