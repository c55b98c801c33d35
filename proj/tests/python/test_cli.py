import json
import os
import subprocess

import pytest

CLI = os.environ.get("FINSLER_CLI", "finsler")


def run(*args, env=None, cwd=None):
    full_env = dict(os.environ)
    if env:
        full_env.update(env)
    return subprocess.run([CLI, *args], capture_output=True, text=True, env=full_env, cwd=cwd)


def read_jsonl(path):
    with open(path) as f:
        return [json.loads(line) for line in f if line.strip()]


def test_models_and_schema():
    out = run("models")
    assert out.returncode == 0
    assert "bao-shen" in out.stdout
    schema = run("schema")
    assert schema.returncode == 0
    assert "eigen" in json.loads(schema.stdout)["suite"]["enum"]


def test_verify_writes_report_to_env_dir(tmp_path):
    out = run("verify", "--model", "round", "--param", "n=2", "--suite", "eigen", "--seed", "7",
              env={"FINSLER_REPORT_DIR": str(tmp_path)})
    assert out.returncode == 0, out.stderr
    report = tmp_path / "round_eigen_7.jsonl"
    assert report.exists()
    rows = read_jsonl(report)
    assert rows[-1]["summary"]["failed"] == 0
    assert any(r.get("check_id") == "rayleigh_radial" for r in rows)
    assert "PASS" in out.stdout


def test_precedence_flags_over_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('// comment\n{"model": "round", "n": 2, "suite": "diameter", "seed": 2,'
                   ' "samples": {"diameter_pairs": 2, "segment_points": 3}}')
    out = run("verify", "--config", str(cfg), "--suite", "s_curvature", "--samples", "vectors=4",
              "--report", str(tmp_path / "r.jsonl"))
    assert out.returncode == 0, out.stderr
    summary = read_jsonl(tmp_path / "r.jsonl")[-1]["summary"]
    assert summary["suite"] == "s_curvature"
    assert summary["seed"] == 2


def test_reports_identical_except_timestamp(tmp_path):
    for name in ("a", "b"):
        assert run("verify", "--model", "randers-nav", "--suite", "curvature", "--samples", "flags=5",
                   "--report", str(tmp_path / f"{name}.jsonl")).returncode == 0
    a, b = read_jsonl(tmp_path / "a.jsonl"), read_jsonl(tmp_path / "b.jsonl")
    assert a[:-1] == b[:-1]
    assert a[-1]["summary"] == b[-1]["summary"]


def test_failing_check_exits_one(tmp_path):
    out = run("verify", "--model", "round", "--suite", "curvature", "--tol", "tensor=1e-300",
              "--report", str(tmp_path / "r.jsonl"))
    assert out.returncode == 1
    assert "FAIL" in out.stdout


@pytest.mark.parametrize("args", [
    ("verify", "--suite", "bogus"),
    ("verify", "--model", "nonexistent"),
    ("verify", "--model", "round", "--param", "n=9"),
    ("verify", "--tol", "laplacian=-1"),
    ("verify", "--samples", "flags=0"),
    ("plot", "histogram"),
    ("frobnicate",),
])
def test_usage_errors_exit_two(args, tmp_path):
    out = run(*args, cwd=tmp_path)
    assert out.returncode == 2


def test_malformed_file_dumps_schema(tmp_path):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"model": "round", "suite": ')
    out = run("verify", "--config", str(cfg))
    assert out.returncode == 2
    assert '"tolerances"' in out.stderr


def test_plot_to_file(tmp_path):
    path = tmp_path / "lap.csv"
    out = run("plot", "laplacian_profile", "--model", "round", "--samples", "radii=5", "--out", str(path))
    assert out.returncode == 0, out.stderr
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "r,laplacian,model"
    assert len(lines) == 6
