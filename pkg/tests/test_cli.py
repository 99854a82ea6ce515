"""Command-line surface: dispatch, exit codes, file outputs."""

import json
from pathlib import Path

import pytest

from regenopt import load_instance
from regenopt.bench import preset, save_config
from regenopt.cli import cli

FIVE_NODE = Path(__file__).parent / "data" / "five_node.json"


def test_generate_writes_loadable_instance(tmp_path):
    out = tmp_path / "inst.json"
    rc = cli(["generate", "--n", "9", "--seed", "4", "--out", str(out)])
    assert rc == 0
    inst = load_instance(out.read_bytes())
    assert inst.n == 9
    assert inst.seed == 4


def test_solve_writes_report(tmp_path):
    out = tmp_path / "report.json"
    rc = cli(["solve", "--method", "dwc", "--instance", str(FIVE_NODE), "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert report["method"] == "DWC"
    assert report["placement"]
    assert report["iterations"] == 1


@pytest.mark.parametrize("method", ["rsb", "rdb", "ccg", "bdc", "iro", "hsl"])
def test_solve_supports_every_method(tmp_path, method):
    out = tmp_path / "report.json"
    rc = cli(["solve", "--method", method, "--instance", str(FIVE_NODE), "--out", str(out)])
    assert rc == 0
    assert json.loads(out.read_text())["method"] == method.upper()


def test_usage_error_exit_code(capsys):
    assert cli(["solve", "--method", "nope", "--instance", "x"]) == 2
    assert cli(["frobnicate"]) == 2


def test_invalid_input_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert cli(["solve", "--method", "dwc", "--instance", str(bad)]) == 1
    assert cli(["solve", "--method", "dwc", "--instance", str(tmp_path / "nope.json")]) == 1


def test_experiment_and_profile_outputs(tmp_path):
    cfg = preset("exp1", scale=0.1, master_seed=3)
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_bytes(save_config(cfg))
    out_dir = tmp_path / "run"
    rc = cli(["experiment", "--config", str(cfg_path), "--out-dir", str(out_dir)])
    assert rc == 0
    results = (out_dir / "results.csv").read_text().splitlines()
    assert results[0].startswith("experiment,n,gamma_e,gamma_v,seed,method,")
    assert len(results) > 1
    assert (out_dir / "profile.csv").read_text().startswith("solver,tau,k")
    meta = json.loads((out_dir / "meta.json").read_text())
    assert meta["scale"] == 0.1

    profile_out = tmp_path / "p.csv"
    rc = cli(["profile", "--in", str(out_dir / "results.csv"), "--out", str(profile_out)])
    assert rc == 0
    assert profile_out.read_text().startswith("solver,tau,k")


def test_experiment_preset_flag(tmp_path):
    out_dir = tmp_path / "run"
    rc = cli([
        "experiment", "--preset", "exp2", "--scale", "0.05", "--seed", "9",
        "--out-dir", str(out_dir),
    ])
    assert rc == 0
    assert (out_dir / "results.csv").exists()


def test_hsl_trace_rows(tmp_path):
    trace = tmp_path / "trace.jsonl"
    report = tmp_path / "report.json"
    rc = cli([
        "hsl", "--instance", str(FIVE_NODE), "--eta-d", "0.15",
        "--trace-out", str(trace), "--out", str(report),
    ])
    assert rc == 0
    rows = [json.loads(line) for line in trace.read_text().splitlines()]
    assert rows
    assert rows[0]["k"] == 1
    assert "loss" in rows[0] and "placement" in rows[0] and "changed" in rows[0]
    assert json.loads(report.read_text())["method"] == "HSL"
