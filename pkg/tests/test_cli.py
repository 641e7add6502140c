import json
import os
import subprocess
import sys

import pytest

from pathineq.cli import main
from pathineq.config import ConfigError, Validator, load_config, validate_sample

TRANSFER_YAML = """\
name: paper-pipeline
pipeline:
  - op: weak_lsi_to_poincare
    beta: {family: c_log_inv_s, C: 1.0, r0: 0.5}
    params: {log2_delta: 0.5, log2_delta0: 4.5, epsilon: 0.125}
"""

SAMPLE_YAML = """\
name: tiny-bridge
sampler: hyperbolic_bridge
seed: 99
n_paths: 300
dim: 3
T: 1.0
grid:
  n_steps: 16
  tail: {lam: 0.5, floor: 1.0e-6}
x0: origin
y0: origin
out: bridge.pens
"""

ESTIMATE_YAML = """\
name: bridge-tail
ensemble: bridge.pens
estimators: [weight_tail, exp_square_moment]
exp_square_c: 0.25
out: tail_estimates.json
"""


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_transfer_command(tmp_path):
    cfg = write(tmp_path, "t.yaml", TRANSFER_YAML)
    out = str(tmp_path / "out")
    assert main(["transfer", "--config", cfg, "--out", out]) == 0
    report = json.loads((tmp_path / "out" / "transfer_report.json").read_text())
    assert report["schema_version"] == "pathineq.runreport.v1"
    stages = json.loads((tmp_path / "out" / "paper-pipeline.transfer.json").read_text())
    assert abs(stages["stages"][0]["tabulated"]["constant"] - 42.261) < 0.01


def test_sample_estimate_roundtrip(tmp_path):
    scfg = write(tmp_path, "s.yaml", SAMPLE_YAML)
    ecfg = write(tmp_path, "e.yaml", ESTIMATE_YAML)
    out = str(tmp_path / "out")
    assert main(["sample", "--config", scfg, "--out", out]) == 0
    assert main(["estimate", "--config", ecfg, "--out", out]) == 0
    est = json.loads((tmp_path / "out" / "tail_estimates.json").read_text())
    assert est["provenance"]["seed"] == 99
    assert "config_hash" in est["provenance"]
    assert est["results"]["weight_tail"]["values"][0] == 1.0


def test_sample_determinism_byte_identical(tmp_path):
    cfg = write(tmp_path, "s.yaml", SAMPLE_YAML)
    out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
    assert main(["sample", "--config", cfg, "--out", out1]) == 0
    assert main(["sample", "--config", cfg, "--out", out2]) == 0
    b1 = (tmp_path / "o1" / "bridge.pens").read_bytes()
    b2 = (tmp_path / "o2" / "bridge.pens").read_bytes()
    assert b1 == b2


def test_seed_override_changes_output(tmp_path):
    cfg = write(tmp_path, "s.yaml", SAMPLE_YAML)
    out1, out2 = str(tmp_path / "o1"), str(tmp_path / "o2")
    assert main(["sample", "--config", cfg, "--out", out1]) == 0
    assert main(["sample", "--config", cfg, "--out", out2, "--seed", "1234"]) == 0
    assert (tmp_path / "o1" / "bridge.pens").read_bytes() != (
        tmp_path / "o2" / "bridge.pens"
    ).read_bytes()


def test_estimate_missing_ensemble_is_config_error(tmp_path, capsys):
    ecfg = write(tmp_path, "e.yaml", ESTIMATE_YAML)
    out = str(tmp_path / "out")
    code = main(["estimate", "--config", ecfg, "--out", out])
    assert code == 2
    err = capsys.readouterr().err
    assert "bridge.pens" in err and "not found" in err


def test_config_error_reports_line_number(tmp_path, capsys):
    bad = SAMPLE_YAML.replace("sampler: hyperbolic_bridge", "sampler: teleporter")
    cfg = write(tmp_path, "bad.yaml", bad)
    code = main(["sample", "--config", cfg, "--out", str(tmp_path / "out")])
    assert code == 2
    err = capsys.readouterr().err
    assert "bad.yaml:2" in err and "sampler" in err


def test_config_validator_paths():
    data, linemap = (
        {"name": "x", "sampler": "wiener", "seed": 1, "n_paths": 0, "dim": 1, "T": 1.0,
         "grid": {"n_steps": 4}, "out": "w.pens"},
        {},
    )
    v = Validator(data, linemap, "inline")
    with pytest.raises(ConfigError, match="n_paths"):
        validate_sample(v)


def test_duplicate_scenario_names_rejected(tmp_path, capsys):
    c1 = write(tmp_path, "a.yaml", SAMPLE_YAML)
    c2 = write(tmp_path, "b.yaml", SAMPLE_YAML)
    code = main(["sample", "--config", c1, "--config", c2, "--out", str(tmp_path / "o")])
    assert code == 2
    assert "duplicate" in capsys.readouterr().err


def test_threads_flag_merges_deterministically(tmp_path):
    c1 = write(tmp_path, "a.yaml", SAMPLE_YAML)
    c2 = write(tmp_path, "b.yaml", SAMPLE_YAML.replace("tiny-bridge", "other").replace("bridge.pens", "other.pens"))
    out = str(tmp_path / "o")
    assert main(["sample", "--config", c1, "--config", c2, "--out", out, "--threads", "2"]) == 0
    report = json.loads((tmp_path / "o" / "sample_report.json").read_text())
    names = [s["name"] for s in report["scenarios"]]
    assert names == sorted(names)  # merged by scenario name


def test_verify_unknown_suite(capsys):
    assert main(["verify", "nonsense"]) == 2
    assert "unknown suite" in capsys.readouterr().err


def test_verify_fast_suite_and_exit_codes(tmp_path, monkeypatch):
    out = str(tmp_path / "out")
    assert main(["verify", "ou", "--out", out]) == 0
    report = json.loads((tmp_path / "out" / "verify_report.json").read_text())
    assert report["scenarios"][0]["criterion"] == "A7"
    assert report["scenarios"][0]["passed"] is True

    # force a failure: exit code must flip to 1
    import pathineq.acceptance as acc

    def failing(out_dir=None):
        from pathineq.acceptance import CriterionResult

        return CriterionResult(cid="A7", passed=False, seconds=0.0, details={})

    failing.cid = "A7"
    monkeypatch.setitem(acc.CRITERIA, "A7", failing)
    assert main(["verify", "ou", "--out", out]) == 1


def test_env_var_default_out_dir(tmp_path, monkeypatch):
    cfg = write(tmp_path, "t.yaml", TRANSFER_YAML)
    monkeypatch.setenv("PATHINEQ_OUT", str(tmp_path / "envout"))
    monkeypatch.chdir(tmp_path)
    assert main(["transfer", "--config", cfg]) == 0
    assert (tmp_path / "envout" / "transfer_report.json").exists()


def test_console_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "pathineq.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert "transfer" in proc.stdout and "verify" in proc.stdout


def _schema_of(obj):
    if isinstance(obj, dict):
        return {k: _schema_of(v) for k, v in sorted(obj.items())}
    if isinstance(obj, list):
        return [_schema_of(obj[0])] if obj else ["empty"]
    if isinstance(obj, bool):
        return "bool"
    if isinstance(obj, (int, float)):
        return "number"
    return type(obj).__name__


def test_runreport_schema_golden(tmp_path):
    # the RunReport JSON schema is versioned; this golden file pins it
    out = str(tmp_path / "out")
    assert main(["verify", "ou", "--out", out]) == 0
    report = json.loads((tmp_path / "out" / "verify_report.json").read_text())
    got = _schema_of(report)
    golden_path = os.path.join(os.path.dirname(__file__), "data", "verify_report.schema.json")
    with open(golden_path) as fh:
        golden = json.load(fh)
    assert got == golden
