import filecmp
import json
import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest
import yaml

from partialvar.cli import LagPolicy, bundled_config_path, main
from partialvar.errors import ConfigError


def small_study(tmp_path, seed=7, years=300):
    assert main(["simulate", "--out", str(tmp_path / "study"), "--seed", str(seed), "--years", str(years)]) == 0
    return tmp_path / "study"


def tree(path):
    return sorted(p.relative_to(path).as_posix() for p in Path(path).rglob("*") if p.is_file())


def same_tree(a, b):
    names = tree(a)
    if names != tree(b):
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
    return not mismatch and not errors


def test_lag_policy_parsing():
    assert LagPolicy.parse("fixed:2") == LagPolicy(2)
    assert LagPolicy.parse("bic:3") == LagPolicy(3, "BIC")
    assert str(LagPolicy.parse("HQ:4")) == "hq:4"
    for bad in ("fixed", "bic:x", "gic:2", "fixed:0"):
        with pytest.raises(ConfigError):
            LagPolicy.parse(bad)


def test_bundled_study_runs(tmp_path):
    out = tmp_path / "out"
    assert main(["all", "--out", str(out)]) == 0
    files = tree(out)
    config = yaml.safe_load(bundled_config_path().read_text())
    for cid in config["countries"]:
        for artifact in ("estimate.csv", "identification.json", "irf.csv", "fevd.csv", "metrics.json"):
            assert f"{cid}_{artifact}" in files
    summary = (out / "summary.csv").read_text().splitlines()
    assert len(summary) == 1 + 12
    assert "failures.json" not in files
    assert "Rankings" in (out / "summary.txt").read_text()


def test_seeded_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        study = small_study(out, seed=7)
        assert main(["all", "--config", str(study / "config.yaml"), "--out", str(out / "res"), "--seed", "7"]) == 0
    assert same_tree(a, b)


def test_jobs_do_not_change_output(tmp_path):
    study = small_study(tmp_path)
    cfg = str(study / "config.yaml")
    assert main(["all", "--config", cfg, "--out", str(tmp_path / "serial")]) == 0
    assert main(["all", "--config", cfg, "--out", str(tmp_path / "parallel"), "--jobs", "4"]) == 0
    assert same_tree(tmp_path / "serial", tmp_path / "parallel")


def test_missing_column_isolated(tmp_path, capsys):
    study = small_study(tmp_path)
    csv_path = study / "FR.csv"
    lines = csv_path.read_text().splitlines()
    csv_path.write_text("\n".join(",".join(l.split(",")[:3]) for l in lines) + "\n")
    out = tmp_path / "res"
    assert main(["all", "--config", str(study / "config.yaml"), "--out", str(out)]) == 1
    failures = json.loads((out / "failures.json").read_text())
    assert list(failures) == ["FR"]
    assert failures["FR"]["error"] == "MissingColumn"
    assert "FR_metrics.json" not in tree(out)
    assert len((out / "summary.csv").read_text().splitlines()) == 1 + 11
    assert "FR: MissingColumn" in capsys.readouterr().err


def test_config_error_writes_nothing(tmp_path):
    study = small_study(tmp_path)
    doc = yaml.safe_load((study / "config.yaml").read_text())
    doc["countries"]["XX"] = {"file": "nowhere.csv"}
    bad = study / "bad.yaml"
    bad.write_text(yaml.safe_dump(doc))
    out = tmp_path / "res"
    assert main(["all", "--config", str(bad), "--out", str(out)]) == 2
    assert not out.exists()
    assert main(["all", "--config", str(study / "config.yaml"), "--out", str(out), "--horizon", "10"]) == 2
    assert main(["all", "--config", str(study / "config.yaml"), "--out", str(out), "--ordering", "ya,ya,polm"]) == 2
    assert main(["all", "--config", str(study / "config.yaml"), "--out", str(out), "--lag", "aic"]) == 2
    assert not out.exists()
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".res.")]


def test_subcommands_and_formats(tmp_path, capsys):
    study = small_study(tmp_path)
    cfg = str(study / "config.yaml")
    assert main(["estimate", "--config", cfg, "--out", str(tmp_path / "e"), "--format", "json"]) == 0
    assert "BE_estimate.json" in tree(tmp_path / "e")
    assert not any("irf" in f for f in tree(tmp_path / "e"))
    assert main(["irf", "--config", cfg, "--out", str(tmp_path / "i"), "--horizon", "25"]) == 0
    irf_rows = (tmp_path / "i" / "BE_irf.csv").read_text().splitlines()
    assert len(irf_rows) == 1 + 9 * 26
    assert main(["fevd", "--config", cfg, "--out", str(tmp_path / "f"), "--format", "json"]) == 0
    fevd_doc = json.loads((tmp_path / "f" / "BE_fevd.json").read_text())
    assert fevd_doc["horizons"] == list(range(1, 21))
    capsys.readouterr()
    assert main(["rank", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
    printed = capsys.readouterr().out
    assert printed.startswith("multiplier: ")
    assert "ranking.csv" in tree(tmp_path / "r")


def test_lag_selection_and_ordering_flags(tmp_path):
    study = small_study(tmp_path)
    out = tmp_path / "res"
    args = ["all", "--config", str(study / "config.yaml"), "--out", str(out),
            "--lag", "bic:3", "--ordering", "polm,price,ya", "--format", "json"]
    assert main(args) == 0
    doc = json.loads((out / "summary.json").read_text())
    assert all(1 <= c["lag_order"] <= 3 for c in doc["countries"])
    run = json.loads((out / "run.json").read_text())
    assert run["ordering"] == ["polm", "price", "ya"]
    assert run["lag"] == "bic:3"


def test_env_output_override(tmp_path, monkeypatch):
    study = small_study(tmp_path)
    monkeypatch.setenv("PARTIALVAR_OUT", str(tmp_path / "from_env"))
    assert main(["estimate", "--config", str(study / "config.yaml")]) == 0
    assert (tmp_path / "from_env" / "BE_estimate.csv").exists()
    assert main(["estimate", "--config", str(study / "config.yaml"), "--out", str(tmp_path / "flag")]) == 0
    assert (tmp_path / "flag" / "BE_estimate.csv").exists()


def test_console_entry_point(tmp_path):
    exe = shutil.which("partialvar")
    cmd = [exe] if exe else [sys.executable, "-m", "partialvar.cli"]
    env = dict(os.environ, PARTIALVAR_OUT=str(tmp_path / "o"))
    proc = subprocess.run(cmd + ["simulate", "--years", "60"], capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "o" / "config.yaml").exists()
