"""Harness tests: config round-trips, artifacts, exit codes, CLI subcommands."""

from __future__ import annotations

import json
import math
import os
import subprocess
import sys
import xml.dom.minidom

import numpy as np
import pytest

import sgdbounds
from sgdbounds.harness import (
    ConfigError,
    ExperimentConfig,
    cmd_bound,
    cmd_certify,
    cmd_run,
    cmd_sweep,
)

SRC_DIR = os.path.dirname(os.path.dirname(os.path.abspath(sgdbounds.__file__)))


@pytest.fixture(autouse=True)
def force_numpy_backend(monkeypatch):
    monkeypatch.setenv("SGDBOUNDS_NUMBA", "0")


@pytest.fixture(scope="module")
def ws(tmp_path_factory):
    return tmp_path_factory.mktemp("harness")


MINIMAL = """
problem:
  name: least_squares
  params: {{n: 20, d: 5, seed: 0}}
schedule:
  family: Constant
  horizon: 100
  eta1: 0.005
optimizer:
  method: SGD
  batch_size: 4
  master_seed: 11
  x1: 1.0
noise: {{mode: fixed, rho: 1.0, sigma2: 2.0}}
seeds: [0, 1]
outputs: {out}
checks: [no_divergence, bound]
"""


def minimal_cfg(out_dir) -> ExperimentConfig:
    return ExperimentConfig.from_text(MINIMAL.format(out=out_dir))


# ---------------------------------------------------------------------------
# configuration round-trips


def test_config_round_trip_identity(ws):
    cfg = minimal_cfg(ws / "rt")
    again = ExperimentConfig.from_text(cfg.to_text())
    assert again.to_dict() == cfg.to_dict()
    third = ExperimentConfig.from_text(again.to_text())
    assert third.to_dict() == again.to_dict()


def test_config_rejects_unknown_sections_and_values(ws):
    text = MINIMAL.format(out=ws / "bad")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(text.replace("name: least_squares", "name: bogus"))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(text.replace("seeds: [0, 1]", "seeds: [0]"))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(text + "\nunknownsec: {}\n")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(
            text.replace("checks: [no_divergence, bound]", "checks: [bogus]")
        )


def test_schedule_family_errors_surface_at_build_time(ws):
    cfg = ExperimentConfig.from_text(
        MINIMAL.format(out=ws / "fam").replace("family: Constant", "family: Bogus")
    )
    assert cmd_run(cfg) == 2


# ---------------------------------------------------------------------------
# the run subcommand: artifacts, reproducibility, exit codes


def test_minimal_run_artifacts_and_byte_identical_rerun(ws):
    out = ws / "run1"
    cfg = minimal_cfg(out)
    assert cmd_run(cfg) == 0

    files = sorted(os.listdir(out))
    assert files == ["bound.json", "ensemble.json", "plot.svg", "seed_0000.csv", "seed_0001.csv"]
    blobs1 = {f: (out / f).read_bytes() for f in files}

    assert cmd_run(cfg) == 0
    blobs2 = {f: (out / f).read_bytes() for f in files}
    assert blobs1 == blobs2

    ens = json.loads(blobs1["ensemble.json"])
    assert all(c["passed"] for c in ens["checks"])
    assert ens["config"]["optimizer"]["master_seed"] == 11
    assert len(ens["summary"]["k"]) == 101

    bound_doc = json.loads(blobs1["bound.json"])
    assert bound_doc["formula_id"] == "Thm1"

    svg = blobs1["plot.svg"].decode()
    dom = xml.dom.minidom.parseString(svg)
    assert dom.documentElement.tagName == "svg"
    assert "http://" not in svg.replace("http://www.w3.org/2000/svg", "")
    npts = max(
        len(p.getAttribute("points").split()) for p in dom.getElementsByTagName("polyline")
    )
    assert npts <= 1024

    csv_lines = blobs1["seed_0000.csv"].decode().strip().split("\n")
    assert csv_lines[0] == "k,stepsize,dist2,fgap,W"
    assert len(csv_lines) == 1 + 101


def test_step_above_cap_exits_2_with_diagnostic(ws):
    out = ws / "run_cap"
    cfg = minimal_cfg(out).with_leaf("schedule.eta1", 0.05)
    assert cmd_run(cfg) == 2
    diag = json.loads((out / "failures.json").read_text())
    assert diag["error"] == "cap_violation"


def test_successful_rerun_clears_stale_failure_record(ws):
    out = ws / "run_stale"
    bad = minimal_cfg(out).with_leaf("schedule.eta1", 0.05)
    assert cmd_run(bad) == 2
    assert (out / "failures.json").exists()
    assert cmd_run(minimal_cfg(out)) == 0
    assert not (out / "failures.json").exists()


def test_override_cap_allows_the_run(ws):
    cfg = minimal_cfg(ws / "run_ov").with_leaf("schedule.eta1", 0.05)
    cfg = cfg.with_updates(checks=["no_divergence"])
    opt = cfg.optimizer
    opt["override_cap"] = True
    cfg = cfg.with_updates(optimizer=opt)
    assert cmd_run(cfg) in (0, 1)


# ---------------------------------------------------------------------------
# the bound subcommand across formula regimes


def test_bound_noise_free_quadratic_equals_initial_distance(ws):
    out = ws / "bnd1"
    cfg = minimal_cfg(out).with_updates(noise={"mode": "fixed", "rho": 0.0, "sigma2": 0.0})
    assert cmd_bound(cfg) == 0
    doc = json.loads((out / "bound.json").read_text())
    assert doc["formula_id"] == "Thm1"
    assert doc["bound"] == doc["dist2_init"]


def test_bound_subquadratic_regime(ws):
    out = ws / "bnd5"
    text = """
problem:
  name: logistic_l1
  params: {lam: 1.0, n: 100, d: 20, seed: 0}
schedule: {family: Constant, horizon: 200, eta1: 0.1}
optimizer: {method: SGD, batch_size: 10, master_seed: 0, x1: 1.0}
noise: {mode: fixed, rho: 0.5, sigma2: 0.5}
seeds: {count: 2}
outputs: %s
""" % out
    cfg = ExperimentConfig.from_text(text)
    assert cmd_bound(cfg) == 0
    doc = json.loads((out / "bound.json").read_text())
    assert doc["formula_id"] == "Thm5"
    assert doc["bound"] > 0 and math.isfinite(doc["bound"])
    assert "companion_max_bound" in doc["details"]


@pytest.fixture(scope="module")
def eye5_csv(ws):
    path = ws / "eye5.csv"
    np.savetxt(path, np.hstack([np.eye(5), np.zeros((5, 1))]), delimiter=",")
    return path


def recursion_cfg(eye5_csv, out) -> ExperimentConfig:
    text = """
problem: {csv: %s, model: least_squares}
schedule: {family: Constant, horizon: 500, eta1: 0.1}
optimizer: {method: SGD, batch_size: 1, master_seed: 0, x1: 1.0, oracle: additive, sigma2: 0.01}
bound: {formula: appendixD}
seeds: {count: 2}
outputs: %s
""" % (eye5_csv, out)
    return ExperimentConfig.from_text(text)


def test_bound_constant_recursion_details(ws, eye5_csv):
    out = ws / "bndA"
    cfg = recursion_cfg(eye5_csv, out)
    assert cmd_bound(cfg) == 0
    doc = json.loads((out / "bound.json").read_text())
    assert "transient_term" in doc["details"]
    assert "stationary_term" in doc["details"]


def momentum_cfg(out) -> ExperimentConfig:
    text = """
problem: {name: heavy_tail_mle, params: {lam: 1.0, n: 40, d: 6, seed: 3}}
schedule: {family: Constant, horizon: 300, eta1: 0.004}
optimizer: {method: Momentum, beta: 0.9, batch_size: 4, master_seed: 7, x1: 2.0}
seeds: {count: 6}
outputs: %s
checks: [no_divergence, proxy, lyapunov]
""" % out
    return ExperimentConfig.from_text(text)


def test_bound_momentum_payload_and_run(ws):
    out = ws / "mom"
    cfg = momentum_cfg(out)
    assert cmd_bound(cfg) == 0
    doc = json.loads((out / "bound.json").read_text())
    assert doc["formula_id"] == "momentum_r2"
    assert doc["regime"] == "constant"
    assert "cap_branches" in doc

    assert cmd_run(cfg) == 0
    ens = json.loads((out / "ensemble.json").read_text())
    assert [c["name"] for c in ens["checks"]] == ["no_divergence", "proxy", "lyapunov"]


def test_bound_check_unsupported_for_momentum_exits_2(ws):
    cfg = momentum_cfg(ws / "momb").with_updates(checks=["bound"])
    assert cmd_run(cfg) == 2


# ---------------------------------------------------------------------------
# the certify subcommand


def test_certify_passes_and_reports_worst_point(ws):
    out = ws / "cert1"
    cfg = minimal_cfg(out)
    assert cmd_certify(cfg) == 0
    doc = json.loads((out / "cert.json").read_text())
    assert doc["passed"] is True
    assert isinstance(doc["reports"]["dissipativity"]["worst_point"], list)


def test_certify_inflated_theta1_fails(ws):
    cfg = minimal_cfg(ws / "cert2").with_updates(certify={"theta1": 100.0})
    assert cmd_certify(cfg) == 1


# ---------------------------------------------------------------------------
# the sweep subcommand


def test_sweep_bound_monotone_in_noise(ws, eye5_csv):
    out = ws / "sw1"
    cfg = recursion_cfg(eye5_csv, out).with_updates(
        checks=["no_divergence", "bound"], bound={"formula": "appendixD", "slack": 0.5}
    )
    assert cmd_sweep(cfg, "optimizer.sigma2", [0.0, 0.01, 0.1]) == 0
    lines = (out / "sweep.csv").read_text().strip().split("\n")
    assert lines[0] == "value,sup_mean_dist2,mean_sup_dist2,bound,audit_ok,pass"
    bounds = [float(line.split(",")[3]) for line in lines[1:]]
    assert bounds[0] <= bounds[1] <= bounds[2]
    assert (out / "sweep_000").is_dir() and (out / "sweep_002").is_dir()


def test_sweep_audit_column_flags_overridden_rows(ws):
    out = ws / "sw2"
    cfg = minimal_cfg(out).with_updates(checks=["no_divergence"])
    opt = cfg.optimizer
    opt["override_cap"] = True
    cfg = cfg.with_updates(optimizer=opt)
    cmd_sweep(cfg, "schedule.eta1", [2.0, 3.0])
    lines = (out / "sweep.csv").read_text().strip().split("\n")
    audits = [line.split(",")[4] for line in lines[1:]]
    assert audits == ["false", "false"]


def test_sweep_rejects_non_numeric_axis(ws):
    cfg = minimal_cfg(ws / "sw3")
    assert cmd_sweep(cfg, "problem.name", [1.0]) == 2


# ---------------------------------------------------------------------------
# data ingestion


def test_csv_dataset_run_and_missing_file_rejected(ws):
    data = ws / "data.csv"
    rows = np.hstack(
        [
            np.random.default_rng(0).standard_normal((30, 4)),
            np.random.default_rng(1).standard_normal((30, 1)),
        ]
    )
    np.savetxt(data, rows, delimiter=",")
    text = """
problem: {csv: %s, model: least_squares}
schedule: {family: Constant, horizon: 50, eta1: 0.005}
optimizer: {method: SGD, batch_size: 2, master_seed: 0, x1: 0.5}
seeds: [0, 1]
outputs: %s
checks: [no_divergence]
""" % (data, ws / "csvrun")
    assert cmd_run(ExperimentConfig.from_text(text)) == 0
    with pytest.raises(ConfigError):
        ExperimentConfig.from_text(text.replace("data.csv", "missing.csv"))


def test_generator_dataset_run(ws):
    text = """
problem:
  generator: {model: logistic_l1, n: 40, d: 6, noise: 0.1, seed: 5}
  params: {lam: 1.0}
schedule: {family: Constant, horizon: 50, eta1: 0.05}
optimizer: {method: SGD, batch_size: 4, master_seed: 0, x1: 0.5}
seeds: [0, 1]
outputs: %s
checks: [no_divergence]
""" % (ws / "genrun")
    assert cmd_run(ExperimentConfig.from_text(text)) == 0


# ---------------------------------------------------------------------------
# command-line entry point (subprocess)


def cli(*args):
    env = dict(os.environ, PYTHONPATH=SRC_DIR, SGDBOUNDS_NUMBA="0")
    return subprocess.run(
        [sys.executable, "-m", "sgdbounds.harness.cli", *args],
        capture_output=True,
        text=True,
        env=env,
    )


@pytest.fixture(scope="module")
def cli_config(ws):
    path = ws / "min.yaml"
    path.write_text(MINIMAL.format(out=ws / "cli1"))
    return path


def test_cli_run_prints_check_lines(ws, cli_config):
    r = cli("run", "--config", str(cli_config))
    assert r.returncode == 0, r.stderr
    assert "check no_divergence: pass" in r.stdout
    assert "check bound: pass" in r.stdout


def test_cli_out_and_seeds_overrides(ws, cli_config):
    out = ws / "cli2"
    r = cli("run", "--config", str(cli_config), "--out", str(out), "--seeds", "3")
    assert r.returncode == 0, r.stderr
    assert (out / "seed_0002.csv").exists()


def test_cli_sweep(ws, cli_config):
    out = ws / "cli3"
    r = cli(
        "sweep",
        "--config",
        str(cli_config),
        "--out",
        str(out),
        "--axis",
        "optimizer.batch_size",
        "--values",
        "2,8",
    )
    assert r.returncode == 0, r.stderr
    assert (out / "sweep.csv").exists()


def test_cli_bound_prints_formula(cli_config):
    r = cli("bound", "--config", str(cli_config))
    assert r.returncode == 0, r.stderr
    assert "formula: Thm1" in r.stdout


def test_cli_missing_config_exits_2(ws):
    r = cli("run", "--config", str(ws / "nope.yaml"))
    assert r.returncode == 2
