# SPDX-License-Identifier: Apache-2.0
import json
import math
import os
import subprocess

import numpy as np
import pytest

import iscsc


def test_conversions_and_bleu():
    assert iscsc.dbm_to_watts(30.0) == pytest.approx(1.0)
    assert iscsc.watts_to_dbm(0.1) == pytest.approx(20.0)
    w, p = [0.25] * 4, [0.9, 0.8, 0.7, 0.6]
    q = 0.3
    rho = iscsc.rho_lower_bound(q, w, p)
    assert iscsc.bleu_oracle(rho, w, p) == pytest.approx(q, abs=1e-12)
    assert iscsc.computational_power([1.0, 1.0], 0.01) == 0.0


def test_steering_and_crb():
    a = iscsc.steering_vector(0.3, 6)
    assert a.dtype == np.complex128
    expected = np.exp(-1j * math.pi * np.arange(6) * math.sin(0.3))
    np.testing.assert_allclose(a, expected, atol=1e-14)
    rx = np.eye(6, dtype=complex) * 0.01
    c1 = iscsc.crb_theta(0.3, 0.1 + 0j, rx, 1, 1e-6)
    c4 = iscsc.crb_theta(0.3, 0.1 + 0j, 4 * rx, 1, 1e-6)
    assert c4 == pytest.approx(c1 / 4)


def test_config_errors():
    cfg = iscsc.fast_scenario()
    cfg["kappa"] = 2.0
    with pytest.raises(iscsc.ConfigError):
        iscsc.normalize_scenario(cfg)
    assert iscsc.normalize_scenario(iscsc.fast_scenario()) == iscsc.fast_scenario()


def test_solve_and_verify():
    cfg = iscsc.fast_scenario()
    report = iscsc.solve(cfg, mode="rho1", seed=2)
    assert report["status"] == "optimal"
    assert report["power"]["comp_w"] == 0.0
    assert all(r == 1.0 for r in report["solution"]["rho"])
    assert iscsc.verify_report(report)["ok"]
    report["totals"]["sum_ssr"] *= 1.01
    assert not iscsc.verify_report(report)["ok"]


def test_validate_without_solves():
    checks = iscsc.validate(seed=2, include_solve=False)
    assert checks and all(c["passed"] for c in checks)


def test_mse_crb():
    rows = iscsc.mse_crb([20.0], trials=200)
    assert rows[0]["mse"] >= 0.8 * rows[0]["crb"]


def _cli():
    path = os.environ.get("ISCSC_CLI")
    if not path:
        pytest.skip("ISCSC_CLI not set")
    return path


def test_cli_exit_codes(tmp_path):
    cli = _cli()
    assert subprocess.run([cli, "mse-crb", "--trials", "10", "--out", str(tmp_path)]).returncode == 4
    assert subprocess.run([cli, "solve", "--config", str(tmp_path / "missing.json"),
                           "--out", str(tmp_path)]).returncode == 4
    assert subprocess.run([cli, "verify", "--report", str(tmp_path / "missing.json")]).returncode == 5
    assert subprocess.run([cli, "no-such-command"]).returncode == 4


def test_cli_solve_roundtrip(tmp_path):
    cli = _cli()
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(iscsc.fast_scenario()))
    out = tmp_path / "run"
    r = subprocess.run([cli, "solve", "--config", str(cfg_path), "--mode", "full", "--seed", "4",
                        "--out", str(out)])
    assert r.returncode == 0
    report = json.loads((out / "report.json").read_text())
    # the run seed is recorded in the config it hashes
    expected_cfg = dict(iscsc.fast_scenario(), seed=4)
    assert report["config"] == expected_cfg
    assert report["digest"] == iscsc.scenario_digest(expected_cfg, 4)
    assert subprocess.run([cli, "verify", "--report", str(out / "report.json")]).returncode == 0
