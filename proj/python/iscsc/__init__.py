# SPDX-License-Identifier: Apache-2.0
"""Robust semantic ISAC beamforming: scenario handling, sensing bounds and the alternating SDP solver."""

import json as _json

from ._iscsc import (
    ConfigError,
    InfeasibleError,
    NumericalError,
    bleu_oracle,
    computational_power,
    crb_theta,
    dbm_to_watts,
    mse_crb,
    rho_lower_bound,
    steering_vector,
    validate,
    watts_to_dbm,
)
from . import _iscsc

__all__ = [
    "ConfigError",
    "InfeasibleError",
    "NumericalError",
    "bleu_oracle",
    "computational_power",
    "crb_theta",
    "dbm_to_watts",
    "fast_scenario",
    "mse_crb",
    "normalize_scenario",
    "reference_scenario",
    "rho_lower_bound",
    "scenario_digest",
    "solve",
    "steering_vector",
    "validate",
    "verify_report",
    "watts_to_dbm",
]


def _dump(config):
    return "" if config is None else _json.dumps(config)


def reference_scenario():
    return _json.loads(_iscsc.reference_scenario_json())


def fast_scenario():
    """Eight antennas, two targets: solves in about a second."""
    return _json.loads(_iscsc.fast_scenario_json())


def normalize_scenario(config):
    """Validates a config dict and fills in defaults. Raises ConfigError."""
    return _json.loads(_iscsc.normalize_scenario_json(_dump(config)))


def scenario_digest(config, seed):
    return _iscsc.scenario_digest(_dump(config), seed)


def solve(config=None, mode="full", seed=0, solver_tol=None):
    """Runs the alternating design and returns the report as a dict.

    ``config`` defaults to the reference scenario. ``mode`` is one of
    ``full``, ``rho1`` or ``conventional``.
    """
    return _json.loads(_iscsc.solve_json(_dump(config), mode, seed, solver_tol))


def verify_report(report, tol=1e-8):
    return _iscsc.verify_report_json(_json.dumps(report), tol)
