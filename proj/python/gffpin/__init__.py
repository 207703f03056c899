"""Disordered pinning of the lattice Gaussian free field."""

import json as _json

from ._core import (
    BudgetExhausted,
    ConfigError,
    DomainError,
    __version__,
    alpha_root,
    contact_constant,
    critical_curve,
    cumulant,
    f_mass,
    fractional_upper_bound,
    green_box,
    green_infinite,
    log_W_finite,
    partition_exact,
    partition_mc,
    quenched_free_energy,
    sample_field,
    u_mass,
)
from ._core import run_experiment as _run_experiment


def run_experiment(kind, config=None, out="out", seed=1, threads=1, budget_minutes=0.0):
    """Run one experiment; `config` is a dict in the CLI's JSON schema. Returns (exit_code, log)."""
    return _run_experiment(kind, _json.dumps(config or {}), out, seed, threads, budget_minutes)


__all__ = [
    "BudgetExhausted",
    "ConfigError",
    "DomainError",
    "__version__",
    "alpha_root",
    "contact_constant",
    "critical_curve",
    "cumulant",
    "f_mass",
    "fractional_upper_bound",
    "green_box",
    "green_infinite",
    "log_W_finite",
    "partition_exact",
    "partition_mc",
    "quenched_free_energy",
    "run_experiment",
    "sample_field",
    "u_mass",
]
