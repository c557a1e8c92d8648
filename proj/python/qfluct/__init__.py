"""Integral fluctuation theorem checks for Lindblad dynamics: tilted operator and quantum jumps."""

import json as _json

from ._qfluct import (
    ConfigError,
    QfluctError,
    TwoSpinParams,
    coherent_thermal_state,
    bosonic_rate,
    config_hash,
    evolve_density,
    evolve_tilted,
    ft_functional,
    generating_function,
    jarzynski_lhs,
    panel_config,
    psi_bar_deviation,
    tilted_generator,
    two_spin_hamiltonian,
    version,
)
from ._qfluct import load_config as _load_config
from ._qfluct import run_experiment as _run_experiment

__version__ = version()


def load_config(config):
    """Validate a config given as a dict or JSON text; returns the canonical dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_load_config(text))


def run_experiment(config):
    """Run the engines selected in `config` (dict or JSON text); returns a dict of arrays."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _run_experiment(text)


__all__ = [
    "ConfigError",
    "QfluctError",
    "TwoSpinParams",
    "coherent_thermal_state",
    "bosonic_rate",
    "config_hash",
    "evolve_density",
    "evolve_tilted",
    "ft_functional",
    "generating_function",
    "jarzynski_lhs",
    "load_config",
    "panel_config",
    "psi_bar_deviation",
    "run_experiment",
    "tilted_generator",
    "two_spin_hamiltonian",
    "version",
]
