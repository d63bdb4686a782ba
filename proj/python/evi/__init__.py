"""Implicit time stepping for constrained evolution problems with memory.

Thin wrapper over the compiled core. Every entry point takes the same keyword
configuration the command line tool reads from JSON; see the project README
for the list of keys and their defaults.
"""

import json

from . import _core

__version__ = _core.__version__

__all__ = [
    "solve_state",
    "optimize",
    "energy_report",
    "convergence",
    "prox",
    "run",
    "oracle_best_control",
    "grid_nodes",
    "h_inner",
    "v_norm",
]


def _config_json(config):
    cfg = dict(config)
    cfg.setdefault("command", "solve-state")
    return json.dumps(cfg)


def solve_state(**config):
    """Solve the evolution problem; returns times, states and step diagnostics."""
    return _core.solve_state(_config_json(config))


def optimize(**config):
    """Run projected descent on the control problem; returns the best control,
    its cost, the descent log and the optimal trajectory."""
    return _core.optimize(_config_json(config))


def energy_report(**config):
    """Solve once and report both sides of the discrete energy estimate."""
    return _core.energy_report(_config_json(config))


def convergence(**config):
    """Solve on halved step sizes against a fine reference; returns errors and rates."""
    return _core.convergence(_config_json(config))


def prox(z, tau, **config):
    """One implicit step from nodal values ``z`` with step size ``tau``."""
    return _core.prox(_config_json(config), list(z), float(tau))


def run(out_dir=None, seed=None, **config):
    """Execute a config end to end like the CLI, writing CSV artifacts.

    Returns ``(exit_code, summary_text)``.
    """
    return _core.run(_config_json(config), out_dir, seed)


def oracle_best_control(n_samples, seed=0, **config):
    """Brute-force reference search over admissible controls (small instances only)."""
    return _core.oracle_best_control(_config_json(config), int(n_samples), int(seed))


def grid_nodes(n_cells, length=1.0):
    return _core.grid_nodes(n_cells, length)


def h_inner(a, b, n_cells, length=1.0):
    return _core.h_inner(n_cells, length, list(a), list(b))


def v_norm(a, p, n_cells, length=1.0):
    return _core.v_norm(n_cells, length, list(a), float(p))
