"""Python bindings for the ifp income fluctuation library.

Functions that need a model take the run configuration either as a dict or as
a JSON string (same format as the command-line tool).
"""

import json as _json

import numpy as _np

from . import _ifp
from ._ifp import IfpError, Policy, growth_rate, rouwenhorst, spectral_radius, stationary_distribution

__all__ = [
    "IfpError",
    "Policy",
    "growth_rate",
    "growth_report",
    "hill",
    "kappa",
    "lambda_of_s",
    "rouwenhorst",
    "simulate_terminal",
    "solve",
    "spectral_radius",
    "stationary_distribution",
    "sweep",
]


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def growth_report(config):
    return _json.loads(_ifp.growth_report_json(_text(config)))


def solve(config):
    return _ifp.solve(_text(config))


def simulate_terminal(config, policy, n_paths=1000, horizon=500, burn_in=100, seed=0):
    return _np.asarray(_ifp.simulate_terminal(_text(config), policy, n_paths, horizon, burn_in, seed))


def lambda_of_s(config, alpha, s):
    return _ifp.lambda_of_s(_text(config), list(alpha), s)


def kappa(config, alpha, s_max=20.0):
    return _ifp.kappa(_text(config), list(alpha), s_max)


def hill(samples, k, n_boot=200, seed=0):
    return _ifp.hill(list(_np.asarray(samples, dtype=float)), k, n_boot, seed)


def sweep(config, x, y, quantity):
    return _ifp.sweep(_text(config), x, y, quantity)
