"""Kahan discretization of quadratic vector fields.

Thin wrappers over the compiled ``_core`` module that exchange plain Python
dicts and numpy arrays.
"""

import json

import numpy as np

from ._core import (
    ConfigError,
    DenominatorZero,
    SingularStep,
    System,
    kinds,
)
from . import _core

__all__ = [
    "ConfigError",
    "DenominatorZero",
    "SingularStep",
    "System",
    "canonical_config",
    "hk_scan",
    "kinds",
    "make_system",
    "orbit",
    "simulate_csv",
    "verify",
]


def make_system(kind, **params):
    """Catalog system; without params the catalog defaults are used."""
    return System(kind, json.dumps(params) if params else "")


def orbit(system, x0, eps, steps):
    """Array of shape (k + 1, dim) and a flag telling whether a pole ended it."""
    states, stopped = system.orbit(np.asarray(x0, dtype=float), eps, steps)
    return states, stopped


def verify(system, eps=0.05, trials=200, steps=1000, seed=42):
    """Property reports of the full suite as a list of dicts."""
    return json.loads(system.verify(eps, trials, steps, seed))


def hk_scan(system, x0, eps, max_order=0, window=8):
    return json.loads(system.hk_scan(np.asarray(x0, dtype=float), eps, max_order, window))


def canonical_config(config):
    text = config if isinstance(config, str) else json.dumps(config)
    return json.loads(_core.canonical_config(text))


def simulate_csv(config):
    text = config if isinstance(config, str) else json.dumps(config)
    return _core.simulate_csv(text)
