"""Opponent shaping with learned preferences in two-player differentiable games."""

import json

from . import _core
from ._core import (
    ConfigError,
    EvaluationError,
    NumericalError,
    derivatives,
    enumerate_nash,
    game_names,
    losses,
    rule_names,
    verify,
)

__all__ = [
    "ConfigError",
    "EvaluationError",
    "NumericalError",
    "benchmark",
    "derivatives",
    "enumerate_nash",
    "game_names",
    "losses",
    "rule_names",
    "run",
    "verify",
]


def run(game, rule="pbos", opponent=None, steps=None, seed=None, config=None):
    """Run self-play (or cross-play against `opponent`) from the checked-in defaults.

    `config` is a dict in the experiment JSON format overlaying the defaults.
    Returns a dict of per-step arrays plus final losses and preferences.
    """
    overrides = json.dumps(config) if config else ""
    return _core.run(game, rule, opponent, steps, seed, overrides)


def benchmark(n_games=None, steps=None, seed=None, threads=0):
    """Random bimatrix benchmark; returns the JSON summary as a dict."""
    return json.loads(_core.benchmark(n_games, steps, seed, threads))
