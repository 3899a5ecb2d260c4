"""Networked LinUCB with anomaly detection."""

from ._nela import (
    ConvergenceError,
    InfluenceMatrix,
    InputError,
    LoadError,
    NelaConfig,
    NelaPolicy,
    RegressionHistory,
    build_similarity_graph,
    build_uniform_graph,
    complete_edges,
    lambda_schedule,
    lasso_solve,
    mixed_feature,
    precision_recall,
    restricted_least_squares,
    star_edges,
    two_stage_threshold,
)
from . import _nela

__all__ = [
    "ConvergenceError",
    "InfluenceMatrix",
    "InputError",
    "LoadError",
    "NelaConfig",
    "NelaPolicy",
    "RegressionHistory",
    "build_similarity_graph",
    "build_uniform_graph",
    "complete_edges",
    "config",
    "lambda_schedule",
    "lasso_solve",
    "mixed_feature",
    "precision_recall",
    "restricted_least_squares",
    "run",
    "star_edges",
    "two_stage_threshold",
]


def _settings(scenario, kwargs):
    out = {"scenario": scenario}
    for key, value in kwargs.items():
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        out[key.replace("_", "-")] = str(value)
    return out


def run(scenario="synthetic", **settings):
    """Runs an experiment. Keyword names follow the CLI flags with `_` for `-`.

    Returns (summary, aggregates) where aggregates maps each policy to numpy
    columns of the per-round mean curves.
    """
    return _nela.run_experiment(_settings(scenario, settings))


def config(scenario="synthetic", **settings):
    """The resolved experiment configuration as a dict."""
    return _nela.config_json(_settings(scenario, settings))
