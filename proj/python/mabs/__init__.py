"""Bandit-driven datapoint sampling for stochastic optimizers.

The heavy lifting lives in the compiled extension; this package re-exports
its surface. See the README for the experiment configuration schema shared
with the command line tool.
"""

from ._core import (
    ConfigError,
    Dataset,
    IoError,
    ParseError,
    effective_variance,
    full_cost,
    full_gradient,
    load_libsvm,
    mabs_delta,
    mabs_min_horizon,
    optimal_static_p,
    optimal_stepwise_p,
    prox,
    pseudo_variance,
    run_experiment,
    scale_for_tau,
    smoothness,
    stability_sweep,
    synthetic,
    tau_sweep,
    verify,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "IoError",
    "ParseError",
    "effective_variance",
    "full_cost",
    "full_gradient",
    "load_libsvm",
    "mabs_delta",
    "mabs_min_horizon",
    "optimal_static_p",
    "optimal_stepwise_p",
    "prox",
    "pseudo_variance",
    "run_experiment",
    "scale_for_tau",
    "smoothness",
    "stability_sweep",
    "synthetic",
    "tau_sweep",
    "verify",
]
