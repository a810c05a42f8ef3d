"""Zeroth-order variance-reduced optimization.

Thin wrapper over the compiled core: black-box problems evaluated only
through pointwise component values, epoch-anchored variance-reduced descent,
single-direction baselines, and exact oracle-query accounting.
"""

from ._core import (
    NO_BUDGET,
    Config,
    ObjectiveError,
    ParseError,
    Problem,
    QueryLedger,
    Trace,
    auto_config_nonsmooth,
    auto_config_smooth,
    from_callable,
    logistic,
    quadratic,
    rgf_default_eta,
    run_rgf,
    run_rsg,
    run_szvr_g,
    sigmoid_least_squares,
    universal_attack,
    write_trace_csv,
)

__all__ = [
    "NO_BUDGET",
    "Config",
    "ObjectiveError",
    "ParseError",
    "Problem",
    "QueryLedger",
    "Trace",
    "auto_config_nonsmooth",
    "auto_config_smooth",
    "from_callable",
    "logistic",
    "quadratic",
    "rgf_default_eta",
    "run_rgf",
    "run_rsg",
    "run_szvr_g",
    "sigmoid_least_squares",
    "universal_attack",
    "write_trace_csv",
]
