"""Weighted GP-UCB bandits for non-stationary reward functions."""

from ._core import (
    NumericalError,
    ProtocolError,
    QffMap,
    TuningOutput,
    beta_t,
    build_qff,
    check,
    default_config,
    empirical_mig,
    fit_posterior,
    hermite_roots,
    kernel_matrix,
    mig_eigendecay_bound,
    mig_universal_bound,
    mig_weight_bound,
    order_wise_period,
    qff_error_bound,
    run_experiment,
    se_kernel,
    simulate,
    tune_parameters,
)

__all__ = [
    "NumericalError",
    "ProtocolError",
    "QffMap",
    "TuningOutput",
    "beta_t",
    "build_qff",
    "check",
    "default_config",
    "empirical_mig",
    "fit_posterior",
    "hermite_roots",
    "kernel_matrix",
    "mig_eigendecay_bound",
    "mig_universal_bound",
    "mig_weight_bound",
    "order_wise_period",
    "qff_error_bound",
    "run_experiment",
    "se_kernel",
    "simulate",
    "tune_parameters",
]
