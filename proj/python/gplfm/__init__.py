"""Gaussian-process latent force models for joint input-state estimation."""

from ._gplfm import (
    ConditioningError,
    ConfigError,
    DegeneracyError,
    DimensionError,
    Error,
    OptimizationError,
    StabilityError,
    UnsupportedKernelError,
    ValidationError,
    __version__,
    discrete_process_noise,
    drift_metric,
    gp_regress_batch,
    kalman_filter,
    kernel_from_ssm,
    kernel_to_ssm,
    matern_eval,
    matrix_exponential,
    modal_analysis,
    run_experiment,
    shear_building,
    solve_lyapunov,
    state_space,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
