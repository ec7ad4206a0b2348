"""Goodness-of-fit tests for the Pareto type-I distribution based on Stein
fixed-point characterisations, for complete and right-censored data."""

from .distributions import (
    AlternativeSpec,
    CensoringPlan,
    Family,
    ParetoShape,
    calibrate_censoring,
    pareto_cdf,
    sample_alternative,
    sample_pareto,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DomainError,
    EstimationError,
    ParetoGofError,
    ResamplingError,
)
from .estimation import CensoredSample, censoring_km, fit_alpha, ipcw_weights, moment_alpha
from .stein_censored import delta_I_censored, delta_M_censored
from .stein_complete import delta_I, delta_I_fast, delta_M, delta_M_fast

__version__ = "0.1.0"
