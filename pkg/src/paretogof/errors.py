"""Exception hierarchy shared across the package."""


class ParetoGofError(Exception):
    """Base class for all package errors."""


class DomainError(ParetoGofError, ValueError):
    """An argument lies outside the domain of an operation."""


class EstimationError(ParetoGofError, ValueError):
    """A moment estimator is undefined for the given sample."""


class CalibrationError(ParetoGofError, RuntimeError):
    """Censoring calibration could not bracket the requested fraction."""


class ResamplingError(ParetoGofError, RuntimeError):
    """Too many resampling replicates failed to produce a statistic."""


class ConfigError(ParetoGofError, ValueError):
    """An experiment configuration is invalid.

    ``problems`` lists every violation found, not just the first.
    """

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))
