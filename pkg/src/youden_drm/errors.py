"""Exception hierarchy.

Every error raised by the library derives from :class:`YoudenDRMError` so
callers (notably the CLI) can separate data problems from estimation
problems without catching bare ``Exception``.
"""

from __future__ import annotations

__all__ = [
    "BelowLLOD",
    "ConfigError",
    "DataError",
    "DegenerateEstimate",
    "DegenerateSample",
    "DomainError",
    "EmptyGroup",
    "EstimationError",
    "EstimatorFailure",
    "InvalidLevel",
    "NonConvergence",
    "ParseError",
    "ScenarioInfeasible",
    "SingularHessian",
    "SingularMatrix",
    "VarianceUndefined",
    "YoudenDRMError",
]


class YoudenDRMError(Exception):
    """Base class for all library errors."""


class DataError(YoudenDRMError):
    """Input data is unusable as given."""


class EstimationError(YoudenDRMError):
    """A numerical procedure could not produce its result."""


class DomainError(DataError, ValueError):
    """A value lies outside the admissible domain of a basis function."""


class DegenerateSample(DataError, ValueError):
    """Too few (or too uniform) detected observations to fit the model."""


class BelowLLOD(DataError, ValueError):
    """A CDF estimator was evaluated below the lower limit of detection."""


class ParseError(DataError):
    """Malformed input file."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class EmptyGroup(DataError):
    """A group has no observations at all."""


class ConfigError(DataError):
    """Invalid simulation scenario configuration."""


class NonConvergence(EstimationError):
    """The dual likelihood maximizer did not reach the gradient tolerance."""


class SingularHessian(EstimationError):
    """Newton and gradient-ascent steps both stalled."""


class SingularMatrix(EstimationError):
    """A matrix that must be inverted is numerically singular."""


class VarianceUndefined(EstimationError):
    """The asymptotic variance formula does not apply at this estimate."""


class InvalidLevel(YoudenDRMError, ValueError):
    """Confidence level outside (0, 1)."""


class DegenerateEstimate(EstimationError):
    """Point estimate on the boundary of its range; logit interval undefined."""


class EstimatorFailure(EstimationError):
    """Too many bootstrap replicates failed."""


class ScenarioInfeasible(EstimationError):
    """Too many Monte Carlo replicates failed for the metrics to mean anything."""
