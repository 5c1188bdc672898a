"""Wald interval for the cutoff and logit-scale interval for the Youden index."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DegenerateEstimate, InvalidLevel

__all__ = [
    "ConfidenceInterval",
    "WALD_C",
    "LOGIT_J",
    "PERCENTILE_BOOTSTRAP",
    "ci_cutoff",
    "ci_youden",
    "expit",
    "logit",
    "norm_ppf",
    "z_value",
]

WALD_C = "wald_c"
LOGIT_J = "logit_j"
PERCENTILE_BOOTSTRAP = "percentile_bootstrap"
_KINDS = (WALD_C, LOGIT_J, PERCENTILE_BOOTSTRAP)


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown interval kind {self.kind!r}")
        if not self.lower <= self.upper:
            raise ValueError(f"interval lower {self.lower} exceeds upper {self.upper}")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def as_tuple(self) -> tuple[float, float]:
        return (self.lower, self.upper)


# Acklam's rational approximation to the normal quantile (rel. error ~1e-9),
# followed by one Halley step on erfc to reach full double precision.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def norm_ppf(p: float) -> float:
    """Standard normal quantile for ``0 < p < 1``."""
    if not 0.0 < p < 1.0:
        raise InvalidLevel(f"probability must lie in (0, 1), got {p!r}")
    if p > 0.5:
        # 1 - p is exact here and keeps the refinement away from cancellation
        return -norm_ppf(1.0 - p)
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    else:
        q = p - 0.5
        r = q * q
        x = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        )
    e = 0.5 * math.erfc(-x / math.sqrt(2.0)) - p
    u = e * math.sqrt(2.0 * math.pi) * math.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def z_value(level: float) -> float:
    """Two-sided critical value ``z_{1 - a/2}`` for confidence ``level = 1 - a``."""
    if not (isinstance(level, (int, float)) and 0.0 < level < 1.0):
        raise InvalidLevel(f"confidence level must lie in (0, 1), got {level!r}")
    return norm_ppf(0.5 + 0.5 * level)


def logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def expit(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _check(sigma2: float, n: int) -> None:
    if not sigma2 >= 0 or not math.isfinite(sigma2):
        raise ValueError(f"variance must be finite and nonnegative, got {sigma2!r}")
    if n < 2:
        raise ValueError(f"total sample size must be at least 2, got {n}")


def ci_cutoff(c_hat: float, sigma2_c: float, n: int, level: float = 0.95) -> ConfidenceInterval:
    """``c_hat -/+ z * sigma_c / sqrt(n)``."""
    z = z_value(level)
    _check(sigma2_c, n)
    half = z * math.sqrt(sigma2_c) / math.sqrt(n)
    return ConfidenceInterval(c_hat - half, c_hat + half, level, WALD_C)


def ci_youden(j_hat: float, sigma2_j: float, n: int, level: float = 0.95) -> ConfidenceInterval:
    """Wald interval on the logit scale mapped back through expit.

    The delta-method standard error of ``logit(J_hat)`` is
    ``sigma_J / (sqrt(n) J_hat (1 - J_hat))``.
    """
    z = z_value(level)
    _check(sigma2_j, n)
    if not 0.0 < j_hat < 1.0:
        raise DegenerateEstimate(
            f"Youden index estimate {j_hat!r} is outside (0, 1); the logit interval is undefined"
        )
    centre = logit(j_hat)
    half = z * math.sqrt(sigma2_j) / (math.sqrt(n) * j_hat * (1.0 - j_hat))
    # expit(logit(j)) can miss j by an ulp; keep the estimate inside its interval
    lower = min(expit(centre - half), j_hat)
    upper = max(expit(centre + half), j_hat)
    return ConfidenceInterval(lower, upper, level, LOGIT_J)
