"""Youden index and optimal cutoff estimation under two-sample density ratio models.

The diseased distribution is linked to the healthy one through
``dF1(x) = exp(alpha + beta @ q(x)) dF0(x)``.  The tilt is fitted by maximum
empirical likelihood, optionally with a lower limit of detection, and the
optimal cutoff solves ``alpha + beta @ q(c) = 0``.

Typical use::

    from youden_drm import BiomarkerSample, fit_drm, estimate, get_basis

    sample = BiomarkerSample.from_values(healthy, diseased, llod=1.37)
    fit = fit_drm(sample, get_basis("linear"))
    est = estimate(fit)
"""

from __future__ import annotations

__version__ = "0.1.0"

from ._kernels import BACKEND
from .asymptotics import plug_in_A, sigma2_nonparametric, var_cutoff, var_youden
from .basis import LINEAR, LOG_QUADRATIC, X_LOGX, BasisSpec, custom_basis, eval_Q, eval_qdot, get_basis
from .comparators import (
    BootstrapResult,
    EcdfEstimate,
    bootstrap_ecdf_ci,
    bootstrap_percentile_ci,
    ecdf_youden,
)
from .dataio import parse_dataset, write_dataset
from .drm import BiomarkerSample, DrmFit, FitOptions, cdf_diseased, cdf_healthy, dual_loglik, dual_score, fit_drm
from .errors import *  # noqa: F403
from .intervals import ConfidenceInterval, ci_cutoff, ci_youden, norm_ppf
from .report import EstimateReport, analyze_sample
from .scenarios import SimScenario, builtin_scenario, load_scenario, solve_param, truth
from .sim import SimMetrics, generate, resolve_llod, run
from .youden import YoudenEstimate, estimate, find_cutoff, height

__all__ = [
    "BACKEND",
    "BasisSpec",
    "BiomarkerSample",
    "BootstrapResult",
    "ConfidenceInterval",
    "DrmFit",
    "EcdfEstimate",
    "EstimateReport",
    "FitOptions",
    "LINEAR",
    "LOG_QUADRATIC",
    "SimMetrics",
    "SimScenario",
    "X_LOGX",
    "YoudenEstimate",
    "analyze_sample",
    "bootstrap_ecdf_ci",
    "bootstrap_percentile_ci",
    "builtin_scenario",
    "cdf_diseased",
    "cdf_healthy",
    "ci_cutoff",
    "ci_youden",
    "custom_basis",
    "dual_loglik",
    "dual_score",
    "ecdf_youden",
    "estimate",
    "eval_Q",
    "eval_qdot",
    "find_cutoff",
    "fit_drm",
    "generate",
    "get_basis",
    "height",
    "load_scenario",
    "norm_ppf",
    "parse_dataset",
    "plug_in_A",
    "resolve_llod",
    "run",
    "sigma2_nonparametric",
    "solve_param",
    "truth",
    "var_cutoff",
    "var_youden",
    "write_dataset",
]
