"""Plug-in asymptotic variances of the cutoff and Youden index estimators.

Integrals against dF0 are replaced by sums against the fitted point masses
on the detected values.  With ``w(x) = exp(theta @ Q(x))``::

    A0(t) = sum_{t_i <= t} p_i w_i / (1 + rho w_i)
    A1(t) = same with a factor q(t_i)
    A2(t) = same with a factor q(t_i) q(t_i)^T

    A = [[A0, A1^T], [A1, A2]] (full range),  S = rho / (1 + rho) * A,
    V = S - rho * a a^T  with  a = (A0, A1).

All inverses are applied through a Cholesky factorisation of ``A``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .basis import BasisSpec
from .drm import DrmFit, cdf_diseased, cdf_healthy
from .errors import SingularMatrix, VarianceUndefined

__all__ = [
    "AsymptoticQuantities",
    "COND_WARN",
    "DENOM_MIN",
    "plug_in_A",
    "quantities",
    "sigma2_nonparametric",
    "var_cutoff",
    "var_youden",
]

log = logging.getLogger(__name__)

COND_WARN = 1e10
DENOM_MIN = 1e-8


def _note(diagnostics: list[str] | None, msg: str) -> None:
    log.debug(msg)
    if diagnostics is not None:
        diagnostics.append(msg)


def _tilt_weights(fit: DrmFit) -> NDArray[np.float64]:
    # p_i w_i / (1 + rho w_i) = pi_i (1 - pi_i) / n1 with pi_i = expit(tilt + log rho)
    s = fit.tilt + math.log(fit.rho)
    e = np.exp(-np.abs(s))
    return e / ((1.0 + e) * (1.0 + e)) / fit.n1


def plug_in_A(fit: DrmFit, t: float = math.inf):
    """Return ``(A0(t), A1(t), A2(t))`` summed over detected points ``<= t``."""
    w = _tilt_weights(fit)
    q = fit.basis.q(fit.points)
    k = int(np.searchsorted(fit.points, t, side="right"))
    w, q = w[:k], q[:k]
    A0 = float(w.sum())
    A1 = q.T @ w
    A2 = (q.T * w) @ q
    return A0, A1, A2


@dataclass(frozen=True)
class AsymptoticQuantities:
    A0_c: float
    A0_inf: float
    A1_c: NDArray[np.float64]
    A1_inf: NDArray[np.float64]
    A2_inf: NDArray[np.float64]
    A: NDArray[np.float64]
    S: NDArray[np.float64]
    V: NDArray[np.float64]
    F0_c: float
    F1_c: float


def quantities(fit: DrmFit, c: float) -> AsymptoticQuantities:
    A0c, A1c, _ = plug_in_A(fit, c)
    A0, A1, A2 = plug_in_A(fit)
    k = fit.basis.p + 1
    A = np.empty((k, k))
    A[0, 0] = A0
    A[0, 1:] = A1
    A[1:, 0] = A1
    A[1:, 1:] = A2
    rho = fit.rho
    S = rho / (1.0 + rho) * A
    a = A[:, 0]
    V = S - rho * np.outer(a, a)
    return AsymptoticQuantities(
        A0_c=A0c,
        A0_inf=A0,
        A1_c=A1c,
        A1_inf=A1,
        A2_inf=A2,
        A=A,
        S=S,
        V=V,
        F0_c=cdf_healthy(fit, c),
        F1_c=cdf_diseased(fit, c),
    )


def _factor(A: NDArray[np.float64], diagnostics: list[str] | None):
    try:
        cf = cho_factor(A, lower=True)
    except LinAlgError:
        raise SingularMatrix("matrix A is not positive definite") from None
    cond = np.linalg.cond(A)
    if not np.isfinite(cond):
        raise SingularMatrix("matrix A is numerically singular")
    if cond > COND_WARN:
        _note(diagnostics, f"matrix A is ill-conditioned (condition number {cond:.3g})")
    return cf


def _proximity(fit: DrmFit, c: float, diagnostics: list[str] | None) -> None:
    if fit.llod > -math.inf:
        spacing = (fit.points[-1] - fit.points[0]) / fit.m
        if c - fit.llod < spacing:
            _note(
                diagnostics,
                f"cutoff {c:.6g} lies within one average data spacing of the LLOD {fit.llod:.6g}; "
                "the normal approximation assumes c > r",
            )


def var_cutoff(
    fit: DrmFit,
    basis: BasisSpec | None,
    c_hat: float,
    diagnostics: list[str] | None = None,
) -> float:
    """Asymptotic variance of sqrt(n) (c_hat - c0), plug-in version."""
    basis = basis or fit.basis
    c_hat = float(c_hat)
    denom = float(fit.beta @ basis.qdot(c_hat))
    if abs(denom) < DENOM_MIN:
        raise VarianceUndefined(
            f"beta @ qdot(c) = {denom:.3g} vanishes at c = {c_hat:.6g}; cutoff variance undefined"
        )
    aq = quantities(fit, c_hat)
    cf = _factor(aq.A, diagnostics)
    rho = fit.rho
    # S^{-1} x = (1 + rho) / rho * A^{-1} x
    y = (1.0 + rho) / rho * cho_solve(cf, basis.Q(c_hat))
    num = float(y @ aq.V @ y)
    if num < 0:
        _note(diagnostics, f"negative cutoff variance numerator {num:.3g} clamped to 0")
        num = 0.0
    _proximity(fit, c_hat, diagnostics)
    return num / (denom * denom)


def sigma2_nonparametric(fit: DrmFit, c: float) -> float:
    """The ECDF-method variance at ``c`` with the fitted CDFs plugged in."""
    rho = fit.rho
    F0 = cdf_healthy(fit, c)
    F1 = cdf_diseased(fit, c)
    return (rho + 1.0) * (F0 - F0 * F0) + (rho + 1.0) / rho * (F1 - F1 * F1)


def var_youden(
    fit: DrmFit,
    basis: BasisSpec | None,
    c_hat: float,
    diagnostics: list[str] | None = None,
) -> float:
    """Asymptotic variance of sqrt(n) (J_hat - J0), plug-in version."""
    # ``basis`` is accepted for symmetry with var_cutoff; A is built from fit.basis
    c_hat = float(c_hat)
    aq = quantities(fit, c_hat)
    cf = _factor(aq.A, diagnostics)
    rho = fit.rho
    a_c = np.concatenate(([aq.A0_c], aq.A1_c))
    correction = aq.A0_c - float(a_c @ cho_solve(cf, a_c))
    if correction < 0:
        _note(diagnostics, f"negative plug-in correction A0(c) - a'A^-1 a = {correction:.3g} clamped to 0")
        correction = 0.0
    F0, F1 = aq.F0_c, aq.F1_c
    sigma2 = (
        (rho + 1.0) * (F0 - F0 * F0)
        + (rho + 1.0) / rho * (F1 - F1 * F1)
        - (rho + 1.0) ** 3 / rho * correction
    )
    if sigma2 < 0:
        _note(diagnostics, f"negative Youden variance {sigma2:.3g} clamped to 0")
        sigma2 = 0.0
    _proximity(fit, c_hat, diagnostics)
    return sigma2
