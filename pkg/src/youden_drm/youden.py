"""Optimal cutoff and Youden index from a fitted density ratio model.

The densities cross where ``theta @ Q(x) = 0``.  Roots are searched on the
range of the detected data; among several, the one with the largest
``F0_hat - F1_hat`` wins, and with none the best detected point is used.

A root can also be a minimum of ``F0_hat - F1_hat`` (the tilt has the wrong
sign), or a local maximum beaten by the lowest detected point when the
below-LLOD masses differ.  A root is therefore kept only if no detected point
does better; otherwise the grid maximiser is reported with ``grid_fallback``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .asymptotics import var_cutoff, var_youden
from .basis import BasisSpec
from .drm import DrmFit, cdf_diseased, cdf_healthy
from .errors import EstimationError

__all__ = [
    "ANALYTIC_ROOT",
    "GRID_FALLBACK",
    "MULTIPLE_ROOTS",
    "YoudenEstimate",
    "estimate",
    "find_cutoff",
    "height",
]

ANALYTIC_ROOT = "analytic_root"
MULTIPLE_ROOTS = "multiple_roots_resolved"
GRID_FALLBACK = "grid_fallback"

ROOT_RTOL = 1e-10
# slack when checking a root against the grid; Ĥ at a root equals Ĥ at the
# detected point just below it, so only rounding separates them
HEIGHT_ATOL = 1e-9


@dataclass(frozen=True)
class YoudenEstimate:
    c_hat: float
    j_hat: float
    root_status: str
    sigma2_c: float | None = None
    sigma2_j: float | None = None
    n: int = 0
    diagnostics: tuple[str, ...] = field(default=())


def height(fit: DrmFit, x):
    """F0_hat(x) - F1_hat(x)."""
    return cdf_healthy(fit, x) - cdf_diseased(fit, x)


def _g(fit: DrmFit, basis: BasisSpec, x: float) -> float:
    return float(fit.theta @ basis.Q(x))


def _refine(fit: DrmFit, basis: BasisSpec, lo: float, hi: float, g_lo: float, width: float) -> float:
    """Bisection on a sign-change bracket, finished with guarded Newton steps."""
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        g_mid = _g(fit, basis, mid)
        if g_mid == 0.0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(3):
        gx = _g(fit, basis, x)
        if gx == 0.0:
            break
        slope = float(fit.beta @ basis.qdot(x))
        if slope == 0.0:
            break
        nx = x - gx / slope
        if not lo < nx < hi or nx == x:
            break
        x = nx
    return x


def find_cutoff(fit: DrmFit, basis: BasisSpec | None = None) -> tuple[float, str]:
    """Solve ``theta @ Q(x) = 0`` over [min t_i, max t_i].

    Returns ``(c_hat, root_status)``.  The estimate always attains the
    maximum of ``F0_hat - F1_hat`` over the detected points.
    """
    c, status, _ = _find_cutoff(fit, basis)
    return c, status


def _find_cutoff(fit: DrmFit, basis: BasisSpec | None) -> tuple[float, str, str | None]:
    basis = basis or fit.basis
    pts = fit.points
    g = fit.theta @ basis.Q(pts).T
    width = ROOT_RTOL * (pts[-1] - pts[0])
    sg = np.sign(g)
    roots: list[float] = [float(x) for x in np.unique(pts[sg == 0])]
    for j in np.flatnonzero(sg[:-1] * sg[1:] < 0):
        roots.append(_refine(fit, basis, float(pts[j]), float(pts[j + 1]), float(g[j]), width))
    grid_h = height(fit, pts)
    k = int(np.argmax(grid_h))  # first maximum, i.e. smallest t_i on ties
    if not roots:
        return float(pts[k]), GRID_FALLBACK, None
    roots.sort()
    hs = np.atleast_1d(height(fit, np.asarray(roots)))
    best = int(np.argmax(hs))
    if grid_h[k] > hs[best] + HEIGHT_ATOL:
        note = (
            f"root(s) of theta'Q(x) at {', '.join(f'{r:.6g}' for r in roots)} do not maximise F0-F1 "
            f"({hs[best]:.4g} < {grid_h[k]:.4g} at x={pts[k]:.6g}); used the grid maximiser"
        )
        return float(pts[k]), GRID_FALLBACK, note
    status = ANALYTIC_ROOT if len(roots) == 1 else MULTIPLE_ROOTS
    return roots[best], status, None


def estimate(fit: DrmFit, basis: BasisSpec | None = None, variances: bool = True) -> YoudenEstimate:
    """Point estimates of (c, J) with plug-in asymptotic variances when available.

    Variance failures never block the point estimates; they are recorded as
    diagnostics and the variance is left as ``None``.
    """
    basis = basis or fit.basis
    c_hat, status, note = _find_cutoff(fit, basis)
    j_hat = float(height(fit, c_hat))
    diag: list[str] = [] if note is None else [note]
    s2c = s2j = None
    if not variances:
        pass
    elif not fit.converged:
        diag.append("variances suppressed: the density ratio fit did not converge")
    else:
        try:
            s2j = var_youden(fit, basis, c_hat, diagnostics=diag)
        except EstimationError as exc:
            diag.append(f"Youden variance unavailable: {exc}")
        if status == GRID_FALLBACK:
            diag.append("cutoff variance suppressed: no root of theta'Q(x) in the data range")
        else:
            try:
                s2c = var_cutoff(fit, basis, c_hat, diagnostics=diag)
            except EstimationError as exc:
                diag.append(f"cutoff variance unavailable: {exc}")
    if status == MULTIPLE_ROOTS:
        diag.append("several roots of theta'Q(x) in the data range; kept the one maximising F0-F1")
    return YoudenEstimate(
        c_hat=float(c_hat),
        j_hat=j_hat,
        root_status=status,
        sigma2_c=s2c,
        sigma2_j=s2j,
        n=fit.n,
        diagnostics=tuple(diag),
    )
