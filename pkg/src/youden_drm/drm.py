"""Maximum empirical likelihood fit of the two-sample density ratio model.

Given detected biomarker values from a healthy and a diseased group (with
optional counts of values below a lower limit of detection ``r``), the tilt
parameter ``theta = (alpha, beta)`` maximises the concave dual empirical
log-likelihood

    l(theta) = sum_{diseased} theta @ Q(t) - sum_{all} log(1 + rho * exp(theta @ Q(t)))

with ``rho = n1 / n0``.  The fitted point masses on the pooled detected
values give step-function estimators of both CDFs above ``r``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import linprog

from . import _kernels
from .basis import BasisSpec
from .errors import BelowLLOD, DataError, DegenerateSample, NonConvergence, SingularHessian

__all__ = [
    "BiomarkerSample",
    "DrmFit",
    "FitOptions",
    "cdf_diseased",
    "cdf_healthy",
    "dual_hessian",
    "dual_loglik",
    "dual_score",
    "fit_drm",
]

log = logging.getLogger(__name__)

_ARMIJO = 1e-4
_MAX_HALVINGS = 80
# |theta @ Q| beyond this saturates expit to ~1e-7; worth checking for separation
_SATURATION = 15.0


def _frozen_sorted(values: ArrayLike) -> NDArray[np.float64]:
    arr = np.sort(np.asarray(values, dtype=np.float64).ravel())
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class BiomarkerSample:
    """Two-group biomarker data with per-group below-LLOD counts.

    Detected values are stored sorted.  ``llod = -inf`` means no limit of
    detection, in which case both below counts must be zero.
    """

    healthy_detected: NDArray[np.float64]
    diseased_detected: NDArray[np.float64]
    healthy_below: int = 0
    diseased_below: int = 0
    llod: float = -math.inf

    def __post_init__(self) -> None:
        object.__setattr__(self, "healthy_detected", _frozen_sorted(self.healthy_detected))
        object.__setattr__(self, "diseased_detected", _frozen_sorted(self.diseased_detected))
        object.__setattr__(self, "llod", float(self.llod))
        for name in ("healthy_below", "diseased_below"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise DataError(f"{name} must be a nonnegative integer, got {v}")
            object.__setattr__(self, name, int(v))
        if math.isnan(self.llod) or self.llod == math.inf:
            raise DataError(f"llod must be finite or -inf, got {self.llod}")
        for label, arr in (("healthy", self.healthy_detected), ("diseased", self.diseased_detected)):
            if not np.all(np.isfinite(arr)):
                raise DataError(f"{label} detected values must be finite")
            if arr.size and arr[0] < self.llod:
                raise DataError(
                    f"{label} detected value {arr[0]} lies below the LLOD {self.llod}"
                )
        if self.llod == -math.inf and (self.healthy_below or self.diseased_below):
            raise DataError("below-LLOD counts require a finite LLOD")
        if self.n0 < 1 or self.n1 < 1:
            raise DataError(f"each group needs at least one unit (n0={self.n0}, n1={self.n1})")

    @classmethod
    def from_values(
        cls, healthy: ArrayLike, diseased: ArrayLike, llod: float = -math.inf
    ) -> "BiomarkerSample":
        """Split raw measurements at ``llod``: values below it become counts."""
        h = np.asarray(healthy, dtype=np.float64).ravel()
        d = np.asarray(diseased, dtype=np.float64).ravel()
        for label, arr in (("healthy", h), ("diseased", d)):
            if np.isnan(arr).any():
                raise DataError(f"{label} values contain NaN")
        return cls(
            h[h >= llod],
            d[d >= llod],
            int(np.count_nonzero(h < llod)),
            int(np.count_nonzero(d < llod)),
            llod,
        )

    @property
    def m0(self) -> int:
        return int(self.healthy_detected.size)

    @property
    def m1(self) -> int:
        return int(self.diseased_detected.size)

    @property
    def n0(self) -> int:
        return self.m0 + self.healthy_below

    @property
    def n1(self) -> int:
        return self.m1 + self.diseased_below

    @property
    def n(self) -> int:
        return self.n0 + self.n1

    @property
    def rho(self) -> float:
        return self.n1 / self.n0

    def pooled(self) -> tuple[NDArray[np.float64], NDArray[np.bool_]]:
        """Sorted pooled detected values and a diseased-membership mask."""
        pts = np.concatenate((self.healthy_detected, self.diseased_detected))
        lab = np.concatenate((np.zeros(self.m0, bool), np.ones(self.m1, bool)))
        order = np.argsort(pts, kind="stable")
        return pts[order], lab[order]


@dataclass(frozen=True)
class FitOptions:
    tol: float = 1e-8
    max_iter: int = 100


@dataclass(frozen=True)
class DrmFit:
    """Fitted density ratio model.

    ``weights`` are the healthy-group point masses on ``points`` (sorted
    pooled detected values); ``tilt`` is ``theta @ Q(points)``.
    """

    theta: NDArray[np.float64]
    weights: NDArray[np.float64]
    diseased_weights: NDArray[np.float64]
    zeta0: float
    zeta1: float
    rho: float
    points: NDArray[np.float64]
    labels: NDArray[np.bool_]
    tilt: NDArray[np.float64]
    loglik: float
    iterations: int
    grad_norm: float
    converged: bool
    n0: int
    n1: int
    llod: float
    basis: BasisSpec
    diagnostics: tuple[str, ...] = ()
    _cum0: NDArray[np.float64] = field(default=None, repr=False)
    _cum1: NDArray[np.float64] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_cum0", np.concatenate(([0.0], np.cumsum(self.weights))))
        object.__setattr__(self, "_cum1", np.concatenate(([0.0], np.cumsum(self.diseased_weights))))

    @property
    def alpha(self) -> float:
        return float(self.theta[0])

    @property
    def beta(self) -> NDArray[np.float64]:
        return self.theta[1:]

    @property
    def n(self) -> int:
        return self.n0 + self.n1

    @property
    def m(self) -> int:
        return int(self.points.size)

    @property
    def omega(self) -> NDArray[np.float64]:
        """Fitted density ratio exp(theta @ Q(t_i)) at each detected point."""
        return np.exp(self.tilt)

    def raise_for_convergence(self) -> None:
        if not self.converged:
            raise NonConvergence(
                f"dual likelihood maximisation stopped after {self.iterations} iterations "
                f"with |grad|_inf = {self.grad_norm:.3g}"
            )


def _design(sample: BiomarkerSample, basis: BasisSpec):
    if sample.m0 == 0 or sample.m1 == 0:
        raise DegenerateSample(
            f"both groups need detected values (m0={sample.m0}, m1={sample.m1})"
        )
    pts, lab = sample.pooled()
    Q = np.ascontiguousarray(basis.Q(pts))
    return pts, lab, Q


def dual_loglik(theta: ArrayLike, sample: BiomarkerSample, basis: BasisSpec) -> float:
    _, lab, Q = _design(sample, basis)
    u = Q @ np.asarray(theta, dtype=np.float64)
    return float(_kernels.dual_loglik(u, lab, math.log(sample.rho)))


def dual_score(theta: ArrayLike, sample: BiomarkerSample, basis: BasisSpec) -> NDArray[np.float64]:
    _, lab, Q = _design(sample, basis)
    u = Q @ np.asarray(theta, dtype=np.float64)
    return _kernels.dual_derivs(u, Q, lab, math.log(sample.rho))[1]


def dual_hessian(theta: ArrayLike, sample: BiomarkerSample, basis: BasisSpec) -> NDArray[np.float64]:
    _, lab, Q = _design(sample, basis)
    u = Q @ np.asarray(theta, dtype=np.float64)
    return _kernels.dual_derivs(u, Q, lab, math.log(sample.rho))[2]


def _newton_direction(grad, hess):
    try:
        L = np.linalg.cholesky(-hess)
    except np.linalg.LinAlgError:
        return None
    z = np.linalg.solve(L, grad)
    d = np.linalg.solve(L.T, z)
    if not np.all(np.isfinite(d)):
        return None
    return d


def _separable(Q: NDArray[np.float64], diseased: NDArray[np.bool_]) -> bool:
    """True when some direction d != 0 orders the groups: (quasi-)separation.

    Then the dual likelihood has no maximiser and theta diverges.
    """
    scale = np.max(np.abs(Q), axis=0)
    scale[scale == 0] = 1.0
    Qs = Q / scale
    sgn = np.where(diseased, 1.0, -1.0)
    A = -(sgn[:, None] * Qs)
    res = linprog(
        c=A.sum(axis=0),  # minimise -sum(sgn * Q d)
        A_ub=A,
        b_ub=np.zeros(Q.shape[0]),
        bounds=[(-1.0, 1.0)] * Q.shape[1],
        method="highs",
    )
    if res.status != 0:
        return False
    s = -(A @ res.x)
    return bool(s.min() >= -1e-9 and s.sum() > 1e-6)


def fit_drm(
    sample: BiomarkerSample,
    basis: BasisSpec,
    options: FitOptions | None = None,
) -> DrmFit:
    """Maximise the dual empirical log-likelihood by damped Newton from theta = 0.

    A non-converged fit is returned with ``converged=False`` rather than
    raised; call :meth:`DrmFit.raise_for_convergence` to insist.
    """
    opts = options or FitOptions()
    k = basis.p + 1
    if sample.m0 < k or sample.m1 < k:
        raise DegenerateSample(
            f"need at least p+1={k} detected values per group (m0={sample.m0}, m1={sample.m1})"
        )
    pts, lab, Q = _design(sample, basis)
    if pts[0] == pts[-1]:
        raise DegenerateSample("all detected values are identical")

    log_rho = math.log(sample.rho)
    diagnostics: list[str] = []

    def evaluate(th):
        u = Q @ th
        ll, g, H = _kernels.dual_derivs(u, Q, lab, log_rho)
        return u, ll, g, H

    theta = np.zeros(k)
    u, ll, g, H = evaluate(theta)
    gnorm = float(np.max(np.abs(g)))
    it = 0
    converged = gnorm <= opts.tol
    polish = 0
    gradient_steps = 0
    while it < opts.max_iter:
        if converged:
            # quadratic convergence makes one or two extra steps nearly free and
            # tightens the score identities far below tol
            if polish >= 2:
                break
            polish += 1
        d = _newton_direction(g, H)
        newton = d is not None
        if not newton:
            d = g.copy()
        step = _line_search(theta, d, ll, g, gnorm, evaluate, pts.size)
        if step is None and newton and not converged:
            d = g.copy()
            newton = False
            step = _line_search(theta, d, ll, g, gnorm, evaluate, pts.size)
        if step is None:
            if converged:
                break
            if not newton and _newton_direction(g, H) is None:
                raise SingularHessian(
                    f"Hessian is not negative definite and gradient ascent stalled "
                    f"at iteration {it} (|grad|_inf = {gnorm:.3g})"
                )
            diagnostics.append(f"line search stalled at iteration {it} (|grad|_inf = {gnorm:.3g})")
            break
        it += 1
        new_theta, new_u, new_ll, new_g, new_H = step
        new_gnorm = float(np.max(np.abs(new_g)))
        if converged and new_gnorm >= gnorm:
            break
        theta, u, ll, g, H, gnorm = new_theta, new_u, new_ll, new_g, new_H, new_gnorm
        if not newton and not converged:
            gradient_steps += 1
        converged = converged or gnorm <= opts.tol

    if gradient_steps:
        diagnostics.append(f"Newton step unusable; took {gradient_steps} gradient-ascent step(s)")
    if not converged:
        diagnostics.append(
            f"no convergence after {it} iterations (|grad|_inf = {gnorm:.3g} > tol {opts.tol:g})"
        )

    if np.max(np.abs(u)) > _SATURATION and _separable(Q, lab):
        converged = False
        diagnostics.append(
            "complete separation: the groups are perfectly ordered by the basis, "
            "theta diverges and the reported fit is the last iterate"
        )

    n0, n1 = sample.n0, sample.n1
    s = u + log_rho
    e = np.exp(-np.abs(s))
    one_minus_pi = np.where(s >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
    pi = np.where(s >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    weights = one_minus_pi / n0  # 1 / (n0 (1 + rho w))
    dweights = pi / n1  # w / (n0 (1 + rho w))

    gram = (Q.T * weights) @ Q
    ev = np.linalg.eigvalsh(gram)
    if not ev[0] > 1e-10 * ev[-1]:
        diagnostics.append(
            "condition C4: weighted second-moment matrix of Q is not positive definite "
            f"(eigenvalues {ev[0]:.3g} .. {ev[-1]:.3g})"
        )

    for msg in diagnostics:
        log.debug(msg)

    return DrmFit(
        theta=theta,
        weights=weights,
        diseased_weights=dweights,
        zeta0=sample.m0 / n0,
        zeta1=sample.m1 / n1,
        rho=sample.rho,
        points=pts,
        labels=lab,
        tilt=u,
        loglik=ll,
        iterations=it,
        grad_norm=gnorm,
        converged=converged,
        n0=n0,
        n1=n1,
        llod=sample.llod,
        basis=basis,
        diagnostics=tuple(diagnostics),
    )


def _line_search(theta, d, ll, g, gnorm, evaluate, n_terms):
    """Armijo backtracking (factor 0.5) along ascent direction ``d``.

    Near the optimum the objective is flat to rounding; a full step that does
    not lose more than rounding noise and shrinks the gradient is accepted.
    The noise allowance is the worst-case error of summing ``n_terms`` terms.
    """
    slope = float(g @ d)
    if not slope > 0:
        return None
    noise = 4 * max(16, n_terms) * np.finfo(float).eps * max(1.0, abs(ll))
    s = 1.0
    for _ in range(_MAX_HALVINGS):
        cand = theta + s * d
        if np.array_equal(cand, theta):
            return None
        u, new_ll, new_g, new_H = evaluate(cand)
        if np.isfinite(new_ll):
            if new_ll >= ll + _ARMIJO * s * slope:
                return cand, u, new_ll, new_g, new_H
            if s == 1.0 and new_ll >= ll - noise and np.max(np.abs(new_g)) < gnorm:
                return cand, u, new_ll, new_g, new_H
        s *= 0.5
    return None


def _check_llod(fit: DrmFit, x: NDArray[np.float64]) -> None:
    if fit.llod > -math.inf and np.any(x < fit.llod):
        raise BelowLLOD(f"CDF estimators are undefined below the LLOD r={fit.llod}")


def _step(fit: DrmFit, cum: NDArray[np.float64], offset: float, x: ArrayLike):
    arr = np.asarray(x, dtype=np.float64)
    _check_llod(fit, np.atleast_1d(arr))
    k = np.searchsorted(fit.points, arr, side="right")
    # the fitted masses sum to zeta only up to the solver tolerance; pin the
    # CDF to exactly 1 from the largest detected value on
    out = np.where(k == fit.points.size, 1.0, np.clip(offset + cum[k], 0.0, 1.0))
    return float(out) if out.ndim == 0 else out


def cdf_healthy(fit: DrmFit, x: ArrayLike):
    """Semiparametric estimate of F0 at ``x >= r`` (right-continuous step)."""
    return _step(fit, fit._cum0, 1.0 - fit.zeta0, x)


def cdf_diseased(fit: DrmFit, x: ArrayLike):
    """Semiparametric estimate of F1 at ``x >= r`` (right-continuous step)."""
    return _step(fit, fit._cum1, 1.0 - fit.zeta1, x)
