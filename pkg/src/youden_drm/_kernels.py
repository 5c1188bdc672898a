"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The public names at the bottom (``dual_loglik``, ``dual_derivs``,
``ecdf_scan``, ``bootstrap_ecdf``) dispatch on :data:`_accel.USE_NUMBA`.
The ``*_np`` / ``*_nb`` variants stay importable for tests and the
benchmark.  Both flavours evaluate the same formulas in the same order, so
they agree to rounding (the ECDF kernels agree bitwise).
"""

from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# dual empirical log-likelihood
# ---------------------------------------------------------------------------
#
# u_i = theta @ Q(t_i), s_i = u_i + log(rho).  The objective is
#   sum_{diseased} u_i - sum_i softplus(s_i)
# and pi_i = expit(s_i) = rho*w/(1 + rho*w) drives the derivatives.


def dual_loglik_np(u, diseased, log_rho):
    s = u + log_rho
    return float(u[diseased].sum() - np.logaddexp(0.0, s).sum())


def dual_derivs_np(u, Q, diseased, log_rho):
    s = u + log_rho
    e = np.exp(-np.abs(s))
    pi = np.where(s >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    curv = e / ((1.0 + e) * (1.0 + e))  # pi * (1 - pi) without cancellation
    ll = float(u[diseased].sum() - np.logaddexp(0.0, s).sum())
    grad = Q[diseased].sum(axis=0) - Q.T @ pi
    hess = -(Q.T * curv) @ Q
    return ll, grad, hess


@njit
def _softplus_nb(s):
    if s > 0.0:
        return s + math.log1p(math.exp(-s))
    return math.log1p(math.exp(s))


@njit
def dual_loglik_nb(u, diseased, log_rho):
    total = 0.0
    for i in range(u.shape[0]):
        if diseased[i]:
            total += u[i]
        total -= _softplus_nb(u[i] + log_rho)
    return total


@njit
def dual_derivs_nb(u, Q, diseased, log_rho):
    m, k = Q.shape
    grad = np.zeros(k)
    hess = np.zeros((k, k))
    ll = 0.0
    for i in range(m):
        s = u[i] + log_rho
        e = math.exp(-abs(s))
        if s >= 0.0:
            pi = 1.0 / (1.0 + e)
        else:
            pi = e / (1.0 + e)
        curv = e / ((1.0 + e) * (1.0 + e))
        ll -= _softplus_nb(s)
        if diseased[i]:
            ll += u[i]
            for a in range(k):
                grad[a] += Q[i, a]
        for a in range(k):
            grad[a] -= pi * Q[i, a]
            qa = curv * Q[i, a]
            for b in range(a + 1):
                hess[a, b] -= qa * Q[i, b]
    for a in range(k):
        for b in range(a):
            hess[b, a] = hess[a, b]
    return ll, grad, hess


# ---------------------------------------------------------------------------
# ECDF Youden scan
# ---------------------------------------------------------------------------
#
# healthy/diseased are the sorted detected values of each group; below0/below1
# count censored units, which sit below every detected value.  Returns the
# maximum of F0emp - F1emp over the pooled detected points and the smallest
# point attaining it.


def ecdf_scan_np(healthy, diseased, below0, below1):
    n0 = healthy.shape[0] + below0
    n1 = diseased.shape[0] + below1
    pts = np.unique(np.concatenate((healthy, diseased)))
    k0 = np.searchsorted(healthy, pts, side="right")
    k1 = np.searchsorted(diseased, pts, side="right")
    diff = (below0 + k0) / n0 - (below1 + k1) / n1
    i = int(np.argmax(diff))
    return float(diff[i]), float(pts[i])


@njit
def ecdf_scan_nb(healthy, diseased, below0, below1):
    m0 = healthy.shape[0]
    m1 = diseased.shape[0]
    n0 = m0 + below0
    n1 = m1 + below1
    i = 0
    j = 0
    best = -np.inf
    best_x = np.nan
    while i < m0 or j < m1:
        if j >= m1 or (i < m0 and healthy[i] <= diseased[j]):
            v = healthy[i]
        else:
            v = diseased[j]
        while i < m0 and healthy[i] == v:
            i += 1
        while j < m1 and diseased[j] == v:
            j += 1
        diff = (below0 + i) / n0 - (below1 + j) / n1
        if diff > best:
            best = diff
            best_x = v
    return best, best_x


def bootstrap_ecdf_np(healthy_all, diseased_all, idx0, idx1):
    """ECDF estimates on every bootstrap resample.

    ``*_all`` hold the full groups with censored units encoded as ``-inf``;
    ``idx0``/``idx1`` are ``(B, n_k)`` resampling index matrices.
    """
    B = idx0.shape[0]
    js = np.empty(B)
    cs = np.empty(B)
    for b in range(B):
        h = np.sort(healthy_all[idx0[b]])
        d = np.sort(diseased_all[idx1[b]])
        c0 = int(np.searchsorted(h, -np.inf, side="right"))
        c1 = int(np.searchsorted(d, -np.inf, side="right"))
        if c0 == h.shape[0] or c1 == d.shape[0]:
            js[b] = np.nan
            cs[b] = np.nan
            continue
        js[b], cs[b] = ecdf_scan_np(h[c0:], d[c1:], c0, c1)
    return js, cs


@njit
def bootstrap_ecdf_nb(healthy_all, diseased_all, idx0, idx1):
    B = idx0.shape[0]
    js = np.empty(B)
    cs = np.empty(B)
    for b in range(B):
        h = np.sort(healthy_all[idx0[b]])
        d = np.sort(diseased_all[idx1[b]])
        c0 = 0
        while c0 < h.shape[0] and h[c0] == -np.inf:
            c0 += 1
        c1 = 0
        while c1 < d.shape[0] and d[c1] == -np.inf:
            c1 += 1
        if c0 == h.shape[0] or c1 == d.shape[0]:
            js[b] = np.nan
            cs[b] = np.nan
            continue
        jb, cb = ecdf_scan_nb(h[c0:], d[c1:], c0, c1)
        js[b] = jb
        cs[b] = cb
    return js, cs


if USE_NUMBA:
    dual_loglik = dual_loglik_nb
    dual_derivs = dual_derivs_nb
    ecdf_scan = ecdf_scan_nb
    bootstrap_ecdf = bootstrap_ecdf_nb
else:
    dual_loglik = dual_loglik_np
    dual_derivs = dual_derivs_np
    ecdf_scan = ecdf_scan_np
    bootstrap_ecdf = bootstrap_ecdf_np

BACKEND = "numba" if USE_NUMBA else "numpy"
