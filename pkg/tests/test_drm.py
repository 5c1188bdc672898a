import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _util import gamma_sample, random_fixture
from youden_drm.basis import LINEAR, LOG_QUADRATIC, X_LOGX, custom_basis
from youden_drm.drm import (
    BiomarkerSample,
    FitOptions,
    cdf_diseased,
    cdf_healthy,
    dual_hessian,
    dual_loglik,
    dual_score,
    fit_drm,
)
from youden_drm.errors import BelowLLOD, DataError, DegenerateSample, NonConvergence, SingularHessian


# --- BiomarkerSample ---------------------------------------------------------


def test_from_values_splits_at_llod():
    s = BiomarkerSample.from_values([1.0, 1.5, 2.0], [0.5, 3.0], llod=1.5)
    assert (s.m0, s.healthy_below, s.m1, s.diseased_below) == (2, 1, 1, 1)
    np.testing.assert_array_equal(s.healthy_detected, [1.5, 2.0])  # x == r is detected
    assert (s.n0, s.n1, s.n) == (3, 2, 5)
    assert s.rho == pytest.approx(2 / 3)


def test_sample_is_sorted_and_read_only():
    s = BiomarkerSample([3.0, 1.0], [2.0])
    np.testing.assert_array_equal(s.healthy_detected, [1.0, 3.0])
    with pytest.raises(ValueError):
        s.healthy_detected[0] = 5.0


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(healthy_detected=[1.0], diseased_detected=[2.0], healthy_below=1),
        dict(healthy_detected=[1.0], diseased_detected=[2.0], healthy_below=-1, llod=0.0),
        dict(healthy_detected=[1.0], diseased_detected=[2.0], llod=1.5),
        dict(healthy_detected=[np.inf], diseased_detected=[2.0]),
        dict(healthy_detected=[1.0], diseased_detected=[2.0], llod=np.nan),
        dict(healthy_detected=[], diseased_detected=[2.0]),
    ],
)
def test_invalid_samples(kwargs):
    with pytest.raises(DataError):
        BiomarkerSample(**kwargs)


def test_nan_values_rejected():
    with pytest.raises(DataError):
        BiomarkerSample.from_values([1.0, np.nan], [2.0])


def test_pooled_labels():
    s = BiomarkerSample([1.0, 3.0], [2.0, 3.0])
    pts, lab = s.pooled()
    np.testing.assert_array_equal(pts, [1.0, 2.0, 3.0, 3.0])
    np.testing.assert_array_equal(lab, [False, True, False, True])


# --- fit ----------------------------------------------------------------------


def test_identical_samples_fit_zero_tilt():
    x = [1.0, 2.0, 3.0, 4.0, 5.5]
    fit = fit_drm(BiomarkerSample(x, x), LINEAR)
    assert fit.converged
    np.testing.assert_allclose(fit.theta, 0.0, atol=1e-12)
    np.testing.assert_allclose(fit.weights, 0.1, atol=1e-15)


def test_small_fixture_values():
    fit = fit_drm(BiomarkerSample([1, 2, 3, 4], [2, 3, 4, 5]), LINEAR)
    assert fit.converged
    # symmetric design: the cutoff -alpha/beta sits at the centre, 3
    assert -fit.alpha / fit.beta[0] == pytest.approx(3.0, abs=1e-12)
    assert fit.weights.sum() == pytest.approx(1.0, abs=1e-13)
    assert fit.diseased_weights.sum() == pytest.approx(1.0, abs=1e-13)


@pytest.mark.parametrize("basis", [LINEAR, LOG_QUADRATIC, X_LOGX], ids=lambda b: b.name)
def test_score_identities_with_llod(basis):
    rng = np.random.default_rng(3)
    s = gamma_sample(rng, 150, 90, llod=1.37)
    fit = fit_drm(s, basis)
    assert fit.converged and fit.grad_norm <= 1e-8
    assert abs(fit.weights.sum() - s.m0 / s.n0) < 1e-10
    assert abs(fit.diseased_weights.sum() - s.m1 / s.n1) < 1e-10
    assert fit.zeta0 == s.m0 / s.n0 and fit.zeta1 == s.m1 / s.n1
    # the weighted first moment of q matches across groups too
    q = basis.q(fit.points)
    diseased_mean = q[fit.labels].sum(axis=0) / s.n1
    np.testing.assert_allclose(fit.diseased_weights @ q, diseased_mean, rtol=1e-9)


def test_weights_are_in_unit_interval():
    rng = np.random.default_rng(5)
    fit = fit_drm(gamma_sample(rng, 60, 60), LINEAR)
    assert np.all(fit.weights > 0) and np.all(fit.weights < 1)
    np.testing.assert_allclose(fit.omega, fit.diseased_weights * fit.n1 / (fit.weights * fit.n0) / fit.rho, rtol=1e-12)


def test_complete_separation_flagged():
    fit = fit_drm(BiomarkerSample([1.0, 2.0], [3.0, 4.0]), LINEAR)
    assert not fit.converged
    assert any("separation" in d for d in fit.diagnostics)
    with pytest.raises(NonConvergence):
        fit.raise_for_convergence()


def test_max_iter_reported():
    rng = np.random.default_rng(8)
    fit = fit_drm(gamma_sample(rng, 50, 50), LINEAR, FitOptions(max_iter=1))
    assert not fit.converged
    assert fit.iterations == 1
    assert any("no convergence" in d for d in fit.diagnostics)


def test_too_few_points():
    with pytest.raises(DegenerateSample):
        fit_drm(BiomarkerSample([1.0, 2.0], [3.0, 4.0]), LOG_QUADRATIC)
    with pytest.raises(DegenerateSample):
        fit_drm(BiomarkerSample([2.0, 2.0], [2.0, 2.0]), LINEAR)


def test_all_censored_group():
    s = BiomarkerSample([], [2.0, 3.0], healthy_below=3, llod=1.0)
    with pytest.raises(DegenerateSample):
        fit_drm(s, LINEAR)
    with pytest.raises(DegenerateSample):
        dual_loglik([0, 0], s, LINEAR)


def test_collinear_custom_basis_is_caught():
    basis = custom_basis(lambda x: np.column_stack((x, 2 * x)), lambda x: np.column_stack((np.ones_like(x), 2 * np.ones_like(x))), 2)
    rng = np.random.default_rng(1)
    s = gamma_sample(rng, 40, 40)
    try:
        fit = fit_drm(s, basis)
    except SingularHessian:
        return
    assert any("C4" in d for d in fit.diagnostics)


# --- CDF estimators -----------------------------------------------------------


def test_cdfs_are_steps_to_one():
    rng = np.random.default_rng(6)
    s = gamma_sample(rng, 80, 70, llod=1.0)
    fit = fit_drm(s, LINEAR)
    grid = np.concatenate(([1.0], fit.points, [fit.points[-1] + 1]))
    for cdf, zeta in ((cdf_healthy, fit.zeta0), (cdf_diseased, fit.zeta1)):
        vals = cdf(fit, grid)
        assert np.all(np.diff(vals) >= -1e-15)
        assert vals[0] == pytest.approx(1 - zeta, abs=1e-15)
        assert vals[-1] == pytest.approx(1.0, abs=1e-12)
        assert cdf(fit, fit.points[-1]) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(BelowLLOD):
        cdf_healthy(fit, 0.5)


def test_cdf_matches_display_formula():
    # direct evaluation of the two step-function displays, point by point
    s = BiomarkerSample([1.0, 2.5, 3.0, 4.0], [2.0, 3.5, 5.0, 4.5, 6.0], healthy_below=1, llod=0.5)
    fit = fit_drm(s, LINEAR)
    a, b = fit.theta
    pts = list(s.healthy_detected) + list(s.diseased_detected)
    rho = s.n1 / s.n0
    for x in (0.5, 2.0, 3.2, 6.0):
        f0 = (1 - s.m0 / s.n0) + sum(1 / (1 + rho * math.exp(a + b * t)) for t in pts if t <= x) / s.n0
        f1 = (1 - s.m1 / s.n1) + sum(math.exp(a + b * t) / (1 + rho * math.exp(a + b * t)) for t in pts if t <= x) / s.n0
        assert cdf_healthy(fit, x) == pytest.approx(f0, abs=1e-14)
        assert cdf_diseased(fit, x) == pytest.approx(f1, abs=1e-14)


# --- properties -------------------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_score_identities_property(seed):
    rng = np.random.default_rng(seed)
    s = random_fixture(rng)
    fit = fit_drm(s, [LINEAR, LOG_QUADRATIC, X_LOGX][seed % 3])
    if fit.converged:
        assert abs(fit.weights.sum() - s.m0 / s.n0) <= 1e-8
        assert abs(fit.diseased_weights.sum() - s.m1 / s.n1) <= 1e-8
        # the fitted theta is the maximiser: nearby points are no better
        for d in np.eye(len(fit.theta)) * 1e-3:
            assert dual_loglik(fit.theta + d, s, fit.basis) <= fit.loglik + 1e-9
            assert dual_loglik(fit.theta - d, s, fit.basis) <= fit.loglik + 1e-9


def test_hessian_is_negative_definite():
    rng = np.random.default_rng(9)
    s = gamma_sample(rng, 30, 40)
    H = dual_hessian([0.3, -0.1, 0.05], s, LOG_QUADRATIC)
    assert np.all(np.linalg.eigvalsh(H) < 0)
    g = dual_score([0.0, 0.0], s, LINEAR)
    assert g.shape == (2,)


def test_numpy_backend_gives_same_fit():
    code = (
        "import numpy as np, json;"
        "from youden_drm import _kernels, fit_drm, BiomarkerSample, LOG_QUADRATIC;"
        "rng=np.random.default_rng(12);"
        "s=BiomarkerSample.from_values(rng.gamma(2,2,120), rng.gamma(2,5,100), 1.2);"
        "f=fit_drm(s, LOG_QUADRATIC);"
        "print(json.dumps([_kernels.BACKEND]+list(map(float,f.theta))))"
    )
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, YOUDEN_DRM_DISABLE_NUMBA=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        vals = json.loads(res.stdout)
        out[vals[0]] = np.array(vals[1:])
    assert set(out) == {"numba", "numpy"}
    np.testing.assert_allclose(out["numba"], out["numpy"], rtol=1e-10, atol=1e-12)


def test_large_sample_converges_despite_rounding():
    # at n = 40000 the log-likelihood change of the last Newton steps is below
    # the summation rounding of the kernel; the fit must still converge
    from youden_drm.scenarios import builtin_scenario
    from youden_drm.sim import generate

    s = builtin_scenario("gamma_J0.6_20000_20000_nollod", reps=8)
    for i in (3, 4, 5):
        fit = fit_drm(generate(s, i), s.basis)
        assert fit.converged, fit.diagnostics
        assert fit.grad_norm <= 1e-8
