import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from youden_drm.basis import (
    LINEAR,
    LOG_QUADRATIC,
    X_LOGX,
    custom_basis,
    eval_Q,
    eval_q,
    eval_qdot,
    get_basis,
)
from youden_drm.errors import DomainError

BUILTINS = [LINEAR, LOG_QUADRATIC, X_LOGX]


def test_linear_Q():
    np.testing.assert_array_equal(eval_Q(LINEAR, 4.79), [1.0, 4.79])


def test_log_quadratic_at_one_and_e():
    np.testing.assert_array_equal(eval_Q(LOG_QUADRATIC, 1.0), [1.0, 0.0, 0.0])
    np.testing.assert_allclose(eval_Q(LOG_QUADRATIC, math.e), [1.0, 1.0, 1.0], rtol=1e-15)


def test_qdot_examples():
    np.testing.assert_array_equal(eval_qdot(LINEAR, 7.3), [1.0])
    np.testing.assert_array_equal(eval_qdot(LOG_QUADRATIC, 1.0), [1.0, 0.0])
    np.testing.assert_array_equal(eval_qdot(X_LOGX, 2.0), [1.0, 0.5])


def test_vectorised_shapes():
    x = np.array([0.5, 1.0, 2.0])
    for b in BUILTINS:
        assert eval_q(b, x).shape == (3, b.p)
        assert eval_qdot(b, x).shape == (3, b.p)
        assert eval_Q(b, x).shape == (3, b.p + 1)
        assert eval_Q(b, 2.0).shape == (b.p + 1,)


@pytest.mark.parametrize("basis", [LOG_QUADRATIC, X_LOGX])
@pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
def test_log_bases_reject_nonpositive(basis, x):
    with pytest.raises(DomainError):
        eval_Q(basis, x)
    with pytest.raises(DomainError):
        eval_qdot(basis, np.array([1.0, x]))


def test_linear_accepts_negative():
    np.testing.assert_array_equal(eval_Q(LINEAR, -3.0), [1.0, -3.0])


def test_get_basis_aliases():
    assert get_basis("loglog") is LOG_QUADRATIC
    assert get_basis("log-quadratic") is LOG_QUADRATIC
    assert get_basis("xlogx") is X_LOGX
    assert get_basis("LINEAR") is LINEAR
    with pytest.raises(ValueError):
        get_basis("cubic")


@pytest.mark.parametrize("basis", BUILTINS, ids=lambda b: b.name)
def test_qdot_matches_central_difference(basis):
    rng = np.random.default_rng(11)
    x = rng.uniform(0.05, 60.0, 100)
    h = 1e-6 * np.maximum(1.0, np.abs(x))
    fd = (eval_q(basis, x + h) - eval_q(basis, x - h)) / (2 * h)[:, None]
    an = eval_qdot(basis, x)
    np.testing.assert_allclose(fd, an, rtol=1e-6, atol=1e-6 * np.abs(an).max())


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e6), st.sampled_from(BUILTINS))
def test_first_component_is_one(x, basis):
    assert eval_Q(basis, x)[0] == 1.0


def test_custom_basis_shape_check():
    good = custom_basis(lambda x: np.column_stack((x, x**2)), lambda x: np.column_stack((np.ones_like(x), 2 * x)), p=2)
    np.testing.assert_array_equal(eval_Q(good, 3.0), [1.0, 3.0, 9.0])
    bad = custom_basis(lambda x: x, lambda x: np.ones_like(x), p=2)
    with pytest.raises(ValueError):
        eval_Q(bad, np.array([1.0, 2.0]))


def test_invalid_dimension():
    with pytest.raises(ValueError):
        custom_basis(lambda x: x, lambda x: x, p=0)
