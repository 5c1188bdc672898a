"""Shared fixture builders for the test suite."""

from __future__ import annotations

import math

import numpy as np

from youden_drm.drm import BiomarkerSample


def gamma_sample(rng, n0, n1, eta=0.23, llod=-math.inf):
    h = rng.gamma(2.0, 2.0, n0)
    d = rng.gamma(2.0, 1.0 / eta, n1)
    return BiomarkerSample.from_values(h, d, llod)


def random_fixture(rng, with_llod=None):
    """Random positive two-group sample, optionally censored at the healthy 15% quantile."""
    n0 = int(rng.integers(10, 201))
    n1 = int(rng.integers(10, 201))
    eta = float(rng.uniform(0.08, 0.4))
    h = rng.gamma(2.0, 2.0, n0)
    d = rng.gamma(2.0, 1.0 / eta, n1)
    if with_llod is None:
        with_llod = bool(rng.integers(2))
    llod = float(np.quantile(h, 0.15)) if with_llod else -math.inf
    return BiomarkerSample.from_values(h, d, llod)
