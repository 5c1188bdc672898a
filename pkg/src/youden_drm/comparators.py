"""Nonparametric comparator: ECDF Youden estimator and percentile bootstrap.

Censored units carry the mass ``1 - m_k/n_k`` at the detection limit, so the
empirical CDFs start at that level at the first detected value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray

from ._kernels import bootstrap_ecdf, ecdf_scan
from .drm import BiomarkerSample
from .errors import DegenerateSample, EstimatorFailure, InvalidLevel, YoudenDRMError
from .intervals import PERCENTILE_BOOTSTRAP, ConfidenceInterval

__all__ = [
    "BootstrapResult",
    "EcdfEstimate",
    "FAILURE_FRACTION",
    "MIN_B",
    "bootstrap_ecdf_ci",
    "bootstrap_indices",
    "bootstrap_percentile_ci",
    "bootstrap_replicates",
    "ecdf_youden",
    "percentile_interval",
]

MIN_B = 100
FAILURE_FRACTION = 0.05


@dataclass(frozen=True)
class EcdfEstimate:
    j_e: float
    c_e: float


def ecdf_youden(sample: BiomarkerSample) -> EcdfEstimate:
    """Maximise ``F0emp - F1emp`` over the pooled detected points.

    Ties go to the smallest point.
    """
    if sample.m0 < 1 or sample.m1 < 1:
        raise DegenerateSample("the ECDF method needs at least one detected value in each group")
    j, c = ecdf_scan(
        sample.healthy_detected, sample.diseased_detected, sample.healthy_below, sample.diseased_below
    )
    return EcdfEstimate(j_e=float(j), c_e=float(c))


# ---------------------------------------------------------------------------
# bootstrap
# ---------------------------------------------------------------------------


def _generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def bootstrap_indices(n0: int, n1: int, B: int, seed=None) -> tuple[NDArray[np.int64], NDArray[np.int64]]:
    """All resampling indices, drawn up front: healthy block first, then diseased.

    Drawing everything before any estimator runs makes the replicates
    independent of how they are later scheduled.
    """
    rng = _generator(seed)
    idx0 = rng.integers(0, n0, size=(B, n0))
    idx1 = rng.integers(0, n1, size=(B, n1))
    return idx0, idx1


def _full_group(detected: NDArray[np.float64], below: int) -> NDArray[np.float64]:
    # censored units sit below every detected value; -inf marks them
    return np.concatenate((np.full(below, -np.inf), detected))


def _resample(sample: BiomarkerSample, h_all, d_all, i0, i1) -> BiomarkerSample:
    h = h_all[i0]
    d = d_all[i1]
    h_det = h[h > -np.inf]
    d_det = d[d > -np.inf]
    return BiomarkerSample(
        h_det,
        d_det,
        healthy_below=int(h.size - h_det.size),
        diseased_below=int(d.size - d_det.size),
        llod=sample.llod,
    )


def _check_args(B: int, level: float) -> None:
    if B < MIN_B:
        raise ValueError(f"bootstrap needs B >= {MIN_B}, got {B}")
    if not 0.0 < level < 1.0:
        raise InvalidLevel(f"confidence level must lie in (0, 1), got {level!r}")


def bootstrap_replicates(
    estimator: Callable[[BiomarkerSample], float | Sequence[float]],
    sample: BiomarkerSample,
    B: int = 1000,
    seed=None,
) -> NDArray[np.float64]:
    """Evaluate ``estimator`` on ``B`` resamples; rows of NaN mark failures.

    Returns an array of shape ``(B, k)`` where ``k`` is the estimator's output
    length (1 for scalars).
    """
    idx0, idx1 = bootstrap_indices(sample.n0, sample.n1, B, seed)
    h_all = _full_group(sample.healthy_detected, sample.healthy_below)
    d_all = _full_group(sample.diseased_detected, sample.diseased_below)
    out: list[NDArray[np.float64] | None] = []
    width = None
    for b in range(B):
        try:
            val = np.atleast_1d(np.asarray(estimator(_resample(sample, h_all, d_all, idx0[b], idx1[b])), float))
        except (YoudenDRMError, ArithmeticError, ValueError, np.linalg.LinAlgError):
            out.append(None)
            continue
        if width is None:
            width = val.size
        elif val.size != width:
            raise ValueError("estimator returned outputs of varying length")
        out.append(val)
    width = width or 1
    res = np.full((B, width), np.nan)
    for b, v in enumerate(out):
        if v is not None:
            res[b] = v
    return res


def percentile_interval(values: NDArray[np.float64], level: float) -> tuple[float, float]:
    """Type-7 empirical quantiles at ``(1 - level)/2`` and ``(1 + level)/2``."""
    lo, hi = np.quantile(values, [(1.0 - level) / 2.0, (1.0 + level) / 2.0], method="linear")
    return float(lo), float(hi)


@dataclass(frozen=True)
class BootstrapResult:
    intervals: tuple[ConfidenceInterval, ...]
    n_failed: int
    B: int
    diagnostics: tuple[str, ...] = field(default=())


def _summarise(reps: NDArray[np.float64], level: float) -> BootstrapResult:
    B = reps.shape[0]
    ok = np.all(np.isfinite(reps), axis=1)
    n_failed = int(B - ok.sum())
    if n_failed == B:
        raise EstimatorFailure(f"estimator failed on all {B} bootstrap resamples")
    diag: list[str] = []
    if n_failed > FAILURE_FRACTION * B:
        diag.append(
            f"EstimatorFailure: estimator failed on {n_failed} of {B} bootstrap resamples; "
            "the interval uses the successful ones"
        )
    good = reps[ok]
    cis = []
    for k in range(reps.shape[1]):
        lo, hi = percentile_interval(good[:, k], level)
        cis.append(ConfidenceInterval(lo, hi, level, PERCENTILE_BOOTSTRAP))
    return BootstrapResult(tuple(cis), n_failed, B, tuple(diag))


def bootstrap_percentile_ci(
    estimator: Callable[[BiomarkerSample], float | Sequence[float]],
    sample: BiomarkerSample,
    B: int = 1000,
    level: float = 0.95,
    seed=None,
) -> BootstrapResult:
    """Nonparametric percentile bootstrap, resampling each group independently.

    Censored units are resampled along with detected ones, so the below-LLOD
    counts are re-derived in every resample.  A vector-valued estimator gets
    one interval per component, all from the same resamples.
    """
    _check_args(B, level)
    return _summarise(bootstrap_replicates(estimator, sample, B, seed), level)


def bootstrap_ecdf_ci(
    sample: BiomarkerSample,
    B: int = 1000,
    level: float = 0.95,
    seed=None,
) -> BootstrapResult:
    """Percentile intervals for ``(J_E, c_E)`` through the compiled kernel.

    Uses the same resampling indices as :func:`bootstrap_percentile_ci` with
    the ECDF estimator, so both give identical intervals for one seed.
    """
    _check_args(B, level)
    idx0, idx1 = bootstrap_indices(sample.n0, sample.n1, B, seed)
    h_all = _full_group(sample.healthy_detected, sample.healthy_below)
    d_all = _full_group(sample.diseased_detected, sample.diseased_below)
    js, cs = bootstrap_ecdf(h_all, d_all, idx0, idx1)
    return _summarise(np.column_stack((js, cs)), level)
