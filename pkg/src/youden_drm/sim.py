"""Monte Carlo harness: data generation, per-replicate estimation, metrics.

Every replicate draws from its own Philox streams keyed by
``(seed, replicate_index, stream_id)``, and metrics are aggregated with
exactly rounded sums, so results do not depend on worker count or on the
order in which replicates finish.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .comparators import bootstrap_ecdf_ci, ecdf_youden
from .drm import BiomarkerSample, fit_drm
from .errors import EstimationError, DataError, ScenarioInfeasible
from .intervals import ci_cutoff, ci_youden
from .scenarios import (
    GAMMA_RATE0,
    GAMMA_SHAPE,
    LN_MU0,
    LN_SD0,
    LN_SD1,
    SimScenario,
    resolve_llod,
)
from .youden import estimate

__all__ = [
    "INFEASIBLE_FRACTION",
    "QuantityMetrics",
    "ReplicateResult",
    "SimMetrics",
    "generate",
    "replicate_rng",
    "resolve_llod",
    "run",
    "run_replicate",
]

INFEASIBLE_FRACTION = 0.10

STREAM_HEALTHY = 0
STREAM_DISEASED = 1
STREAM_BOOTSTRAP = 2

QUANTITIES = ("J", "c")


def replicate_rng(seed: int, replicate_index: int, stream_id: int) -> np.random.Generator:
    """Independent Philox generator for one (replicate, stream) pair."""
    ss = np.random.SeedSequence(seed, spawn_key=(replicate_index, stream_id))
    return np.random.Generator(np.random.Philox(ss))


def _draw(scenario: SimScenario, diseased: bool, size: int, rng: np.random.Generator) -> np.ndarray:
    if scenario.family == "gamma":
        rate = scenario.param if diseased else GAMMA_RATE0
        return rng.gamma(GAMMA_SHAPE, 1.0 / rate, size)
    mu, sd = (scenario.param, LN_SD1) if diseased else (LN_MU0, LN_SD0)
    return np.exp(rng.normal(mu, sd, size))


def generate(scenario: SimScenario, replicate_index: int) -> BiomarkerSample:
    """Replicate ``replicate_index`` of the scenario, with the LLOD applied."""
    h = _draw(scenario, False, scenario.n0, replicate_rng(scenario.seed, replicate_index, STREAM_HEALTHY))
    d = _draw(scenario, True, scenario.n1, replicate_rng(scenario.seed, replicate_index, STREAM_DISEASED))
    return BiomarkerSample.from_values(h, d, llod=resolve_llod(scenario))


@dataclass(frozen=True)
class MethodOutcome:
    """Estimates of one method on one replicate; ``None`` means unavailable."""

    J: float | None = None
    c: float | None = None
    ci_J: tuple[float, float] | None = None
    ci_c: tuple[float, float] | None = None
    failure: str | None = None


@dataclass(frozen=True)
class ReplicateResult:
    index: int
    outcomes: dict[str, MethodOutcome]


def _run_drm(scenario: SimScenario, sample: BiomarkerSample) -> MethodOutcome:
    try:
        fit = fit_drm(sample, scenario.basis)
    except (DataError, EstimationError) as exc:
        return MethodOutcome(failure=f"{type(exc).__name__}: {exc}")
    if not fit.converged:
        return MethodOutcome(failure="NonConvergence: " + "; ".join(fit.diagnostics))
    est = estimate(fit, scenario.basis)
    ci_J = ci_c = None
    if est.sigma2_j is not None:
        try:
            ci_J = ci_youden(est.j_hat, est.sigma2_j, fit.n, scenario.level).as_tuple()
        except EstimationError:
            pass
    if est.sigma2_c is not None:
        ci_c = ci_cutoff(est.c_hat, est.sigma2_c, fit.n, scenario.level).as_tuple()
    return MethodOutcome(J=est.j_hat, c=est.c_hat, ci_J=ci_J, ci_c=ci_c)


def _run_ecdf(scenario: SimScenario, sample: BiomarkerSample, index: int) -> MethodOutcome:
    try:
        e = ecdf_youden(sample)
    except DataError as exc:
        return MethodOutcome(failure=f"{type(exc).__name__}: {exc}")
    ci_J = ci_c = None
    if scenario.bootstrap_B > 0:
        rng = replicate_rng(scenario.seed, index, STREAM_BOOTSTRAP)
        try:
            res = bootstrap_ecdf_ci(sample, scenario.bootstrap_B, scenario.level, rng)
        except EstimationError:
            pass
        else:
            ci_J = res.intervals[0].as_tuple()
            ci_c = res.intervals[1].as_tuple()
    return MethodOutcome(J=e.j_e, c=e.c_e, ci_J=ci_J, ci_c=ci_c)


def run_replicate(scenario: SimScenario, index: int) -> ReplicateResult:
    sample = generate(scenario, index)
    out: dict[str, MethodOutcome] = {}
    if "drm" in scenario.methods:
        out["drm"] = _run_drm(scenario, sample)
    if "ecdf" in scenario.methods:
        out["ecdf"] = _run_ecdf(scenario, sample, index)
    return ReplicateResult(index, out)


def _run_block(args: tuple[SimScenario, int, int]) -> list[ReplicateResult]:
    scenario, start, stop = args
    return [run_replicate(scenario, b) for b in range(start, stop)]


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuantityMetrics:
    """Summary of one estimator of one quantity over the usable replicates.

    ``n`` counts replicates with a point estimate and ``n_ci`` those that also
    produced an interval; CP and AL are over the latter and are NaN when it is 0.
    """

    rb_percent: float
    mse: float
    cp_percent: float
    al: float
    n: int
    n_ci: int


def _quantity_metrics(values: list[float], cis: list[tuple[float, float]], truth: float) -> QuantityMetrics:
    n = len(values)
    if n:
        rb = 100.0 * math.fsum((a - truth) / truth for a in values) / n
        mse = math.fsum((a - truth) ** 2 for a in values) / n
    else:
        rb = mse = math.nan
    k = len(cis)
    if k:
        cp = 100.0 * sum(1 for lo, hi in cis if lo <= truth <= hi) / k
        al = math.fsum(hi - lo for lo, hi in cis) / k
    else:
        cp = al = math.nan
    return QuantityMetrics(rb, mse, cp, al, n, k)


_METRIC_NAMES = ("rb_percent", "mse", "cp_percent", "al", "n", "n_ci")


@dataclass(frozen=True)
class SimMetrics:
    scenario: SimScenario
    metrics: dict[str, dict[str, QuantityMetrics]]
    failures: dict[str, int]
    failure_messages: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def get(self, method: str, quantity: str) -> QuantityMetrics:
        return self.metrics[method][quantity]

    def rows(self) -> list[tuple[str, str, str, float | int]]:
        """``(method, quantity, metric, value)`` in a fixed order."""
        out = []
        for method in self.scenario.methods:
            for q in QUANTITIES:
                qm = self.metrics[method][q]
                for name in _METRIC_NAMES:
                    out.append((method, q, name, getattr(qm, name)))
            out.append((method, "-", "failures", self.failures[method]))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("method", "quantity", "metric", "value"))
        for method, q, name, value in self.rows():
            w.writerow((method, q, name, _fmt(value)))
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(),
            "metrics": {
                m: {q: {k: _json_num(getattr(qm, k)) for k in _METRIC_NAMES} for q, qm in per.items()}
                for m, per in self.metrics.items()
            },
            "failures": dict(self.failures),
            "failure_messages": {m: list(v) for m, v in self.failure_messages.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _fmt(value: float | int) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return "nan" if math.isnan(value) else repr(float(value))


def _json_num(value: float | int):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def aggregate(scenario: SimScenario, results: list[ReplicateResult]) -> SimMetrics:
    """Order-independent metrics from per-replicate results."""
    results = sorted(results, key=lambda r: r.index)
    truth = {"J": scenario.true_J, "c": scenario.true_c}
    metrics: dict[str, dict[str, QuantityMetrics]] = {}
    failures: dict[str, int] = {}
    messages: dict[str, tuple[str, ...]] = {}
    for method in scenario.methods:
        outs = [r.outcomes[method] for r in results]
        failed = [o.failure for o in outs if o.failure is not None]
        failures[method] = len(failed)
        # keep the first few distinct messages for the report
        messages[method] = tuple(dict.fromkeys(failed))[:5]
        metrics[method] = {}
        for q in QUANTITIES:
            vals = [getattr(o, q) for o in outs if o.failure is None]
            cis = [getattr(o, "ci_" + q) for o in outs if o.failure is None and getattr(o, "ci_" + q) is not None]
            metrics[method][q] = _quantity_metrics(vals, cis, truth[q])
    for method, k in failures.items():
        if k > INFEASIBLE_FRACTION * scenario.reps:
            raise ScenarioInfeasible(
                f"scenario {scenario.name}: method {method} failed on {k} of {scenario.reps} replicates"
                + (f" (e.g. {messages[method][0]})" if messages[method] else "")
            )
    return SimMetrics(scenario, metrics, failures, messages)


def run(scenario: SimScenario, workers: int = 1, reps: range | None = None) -> SimMetrics:
    """Run all replicates and aggregate.

    ``workers > 1`` spreads contiguous blocks of replicates over processes;
    the output is identical to the single-process run.
    """
    indices = reps if reps is not None else range(scenario.reps)
    if workers < 1:
        raise ValueError("workers must be at least 1")
    if workers == 1 or len(indices) < 2:
        results = [run_replicate(scenario, b) for b in indices]
    else:
        nblocks = min(len(indices), 4 * workers)
        bounds = np.linspace(indices.start, indices.stop, nblocks + 1).astype(int)
        blocks = [(scenario, int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = [r for chunk in pool.map(_run_block, blocks) for r in chunk]
    return aggregate(scenario, results)
