"""End-to-end estimation of one sample and the serialisable report."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .basis import BasisSpec
from .comparators import bootstrap_ecdf_ci, ecdf_youden
from .drm import BiomarkerSample, fit_drm
from .errors import DegenerateEstimate, EstimationError
from .intervals import ci_cutoff, ci_youden
from .youden import estimate

__all__ = ["BiomarkerReport", "EstimateReport", "MethodReport", "analyze_sample"]

Interval = tuple[float, float]


@dataclass
class MethodReport:
    method: str
    j_hat: float
    c_hat: float
    ci_j: Interval | None = None
    ci_c: Interval | None = None
    root_status: str | None = None
    sigma2_j: float | None = None
    sigma2_c: float | None = None
    diagnostics: list[str] = field(default_factory=list)


@dataclass
class BiomarkerReport:
    biomarker: str
    n0: int
    n1: int
    m0: int
    m1: int
    methods: list[MethodReport] = field(default_factory=list)
    error: str | None = None


@dataclass
class EstimateReport:
    input: str
    basis: str
    llod: float
    level: float
    methods: list[str]
    bootstrap_B: int
    seed: int | None
    biomarkers: list[BiomarkerReport] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["llod"] = None if self.llod == -math.inf else self.llod
        for b in d["biomarkers"]:
            for m in b["methods"]:
                for k in ("ci_j", "ci_c"):
                    if m[k] is not None:
                        m[k] = list(m[k])
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "EstimateReport":
        d = dict(d)
        d["llod"] = -math.inf if d["llod"] is None else float(d["llod"])
        bms = []
        for b in d.pop("biomarkers"):
            b = dict(b)
            ms = []
            for m in b.pop("methods"):
                m = dict(m)
                for k in ("ci_j", "ci_c"):
                    if m[k] is not None:
                        m[k] = tuple(m[k])
                ms.append(MethodReport(**m))
            bms.append(BiomarkerReport(methods=ms, **b))
        return cls(biomarkers=bms, **d)

    @classmethod
    def from_json(cls, text: str) -> "EstimateReport":
        return cls.from_dict(json.loads(text))

    def csv_rows(self) -> list[list[str]]:
        rows = [["biomarker", "method", "quantity", "estimate", "ci_lower", "ci_upper", "root_status", "diagnostics"]]
        for b in self.biomarkers:
            if b.error is not None:
                rows.append([b.biomarker, "", "", "", "", "", "", b.error])
            for m in b.methods:
                diag = " | ".join(m.diagnostics)
                for q, est, ci in (("J", m.j_hat, m.ci_j), ("c", m.c_hat, m.ci_c)):
                    lo, hi = ("", "") if ci is None else (repr(ci[0]), repr(ci[1]))
                    rows.append([b.biomarker, m.method, q, repr(est), lo, hi, m.root_status or "", diag])
        return rows


def _drm(sample: BiomarkerSample, basis: BasisSpec, level: float) -> MethodReport:
    fit = fit_drm(sample, basis)
    est = estimate(fit, basis)
    diag = list(fit.diagnostics) + list(est.diagnostics)
    ci_j = ci_c = None
    if est.sigma2_j is not None:
        try:
            ci_j = ci_youden(est.j_hat, est.sigma2_j, fit.n, level).as_tuple()
        except DegenerateEstimate as exc:
            diag.append(f"Youden interval unavailable: {exc}")
    if est.sigma2_c is not None:
        ci_c = ci_cutoff(est.c_hat, est.sigma2_c, fit.n, level).as_tuple()
    if not fit.converged:
        diag.append("confidence intervals suppressed: the density ratio fit did not converge")
    return MethodReport(
        method="drm",
        j_hat=est.j_hat,
        c_hat=est.c_hat,
        ci_j=ci_j,
        ci_c=ci_c,
        root_status=est.root_status,
        sigma2_j=est.sigma2_j,
        sigma2_c=est.sigma2_c,
        diagnostics=diag,
    )


def _ecdf(sample: BiomarkerSample, level: float, B: int, seed: int | None) -> MethodReport:
    e = ecdf_youden(sample)
    rep = MethodReport(method="ecdf", j_hat=e.j_e, c_hat=e.c_e)
    if B > 0:
        try:
            res = bootstrap_ecdf_ci(sample, B, level, np.random.SeedSequence(seed))
        except EstimationError as exc:
            rep.diagnostics.append(f"bootstrap intervals unavailable: {exc}")
        else:
            rep.ci_j = res.intervals[0].as_tuple()
            rep.ci_c = res.intervals[1].as_tuple()
            rep.diagnostics.extend(res.diagnostics)
    return rep


def analyze_sample(
    sample: BiomarkerSample,
    basis: BasisSpec,
    name: str = "value",
    level: float = 0.95,
    methods: tuple[str, ...] = ("drm",),
    bootstrap_B: int = 1000,
    seed: int | None = None,
) -> BiomarkerReport:
    """Point estimates and intervals for each requested method.

    Data and estimation errors propagate; the caller decides how to report them.
    """
    rep = BiomarkerReport(name, sample.n0, sample.n1, sample.m0, sample.m1)
    for method in methods:
        if method == "drm":
            rep.methods.append(_drm(sample, basis, level))
        elif method == "ecdf":
            rep.methods.append(_ecdf(sample, level, bootstrap_B, seed))
        else:
            raise ValueError(f"unknown method {method!r}; expected drm or ecdf")
    return rep
