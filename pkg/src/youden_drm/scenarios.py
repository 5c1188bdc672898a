"""Simulation scenarios: distribution families, true (J, c), LLOD levels, config files.

Two families are built in, each with a fixed healthy distribution and a
one-parameter diseased distribution:

* ``gamma``: healthy Gamma(shape 2, rate 0.5), diseased Gamma(shape 2, rate eta)
  with ``eta < 0.5``.  The log density ratio is linear in x.
* ``lognormal``: healthy log X ~ N(2.5, 0.3^2), diseased log X ~ N(mu, 0.5^2).
  The log density ratio is quadratic in log x.

A scenario may give the family parameter directly (``param``) or a target
Youden index (``target_J``), in which case the parameter is solved for.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize, special

from .basis import BasisSpec, get_basis
from .errors import ConfigError

__all__ = [
    "DEFAULT_SEED",
    "FAMILIES",
    "LLOD_TABLE",
    "SimScenario",
    "Truth",
    "builtin_scenario",
    "load_scenario",
    "scenario_from_dict",
    "solve_param",
    "truth",
]

DEFAULT_SEED = 20211018
FAMILIES = ("gamma", "lognormal")
METHODS = ("drm", "ecdf")

GAMMA_SHAPE = 2.0
GAMMA_RATE0 = 0.5
LN_MU0, LN_SD0, LN_SD1 = 2.5, 0.3, 0.5

# 15% and 30% quantiles of the healthy distribution, as tabulated to two decimals
LLOD_TABLE = {
    "gamma": {"q15": 1.37, "q30": 2.19},
    "lognormal": {"q15": 8.93, "q30": 10.41},
}

DEFAULT_BASIS = {"gamma": "linear", "lognormal": "log-quadratic"}


@dataclass(frozen=True)
class Truth:
    J: float
    c: float
    F0_c: float
    F1_c: float


def _gamma_cdf(x: float, rate: float) -> float:
    return float(special.gammainc(GAMMA_SHAPE, rate * x))


def _gamma_truth(eta: float) -> Truth:
    if not 0.0 < eta < GAMMA_RATE0:
        raise ConfigError(f"gamma parameter eta must lie in (0, {GAMMA_RATE0}), got {eta!r}")
    # shape-2 log density ratio: 2 log(eta/0.5) - (eta - 0.5) x = 0
    c = GAMMA_SHAPE * math.log(GAMMA_RATE0 / eta) / (GAMMA_RATE0 - eta)
    F0 = _gamma_cdf(c, GAMMA_RATE0)
    F1 = _gamma_cdf(c, eta)
    return Truth(F0 - F1, c, F0, F1)


def _lognormal_truth(mu: float) -> Truth:
    if not math.isfinite(mu):
        raise ConfigError(f"lognormal parameter mu must be finite, got {mu!r}")
    s0, s1 = LN_SD0, LN_SD1
    # log f1 - log f0 on z = log x, as a z^2 + b z + k = 0
    a = 1.0 / (2 * s0**2) - 1.0 / (2 * s1**2)
    b = mu / s1**2 - LN_MU0 / s0**2
    k = LN_MU0**2 / (2 * s0**2) - mu**2 / (2 * s1**2) + math.log(s0 / s1)
    disc = b * b - 4 * a * k
    if disc < 0:
        raise ConfigError(f"lognormal densities do not cross for mu={mu!r}")
    roots = [(-b - math.sqrt(disc)) / (2 * a), (-b + math.sqrt(disc)) / (2 * a)]

    def h(z: float) -> tuple[float, float, float]:
        F0 = float(special.ndtr((z - LN_MU0) / s0))
        F1 = float(special.ndtr((z - mu) / s1))
        return F0 - F1, F0, F1

    z = max(roots, key=lambda r: h(r)[0])
    J, F0, F1 = h(z)
    return Truth(J, math.exp(z), F0, F1)


def truth(family: str, param: float) -> Truth:
    """True Youden index, optimal cutoff, and the two CDFs at the cutoff."""
    if family == "gamma":
        return _gamma_truth(param)
    if family == "lognormal":
        return _lognormal_truth(param)
    raise ConfigError(f"unknown family {family!r}; expected one of {FAMILIES}")


_BRACKETS = {"gamma": (1e-6, GAMMA_RATE0 - 1e-9), "lognormal": (LN_MU0, LN_MU0 + 10.0)}


def solve_param(family: str, target_J: float) -> float:
    """Family parameter whose true Youden index equals ``target_J``."""
    if family not in _BRACKETS:
        raise ConfigError(f"unknown family {family!r}; expected one of {FAMILIES}")
    lo, hi = _BRACKETS[family]

    def f(t: float) -> float:
        return truth(family, t).J - target_J

    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        reachable = sorted((flo + target_J, fhi + target_J))
        raise ConfigError(
            f"target_J={target_J!r} is not reachable in the {family} family "
            f"(range about {reachable[0]:.3f} to {reachable[1]:.3f})"
        )
    return float(optimize.brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200))


@dataclass(frozen=True)
class SimScenario:
    """Everything needed to run one Monte Carlo design point."""

    family: str
    param: float
    n0: int
    n1: int
    llod_spec: str | float = "none"
    basis: BasisSpec = field(default_factory=lambda: get_basis("linear"))
    reps: int = 1000
    level: float = 0.95
    seed: int = DEFAULT_SEED
    bootstrap_B: int = 1000
    methods: tuple[str, ...] = METHODS
    name: str = ""
    target_J: float | None = None
    true_J: float = field(init=False)
    true_c: float = field(init=False)

    def __post_init__(self) -> None:
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        for attr in ("n0", "n1", "reps", "seed", "bootstrap_B"):
            v = getattr(self, attr)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ConfigError(f"{attr} must be an integer, got {v!r}")
        if self.n0 < 2 or self.n1 < 2:
            raise ConfigError("n0 and n1 must both be at least 2")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit nonnegative integer")
        if not 0.0 < self.level < 1.0:
            raise ConfigError(f"level must lie in (0, 1), got {self.level!r}")
        if self.bootstrap_B != 0 and self.bootstrap_B < 100:
            raise ConfigError("bootstrap_B must be 0 (no comparator intervals) or at least 100")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ConfigError(f"methods must be a nonempty subset of {list(METHODS)}, got {list(self.methods)}")
        if isinstance(self.llod_spec, str):
            if self.llod_spec not in ("none", "q15", "q30"):
                raise ConfigError(f"llod must be 'none', 'q15', 'q30' or a number, got {self.llod_spec!r}")
        elif not isinstance(self.llod_spec, (int, float)) or math.isnan(self.llod_spec):
            raise ConfigError(f"llod must be 'none', 'q15', 'q30' or a number, got {self.llod_spec!r}")
        t = truth(self.family, self.param)
        if not t.J > 0:
            raise ConfigError("the scenario has true J <= 0; relative bias is undefined")
        object.__setattr__(self, "true_J", t.J)
        object.__setattr__(self, "true_c", t.c)
        if not self.name:
            object.__setattr__(self, "name", f"{self.family}_param{self.param:.6g}_{self.n0}_{self.n1}")

    @property
    def llod(self) -> float:
        return resolve_llod(self)

    def truth(self) -> Truth:
        return truth(self.family, self.param)

    def to_dict(self) -> dict:
        """JSON-ready description, including the derived truth."""
        llod = self.llod
        return {
            "name": self.name,
            "family": self.family,
            "param": self.param,
            "target_J": self.target_J,
            "n0": self.n0,
            "n1": self.n1,
            "llod_spec": self.llod_spec,
            "llod": None if llod == -math.inf else llod,
            "basis": self.basis.name,
            "reps": self.reps,
            "level": self.level,
            "seed": self.seed,
            "bootstrap_B": self.bootstrap_B,
            "methods": list(self.methods),
            "true_J": self.true_J,
            "true_c": self.true_c,
        }


def resolve_llod(scenario: SimScenario) -> float:
    """The detection limit r: -inf for 'none', the tabulated quantile, or the number given."""
    spec = scenario.llod_spec
    if isinstance(spec, str):
        if spec == "none":
            return -math.inf
        return LLOD_TABLE[scenario.family][spec]
    return float(spec)


_CONFIG_KEYS = {
    "name", "family", "param", "target_J", "n0", "n1", "llod", "basis",
    "reps", "level", "seed", "bootstrap_B", "methods",
}


def scenario_from_dict(cfg: dict) -> SimScenario:
    """Build a scenario from a parsed config mapping."""
    if not isinstance(cfg, dict):
        raise ConfigError("scenario config must be a JSON object")
    unknown = sorted(set(cfg) - _CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown scenario field(s): {', '.join(unknown)}")
    for key in ("family", "n0", "n1"):
        if key not in cfg:
            raise ConfigError(f"scenario config is missing required field {key!r}")
    family = cfg["family"]
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; expected one of {FAMILIES}")
    has_param, has_target = "param" in cfg, "target_J" in cfg
    if has_param == has_target:
        raise ConfigError("give exactly one of 'param' and 'target_J'")
    target = cfg.get("target_J")
    if has_target:
        if not isinstance(target, (int, float)) or isinstance(target, bool) or not 0 < target < 1:
            raise ConfigError(f"target_J must be a number in (0, 1), got {target!r}")
        param = solve_param(family, float(target))
    else:
        param = cfg["param"]
        if not isinstance(param, (int, float)) or isinstance(param, bool):
            raise ConfigError(f"param must be a number, got {param!r}")
        param = float(param)
    llod = cfg.get("llod", "none")
    if llod is None:
        llod = "none"
    if isinstance(llod, str) and llod.strip().lower() in ("-inf", "-infinity"):
        llod = "none"
    try:
        basis = get_basis(cfg.get("basis", DEFAULT_BASIS[family]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    methods = cfg.get("methods", list(METHODS))
    if isinstance(methods, str):
        methods = [m.strip() for m in methods.split(",")]
    if not isinstance(methods, list):
        raise ConfigError("methods must be a list")
    return SimScenario(
        family=family,
        param=param,
        n0=cfg["n0"],
        n1=cfg["n1"],
        llod_spec=llod,
        basis=basis,
        reps=cfg.get("reps", 1000),
        level=float(cfg.get("level", 0.95)),
        seed=cfg.get("seed", DEFAULT_SEED),
        bootstrap_B=cfg.get("bootstrap_B", 1000),
        methods=tuple(methods),
        name=cfg.get("name", ""),
        target_J=None if target is None else float(target),
    )


_BUILTIN = re.compile(r"^(gamma|lognormal)_J(0\.[2468])_(\d+)_(\d+)_(nollod|q15|q30)$")


def builtin_scenario(name: str, **overrides) -> SimScenario:
    """Scenarios named like ``gamma_J0.4_200_200_nollod`` or ``lognormal_J0.6_50_150_q30``.

    Keyword overrides (``reps``, ``seed``, ``methods``, ...) replace the defaults.
    """
    m = _BUILTIN.match(name)
    if m is None:
        raise ConfigError(
            f"unknown built-in scenario {name!r}; expected "
            "'{gamma|lognormal}_J{0.2|0.4|0.6|0.8}_{n0}_{n1}_{nollod|q15|q30}'"
        )
    family, J, n0, n1, llod = m.groups()
    cfg = {
        "name": name,
        "family": family,
        "target_J": float(J),
        "n0": int(n0),
        "n1": int(n1),
        "llod": "none" if llod == "nollod" else llod,
    }
    cfg.update(overrides)
    return scenario_from_dict(cfg)


def load_scenario(spec: str | Path) -> SimScenario:
    """Load a scenario from a JSON file, or by built-in name when no such file exists."""
    path = Path(spec)
    if path.is_file():
        try:
            cfg = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from None
        except OSError as exc:
            raise ConfigError(f"{path}: {exc}") from None
        return scenario_from_dict(cfg)
    if _BUILTIN.match(str(spec)):
        return builtin_scenario(str(spec))
    raise ConfigError(f"{spec}: no such scenario file or built-in scenario name")
