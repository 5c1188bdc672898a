"""Basis functions q(x) for the density ratio model.

The tilt between the diseased and healthy densities is
``exp(alpha + beta @ q(x))``; the augmented vector ``Q(x) = (1, q(x))``
absorbs the intercept.  All evaluators are vectorised: a scalar input gives
a 1-d result, an array of ``n`` points gives an ``(n, p)`` or ``(n, p + 1)``
matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError

__all__ = [
    "BasisSpec",
    "LINEAR",
    "LOG_QUADRATIC",
    "X_LOGX",
    "custom_basis",
    "eval_Q",
    "eval_q",
    "eval_qdot",
    "get_basis",
]

VectorFn = Callable[[NDArray[np.float64]], NDArray[np.float64]]


@dataclass(frozen=True)
class BasisSpec:
    """Prespecified basis ``q`` with its derivative and admissible domain.

    ``q`` and ``qdot`` map a 1-d float array of length ``n`` to an array of
    shape ``(n, p)`` (or ``(n,)`` when ``p == 1``).  Points must satisfy
    ``x > domain_lower``.
    """

    name: str
    p: int
    domain_lower: float
    q_fn: VectorFn
    qdot_fn: VectorFn

    def __post_init__(self) -> None:
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"basis dimension p must be a positive integer, got {self.p}")

    def check_domain(self, x: NDArray[np.float64]) -> None:
        bad = ~(x > self.domain_lower)
        if np.any(bad):
            first = float(x[np.argmax(bad)])
            raise DomainError(
                f"basis '{self.name}' requires x > {self.domain_lower}; got {first}"
            )

    def _apply(self, fn: VectorFn, x: ArrayLike, what: str) -> NDArray[np.float64]:
        arr = np.asarray(x, dtype=np.float64)
        scalar = arr.ndim == 0
        flat = np.atleast_1d(arr).ravel()
        self.check_domain(flat)
        out = np.asarray(fn(flat), dtype=np.float64)
        if out.ndim == 1 and self.p == 1:
            out = out[:, None]
        if out.shape != (flat.size, self.p):
            raise ValueError(
                f"basis '{self.name}' {what} returned shape {out.shape}, "
                f"expected {(flat.size, self.p)}"
            )
        return out[0] if scalar else out

    def q(self, x: ArrayLike) -> NDArray[np.float64]:
        return self._apply(self.q_fn, x, "q")

    def qdot(self, x: ArrayLike) -> NDArray[np.float64]:
        return self._apply(self.qdot_fn, x, "qdot")

    def Q(self, x: ArrayLike) -> NDArray[np.float64]:
        qx = self.q(x)
        if qx.ndim == 1:
            return np.concatenate(([1.0], qx))
        return np.hstack((np.ones((qx.shape[0], 1)), qx))


def _lin_q(x):
    return x[:, None]


def _lin_qdot(x):
    return np.ones((x.size, 1))


def _lq_q(x):
    lx = np.log(x)
    return np.column_stack((lx, lx * lx))


def _lq_qdot(x):
    lx = np.log(x)
    return np.column_stack((1.0 / x, 2.0 * lx / x))


def _xl_q(x):
    return np.column_stack((x, np.log(x)))


def _xl_qdot(x):
    return np.column_stack((np.ones_like(x), 1.0 / x))


LINEAR = BasisSpec("linear", 1, -math.inf, _lin_q, _lin_qdot)
LOG_QUADRATIC = BasisSpec("log-quadratic", 2, 0.0, _lq_q, _lq_qdot)
X_LOGX = BasisSpec("x-logx", 2, 0.0, _xl_q, _xl_qdot)

_BUILTIN = {
    "linear": LINEAR,
    "log-quadratic": LOG_QUADRATIC,
    "loglog": LOG_QUADRATIC,
    "x-logx": X_LOGX,
    "xlogx": X_LOGX,
}

# canonical CLI spelling for each built-in
CLI_NAMES = {"linear": "linear", "log-quadratic": "loglog", "x-logx": "xlogx"}


def get_basis(name: str) -> BasisSpec:
    """Look up a built-in basis by its canonical or CLI name."""
    try:
        return _BUILTIN[name.lower()]
    except KeyError:
        raise ValueError(
            f"unknown basis '{name}'; choose from linear, loglog, xlogx"
        ) from None


def custom_basis(
    q: VectorFn, qdot: VectorFn, p: int, domain_lower: float = -math.inf, name: str = "custom"
) -> BasisSpec:
    """Wrap user callables as a basis. Output shapes are checked on every call."""
    return BasisSpec(name, int(p), float(domain_lower), q, qdot)


def eval_Q(basis: BasisSpec, x: ArrayLike) -> NDArray[np.float64]:
    return basis.Q(x)


def eval_q(basis: BasisSpec, x: ArrayLike) -> NDArray[np.float64]:
    return basis.q(x)


def eval_qdot(basis: BasisSpec, x: ArrayLike) -> NDArray[np.float64]:
    return basis.qdot(x)
