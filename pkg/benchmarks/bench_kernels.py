"""Compare the numba and pure-numpy kernels.

Run with ``python benchmarks/bench_kernels.py``.  Both flavours are imported
directly, so the ``YOUDEN_DRM_DISABLE_NUMBA`` flag does not matter here.
Compilation happens in a warm-up call that is not timed.
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from youden_drm import _kernels as K
from youden_drm.basis import get_basis


def _best(fn, repeat: int, number: int) -> float:
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def _case(label: str, f_np, f_nb, args, repeat: int, number: int) -> None:
    r_np, r_nb = f_np(*args), f_nb(*args)  # warm-up and agreement check
    for a, b in zip(np.atleast_1d(r_np[0] if isinstance(r_np, tuple) else r_np),
                    np.atleast_1d(r_nb[0] if isinstance(r_nb, tuple) else r_nb)):
        assert np.allclose(a, b, rtol=1e-10, atol=1e-12, equal_nan=True), label
    t_np = _best(lambda: f_np(*args), repeat, number)
    t_nb = _best(lambda: f_nb(*args), repeat, number)
    print(f"{label:<34} numpy {t_np * 1e6:11.1f} us   numba {t_nb * 1e6:11.1f} us   speed-up {t_np / t_nb:6.1f}x")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    lin = get_basis("linear")
    lq = get_basis("log-quadratic")

    for m in (400, 40000):
        x = np.sort(rng.gamma(2.0, 2.0, m))
        lab = rng.random(m) < 0.5
        for basis in (lin, lq):
            Q = np.ascontiguousarray(basis.Q(x))
            theta = np.full(basis.p + 1, 0.1)
            u = Q @ theta
            number = 200 if m < 1000 else 5
            _case(f"dual_derivs m={m} {basis.name}", K.dual_derivs_np, K.dual_derivs_nb,
                  (u, Q, lab, 0.0), args.repeat, number)

    for n in (100, 2000):
        h = np.sort(rng.gamma(2.0, 2.0, n))
        d = np.sort(rng.gamma(2.0, 1 / 0.23, n))
        _case(f"ecdf_scan n0=n1={n}", K.ecdf_scan_np, K.ecdf_scan_nb, (h, d, 0, 0), args.repeat, 200)

    n, B = 100, 1000
    h_all = np.concatenate((np.full(15, -np.inf), rng.gamma(2.0, 2.0, n - 15)))
    d_all = rng.gamma(2.0, 1 / 0.23, n)
    idx0 = rng.integers(0, n, (B, n))
    idx1 = rng.integers(0, n, (B, n))
    _case(f"bootstrap_ecdf n={n} B={B}", K.bootstrap_ecdf_np, K.bootstrap_ecdf_nb,
          (h_all, d_all, idx0, idx1), args.repeat, 3)


if __name__ == "__main__":
    main()
