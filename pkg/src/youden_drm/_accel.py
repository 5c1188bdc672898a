"""Numba availability switch.

Set ``YOUDEN_DRM_DISABLE_NUMBA=1`` to force the pure-numpy kernels, e.g. for
debugging or on platforms where numba is broken.  The flag is read once at
import time.
"""

from __future__ import annotations

import os
from typing import Any, Callable

ENV_FLAG = "YOUDEN_DRM_DISABLE_NUMBA"


def _disabled_by_env() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


try:
    import numba as _numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _disabled_by_env()


def njit(*args: Any, **kwargs: Any) -> Callable:
    """``numba.njit(cache=True)`` when numba is importable, identity otherwise.

    Kernels are always compiled when numba exists so the benchmark can compare
    both paths; ``USE_NUMBA`` only decides which one the library dispatches to.
    """
    kwargs.setdefault("cache", True)
    if _numba is None:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return _numba.njit(*args, **kwargs)
