"""Numba on/off switch.

The environment variable FRACLAYER_NO_NUMBA selects the pure-numpy fallback
path for every hot kernel (set it to anything but "" or "0").  The active
backend can also be overridden at runtime with ``set_backend``, which is what
the benchmark harness uses to time both paths in one process.
"""

from __future__ import annotations

import os

# the default TBB on this image is too old for numba; prefer omp quietly
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


HAVE_NUMBA = _numba_available()

_env = os.environ.get("FRACLAYER_NO_NUMBA", "").strip()
_DEFAULT_BACKEND = "numpy" if (_env not in ("", "0") or not HAVE_NUMBA) else "numba"
_backend = _DEFAULT_BACKEND


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    if name not in ("numba", "numpy"):
        raise ValueError(f"backend must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    global _backend
    _backend = name


def set_num_threads(n: int) -> None:
    """Cap numba's thread pool; silently ignored on the numpy path."""
    if HAVE_NUMBA:
        import numba

        numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))


if HAVE_NUMBA:
    from numba import njit, prange
else:  # pragma: no cover - exercised only on numba-free installs

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(f):
            return f

        return wrap

    prange = range
