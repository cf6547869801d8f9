"""Backend switch for the hot loops in :mod:`torusns.kernels`.

The compiled path uses numba ``@njit``; the fallback is vectorised numpy.
Select with the environment variable ``TORUSNS_BACKEND`` (``numba`` or
``numpy``). When numba cannot be imported the numpy path is used regardless.
"""

import os

try:
    import numba
    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

_ENV_VAR = "TORUSNS_BACKEND"
_VALID = ("numba", "numpy")


def _initial_backend():
    requested = os.environ.get(_ENV_VAR, "numba").strip().lower()
    if requested not in _VALID:
        raise ValueError(f"{_ENV_VAR} must be one of {_VALID}, got {requested!r}")
    if requested == "numba" and not HAS_NUMBA:
        return "numpy"
    return requested


_backend = _initial_backend()


def get_backend():
    return _backend


def set_backend(name):
    """Switch backend at runtime (used by tests and the benchmark)."""
    global _backend
    name = name.lower()
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}")
    if name == "numba" and not HAS_NUMBA:
        raise RuntimeError("numba is not importable")
    _backend = name


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity otherwise."""
    if HAS_NUMBA:
        return numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda fn: fn
