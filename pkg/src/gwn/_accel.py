"""Numba acceleration switch.

Hot kernels in :mod:`gwn._kernels` exist in two versions: an ``@njit``
compiled one and a pure-numpy fallback.  Which one runs is decided here.

Set ``GWN_NO_NUMBA=1`` in the environment to force the numpy path (useful
on platforms without a working numba, and for the benchmark that compares
the two).  ``use_numba(flag)`` flips the choice at runtime; kernels look
the switch up through :func:`numba_enabled` on every call, so flipping it
affects subsequent calls immediately.
"""

from __future__ import annotations

import os

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    NUMBA_AVAILABLE = False

_env_off = os.environ.get("GWN_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")
_enabled = NUMBA_AVAILABLE and not _env_off


def numba_enabled() -> bool:
    return _enabled


def use_numba(flag: bool) -> bool:
    """Enable/disable the compiled kernels; returns the effective setting."""
    global _enabled
    _enabled = bool(flag) and NUMBA_AVAILABLE
    return _enabled


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if NUMBA_AVAILABLE:
        from numba import njit as _njit

        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(func):
        return func

    return wrap
