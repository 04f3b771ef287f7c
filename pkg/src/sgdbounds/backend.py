"""Simulation backend selection.

Two interchangeable kernel implementations exist for the vector problems:

* ``numpy`` — vectorized across seeds, pure numpy, always available;
* ``numba`` — per-seed compiled kernels (``nogil``, thread-parallel across
  seeds), used when the ``numba`` package imports cleanly.

The environment variable ``SGDBOUNDS_NUMBA`` picks the path and is read at
call time, so a single process can flip backends between runs:

* ``"0"`` — force the numpy path;
* ``"1"`` — require numba (raise if it is not importable);
* unset/other — auto: numba when available, numpy otherwise.

Both backends consume identical pre-generated random draws, so they agree to
rounding (order-of-accumulation) error; each is bitwise deterministic with
itself.
"""

from __future__ import annotations

import os

__all__ = ["BACKEND_ENV", "have_numba", "active_backend"]

BACKEND_ENV = "SGDBOUNDS_NUMBA"

_HAVE_NUMBA: bool | None = None


def have_numba() -> bool:
    """True when the numba package imports successfully (cached)."""
    global _HAVE_NUMBA
    if _HAVE_NUMBA is None:
        try:
            import numba  # noqa: F401

            _HAVE_NUMBA = True
        except ImportError:
            _HAVE_NUMBA = False
    return _HAVE_NUMBA


def active_backend() -> str:
    """The backend the next simulation call will use: "numpy" or "numba"."""
    flag = os.environ.get(BACKEND_ENV)
    if flag == "0":
        return "numpy"
    if flag == "1":
        if not have_numba():
            raise RuntimeError(
                f"{BACKEND_ENV}=1 requires the numba package, which is not importable"
            )
        return "numba"
    return "numba" if have_numba() else "numpy"
