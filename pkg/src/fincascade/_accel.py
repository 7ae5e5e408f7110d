"""Backend selection for the hot numeric kernels.

The kernels in :mod:`fincascade._kernels` are written against the numpy
array API so the same source can run compiled under numba or interpreted
as plain numpy code.  Selection happens once at import time:

* ``FINCASCADE_NUMBA=0`` (or ``false``/``no``/``off``) forces the plain
  numpy path.
* anything else (including unset) uses numba when it imports cleanly and
  falls back to plain numpy when it does not.

``NUMBA_ENABLED`` records the outcome so callers can pick between
loop-shaped and vectorized variants of the same algorithm.
"""

import functools
import os

_FLAG = os.environ.get("FINCASCADE_NUMBA", "auto").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "no", "off")

NUMBA_ENABLED = False
if _WANT_NUMBA:
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised only without numba
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def _njit(*args, **kwargs):
        # Pass-through decorator so kernel sources import unchanged.
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            @functools.wraps(func)
            def inner(*a, **k):
                return func(*a, **k)

            return inner

        return wrap


def maybe_njit(func=None, **kwargs):
    """Apply ``numba.njit`` when the compiled path is active, otherwise
    return the function unchanged."""
    if func is not None:
        return _njit(**kwargs)(func) if NUMBA_ENABLED else func

    def deco(f):
        return _njit(**kwargs)(f) if NUMBA_ENABLED else f

    return deco
