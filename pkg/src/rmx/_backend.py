"""Kernel backend selection.

Hot kernels ship in two variants: a numba @njit build and a pure-NumPy
fallback. Set RMX_NUMBA=0 to force the fallback; anything else (or the
variable unset) uses numba when it is importable. The flag is read once
at import time.
"""

import os


def _numba_wanted() -> bool:
    flag = os.environ.get("RMX_NUMBA", "").strip().lower()
    return flag not in {"0", "false", "off", "no"}


try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but be safe
    NUMBA_AVAILABLE = False

NUMBA_ENABLED = NUMBA_AVAILABLE and _numba_wanted()


def active_backend() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"
