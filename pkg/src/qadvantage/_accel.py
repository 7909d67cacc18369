"""Backend selection for the numeric kernels.

Set ``QADVANTAGE_DISABLE_NUMBA=1`` to force the pure-numpy path. The flag is
read once, at import time.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

NUMBA_DISABLED = os.environ.get("QADVANTAGE_DISABLE_NUMBA", "").strip().lower() not in _FALSY

USE_NUMBA = HAVE_NUMBA and not NUMBA_DISABLED
BACKEND = "numba" if USE_NUMBA else "numpy"
