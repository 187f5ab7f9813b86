"""Pick the simulation kernels at import time.

The compiled module is used when it imports; ``PREDLIM_PURE_PYTHON=1`` forces
the numpy fallback (useful for debugging and for the backend benchmark).
"""

import os

from . import _fallback

if os.environ.get("PREDLIM_PURE_PYTHON", "") not in ("", "0"):
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _fallback
        BACKEND = "python"
    else:
        BACKEND = "cython"

fallback = _fallback
