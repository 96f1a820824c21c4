"""Select the kernel backend at import time.

The compiled extension is used when it imports; otherwise the numpy
fallback.  Set ``LATQRS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from latqrs import _kernels_py
from latqrs._kernels_py import SupportSizeError

if os.environ.get("LATQRS_PURE_PYTHON"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from latqrs import _kernels as kernels  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"


def available_backends():
    """Mapping of backend name to kernel module for every importable backend."""
    found = {"python": _kernels_py}
    try:
        from latqrs import _kernels  # type: ignore[attr-defined]

        found["cython"] = _kernels
    except ImportError:
        pass
    return found


__all__ = ["BACKEND", "SupportSizeError", "available_backends", "kernels"]
