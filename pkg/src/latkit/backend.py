"""Walk backend selection.

The compiled kernel is used when it imported successfully and the
LATKIT_PURE environment variable is not set to "1"; otherwise the pure
Python walk runs.  Both produce bit-identical results, the kernel is just
fast.
"""
from __future__ import annotations

import os

try:
    from . import _kernel
except ImportError:  # extension not built; pure fallback
    _kernel = None


def kernel_available() -> bool:
    return _kernel is not None


def default_backend() -> str:
    if os.environ.get("LATKIT_PURE") == "1" or _kernel is None:
        return "python"
    return "cython"


def get_kernel():
    return _kernel
