"""Kernel backend selection.

The compiled extension ``_kernels`` is used when it imports; otherwise, or
when the environment variable ``CCBALL_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the numpy fallback ``_kernels_py`` is used.  Both
expose the same functions with the same signatures.
"""
from __future__ import annotations

import os

from . import _kernels_py


def _load():
    if os.environ.get("CCBALL_PURE_PYTHON", "") not in ("", "0"):
        return _kernels_py
    try:
        from . import _kernels
    except ImportError:
        return _kernels_py
    return _kernels


kernels = _load()
BACKEND = kernels.NAME


def available_backends():
    """Mapping of backend name to module for every importable backend."""
    out = {_kernels_py.NAME: _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        return out
    out[_kernels.NAME] = _kernels
    return out
