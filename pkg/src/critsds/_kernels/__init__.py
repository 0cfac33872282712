"""Kernel backend selection.

Imports the compiled extension when available, otherwise the numpy
fallback.  `CRITSDS_BACKEND=python|compiled` forces a choice (useful for
the benchmark and the cross-backend equivalence tests).
"""

from __future__ import annotations

import os

from . import pyfallback

_choice = os.environ.get("CRITSDS_BACKEND", "")

if _choice == "python":
    backend = pyfallback
elif _choice == "compiled":
    from . import _core as backend  # hard failure if forced but missing
else:
    try:
        from . import _core as backend
    except ImportError:
        backend = pyfallback

BACKEND_NAME: str = backend.BACKEND_NAME


def get_backend(name: str | None = None):
    """Return a kernel module by name (None = the active one)."""
    if name is None:
        return backend
    if name == "python":
        return pyfallback
    if name == "compiled":
        from . import _core
        return _core
    raise ValueError(f"unknown backend {name!r}")
