"""Step-kernel backends.

The compiled extension is preferred when it imported cleanly; the numpy
backend is always available.  MINTC_KERNEL=numpy|cython forces a choice
(forcing cython raises if the extension is missing).
"""

from __future__ import annotations

import os

from . import numpy_backend

try:
    from . import _lattice_cy as cython_backend

    HAVE_CYTHON = True
except ImportError:
    cython_backend = None
    HAVE_CYTHON = False

_FORCED = os.environ.get("MINTC_KERNEL")
if _FORCED not in (None, "", "numpy", "cython"):
    raise RuntimeError(f"MINTC_KERNEL must be 'numpy' or 'cython', got {_FORCED!r}")
if _FORCED == "cython" and not HAVE_CYTHON:
    raise RuntimeError("MINTC_KERNEL=cython but the compiled kernel is missing")

DEFAULT = "cython" if (HAVE_CYTHON and _FORCED != "numpy") else "numpy"


def get_backend(name: str | None = None):
    chosen = name or DEFAULT
    if chosen == "numpy":
        return numpy_backend
    if chosen == "cython":
        if not HAVE_CYTHON:
            raise RuntimeError("compiled kernel not available")
        return cython_backend
    raise ValueError(f"unknown backend {chosen!r}")
