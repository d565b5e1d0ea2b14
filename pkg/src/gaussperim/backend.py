"""Select the compiled radial kernel when it was built, else the numpy one.

Set ``GAUSSPERIM_BACKEND=python`` to force the fallback.
"""
from __future__ import annotations

import os

from . import _core_py

NAME = "python"
radial_integrate = _core_py.radial_integrate

if os.environ.get("GAUSSPERIM_BACKEND", "").lower() != "python":
    try:
        from . import _core  # type: ignore[attr-defined]
    except ImportError:
        pass
    else:
        NAME = "cython"
        radial_integrate = _core.radial_integrate


def implementations():
    """All importable implementations, keyed by name."""
    impls = {"python": _core_py.radial_integrate}
    try:
        from . import _core  # type: ignore[attr-defined]
    except ImportError:
        return impls
    impls["cython"] = _core.radial_integrate
    return impls
