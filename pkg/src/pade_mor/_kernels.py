"""Kernel backend selection.

The compiled extension is used when it imports; setting ``PADE_MOR_PURE=1``
forces the numpy fallback (used by the benchmark and the twin tests).
"""

import os

from . import _bandlu_py

BACKEND = "python"

if os.environ.get("PADE_MOR_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _bandlu as _compiled
    except ImportError:  # extension not built
        _compiled = None
else:
    _compiled = None

if _compiled is not None:
    band_lu_factor = _compiled.band_lu_factor
    band_lu_solve = _compiled.band_lu_solve
    BACKEND = "cython"
else:
    band_lu_factor = _bandlu_py.band_lu_factor
    band_lu_solve = _bandlu_py.band_lu_solve


def available_backends():
    """Names of the kernel implementations importable in this environment."""
    names = ["python"]
    try:
        from . import _bandlu  # noqa: F401
    except ImportError:
        return names
    return ["cython"] + names


def get_backend(name):
    """Return ``(factor, solve)`` for an explicit backend name."""
    if name == "python":
        return _bandlu_py.band_lu_factor, _bandlu_py.band_lu_solve
    if name == "cython":
        from . import _bandlu
        return _bandlu.band_lu_factor, _bandlu.band_lu_solve
    raise ValueError(f"unknown kernel backend {name!r}")
