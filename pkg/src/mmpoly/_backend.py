"""Kernel selection: the compiled core when importable, numpy otherwise.

Set MMPOLY_PURE_PYTHON=1 to force the fallback.
"""
import os

BACKEND = "python"
if os.environ.get("MMPOLY_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = None
else:
    kernels = None

if kernels is None:
    from . import _pycore as kernels

from . import _pycore as pykernels  # noqa: E402

__all__ = ["kernels", "pykernels", "BACKEND"]
