"""Backend selection for the hot kernels.

The compiled extension ``_kernels`` is preferred; the pure-Python module
``_pykernels`` is used when the extension is missing or when the
environment variable ``OSCIBIF_PURE_PYTHON`` is set to a non-empty value.
"""

import os

from . import _pykernels

try:
    if os.environ.get("OSCIBIF_PURE_PYTHON"):
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _impl

    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

radicand = _impl.radicand
shoot_dp45 = _impl.shoot_dp45

__all__ = ["BACKEND", "radicand", "shoot_dp45"]
