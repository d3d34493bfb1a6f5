"""Numeric kernels, compiled when available.

The compiled extension ``_ckernels`` is preferred. Setting the environment
variable ``CAPPLAN_PURE_PYTHON=1`` before import forces the numpy fallback.
``BACKEND`` names the implementation actually in use.
"""

import os

from . import _pykernels

if os.environ.get("CAPPLAN_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = "cython" if _impl is not _pykernels else "python"

qr_reduce = _impl.qr_reduce
group_sum_count = _impl.group_sum_count
group_max = _impl.group_max


def available_backends():
    """Map backend name to kernel module for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
