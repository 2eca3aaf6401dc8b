"""Select the compiled core when available, else the pure-Python kernels.

Set ``ALPHADPP_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pure

if os.environ.get("ALPHADPP_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pure
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _pure

BACKEND = "compiled" if _impl is not _pure else "python"

det_alpha_dp = _impl.det_alpha_dp
projection_dpp_batch = _impl.projection_dpp_batch


def available_backends():
    """Map backend name to kernel module for every importable backend."""
    found = {"python": _pure}
    try:
        from . import _core
    except ImportError:
        pass
    else:
        found["compiled"] = _core
    return found
