"""Backend selection for the hot loops.

The compiled extension is used when it was built; setting ``ESYM_PURE_PYTHON=1``
forces the numpy fallback. Both expose the same functions.
"""

import os

from . import _fallback

if os.environ.get("ESYM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _fallback

BACKEND = _impl.BACKEND
signed_rank_prefix_sums = _impl.signed_rank_prefix_sums
signflip_tail_count = _impl.signflip_tail_count


def available_backends():
    """Map of backend name to kernel module, for cross-checking and benchmarks."""
    out = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
