"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``CODEDLF_BACKEND=python`` to force the fallback.
"""
import os

from . import _kernels_py

backend = _kernels_py
if os.environ.get("CODEDLF_BACKEND", "").lower() not in ("python", "py", "numpy"):
    try:
        from . import _kernels as backend  # noqa: F811
    except ImportError:
        backend = _kernels_py

BACKEND = backend.BACKEND
fill_rows = backend.fill_rows
sad_curve = backend.sad_curve
warp_rows = backend.warp_rows
masked_l1 = backend.masked_l1


def available_backends():
    """Modules implementing the kernel API that import in this environment."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
