"""Backend selection for the stencil kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy implementation in ``_kernels_py`` is used.  ``PERMEAFLOW_KERNELS=python``
forces the fallback.
"""

import os

from . import _kernels_py

try:
    if os.environ.get("PERMEAFLOW_KERNELS", "").lower() == "python":
        raise ImportError("fallback forced by PERMEAFLOW_KERNELS")
    from . import _ckernels as _backend

    BACKEND = "cython"
except ImportError:
    _backend = _kernels_py
    BACKEND = "python"

gradient = _backend.gradient
divergence = _backend.divergence
laplacian = _backend.laplacian
face_average = _backend.face_average
advect = _backend.advect

NEUMANN = _kernels_py.NEUMANN
DIRICHLET = _kernels_py.DIRICHLET
PERIODIC = _kernels_py.PERIODIC


def backends() -> dict:
    """All importable backends by name (the fallback is always present)."""
    out = {"python": _kernels_py}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
