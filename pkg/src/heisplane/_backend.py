"""Select the compiled kernel core when available, else the NumPy fallback.

Set ``HEIS_PLANE_BACKEND=python`` to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("HEIS_PLANE_BACKEND", "").lower() == "python":
    _impl = _kernels_py
    NAME = "python"
else:
    try:
        from . import _ckernels as _impl
        NAME = "cython"
    except ImportError:
        _impl = _kernels_py
        NAME = "python"

axis_kernels = _impl.axis_kernels
bump_terms = _impl.bump_terms
bump_sums = _impl.bump_sums
N_KERNEL_COLS = _kernels_py.N_KERNEL_COLS
N_BUMP_COLS = _kernels_py.N_BUMP_COLS
