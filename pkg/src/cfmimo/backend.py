"""Kernel backend selection.

The compiled extension is preferred; the numpy fallback keeps the package
usable from a source tree without a C toolchain. ``CFMIMO_BACKEND=numpy``
forces the fallback (used by the benchmark and the equivalence tests).
"""

import os

from cfmimo import _kernels_py

if os.environ.get("CFMIMO_BACKEND", "").lower() in ("numpy", "python"):
    _impl = _kernels_py
else:
    try:
        from cfmimo import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND_NAME

singleslope_pathloss = _impl.singleslope_pathloss
threeslope_pathloss = _impl.threeslope_pathloss
singleslope_sums = _impl.singleslope_sums
threeslope_sums = _impl.threeslope_sums
beta_sums = _impl.beta_sums
cross_sums = _impl.cross_sums
weighted_gain = _impl.weighted_gain
