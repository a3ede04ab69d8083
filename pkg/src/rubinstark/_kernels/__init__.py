"""Integer matrix kernels: Hermite/Smith forms, determinants, nullspaces.

Two interchangeable backends live here:

* ``_pure``  -- plain Python, always available, the reference implementation;
* ``_fast``  -- a Cython transliteration built at install time when a C
  compiler is present.  Same signatures, bit-identical outputs.

The compiled backend is preferred when importable.  Set ``RUBINSTARK_PURE=1``
in the environment to force the pure backend (used by the benchmark and by
the equivalence tests).
"""

import os

from . import _pure

if os.environ.get("RUBINSTARK_PURE") == "1":
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _fast as _impl  # type: ignore[attr-defined]

        BACKEND = "fast"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"

hnf = _impl.hnf
snf = _impl.snf
det_int = _impl.det_int
int_kernel = _impl.int_kernel
mat_mul = _impl.mat_mul
content_gcd = _impl.content_gcd

__all__ = [
    "BACKEND",
    "hnf",
    "snf",
    "det_int",
    "int_kernel",
    "mat_mul",
    "content_gcd",
]
