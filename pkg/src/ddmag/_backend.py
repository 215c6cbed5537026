"""Runtime selection of the accelerated kernel path.

The hot numeric kernels in :mod:`ddmag._kernels` exist in two flavours: a
numba ``@njit`` implementation and a vectorised pure-numpy fallback.  Which
one backs the public kernel names is decided once, at import time:

* ``DDMAG_BACKEND=numpy``  forces the numpy fallback,
* ``DDMAG_BACKEND=numba``  requires numba (ImportError if missing),
* unset                    uses numba when importable, numpy otherwise.

Everything outside the kernels (measurement sampling, linear algebra,
closed-form evaluation) is plain numpy and unaffected by this switch.
"""

import os

_FLAG = os.environ.get("DDMAG_BACKEND", "").strip().lower()
if _FLAG not in ("", "numba", "numpy"):
    raise RuntimeError(
        f"DDMAG_BACKEND must be 'numba' or 'numpy', got {_FLAG!r}"
    )

if _FLAG == "numpy":
    HAS_NUMBA = False
    _REASON = "disabled via DDMAG_BACKEND=numpy"
else:
    try:
        import numba

        HAS_NUMBA = True
        _REASON = f"numba {numba.__version__}"
    except ImportError:
        if _FLAG == "numba":
            raise
        HAS_NUMBA = False
        _REASON = "numba not importable"


def backend_name() -> str:
    """Name of the active kernel backend, ``'numba'`` or ``'numpy'``."""
    return "numba" if HAS_NUMBA else "numpy"


def backend_detail() -> str:
    """Human-readable description of how the backend was chosen."""
    return f"{backend_name()} ({_REASON})"
