"""Backend selection for the evaluation kernels.

Every hot kernel in :mod:`echoevo.kernels` exists twice: a numba-jitted
version and a pure numpy one with identical semantics. Which one runs is
decided once, at import time:

* ``ECHOEVO_BACKEND=numpy``   force the numpy fallback
* ``ECHOEVO_BACKEND=numba``   require numba, raise if it is missing
* unset                       numba when importable, numpy otherwise
"""

import os
import warnings

ENV_VAR = "ECHOEVO_BACKEND"

# numba's threading layer probing is chatty on machines without TBB;
# the fallback layers are fine for our workload.
warnings.filterwarnings("ignore", message=".*TBB.*")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _detect() -> str:
    requested = os.environ.get(ENV_VAR, "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise ValueError(
            f"{ENV_VAR} must be 'numba' or 'numpy', got {requested!r}"
        )
    if requested == "numpy":
        return "numpy"
    if _numba_available():
        return "numba"
    if requested == "numba":
        raise RuntimeError(f"{ENV_VAR}=numba but numba is not importable")
    return "numpy"


BACKEND = _detect()
HAS_NUMBA = _numba_available()
