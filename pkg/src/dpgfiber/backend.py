"""Backend selection for the hot integration kernels.

Two lanes exist for every kernel: a numba ``@njit`` version and a pure-numpy
fallback.  The lane is chosen once at import time from the environment
variable ``DPGFIBER_BACKEND``:

    auto   (default)  use numba if it imports, else numpy
    numba             require numba, fail loudly if missing
    numpy             force the pure-numpy fallback

``dpgfiber.bench`` compares the two lanes on representative element work.
"""

import os

_choice = os.environ.get("DPGFIBER_BACKEND", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(f"DPGFIBER_BACKEND must be auto|numba|numpy, got {_choice!r}")

USE_NUMBA = False
if _choice in ("auto", "numba"):
    try:
        import numba  # noqa: F401

        USE_NUMBA = True
    except ImportError:
        if _choice == "numba":
            raise


def njit(*args, **kwargs):
    """``numba.njit`` when the numba lane is active, identity otherwise."""
    if USE_NUMBA:
        import numba

        return numba.njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]

    def wrap(fn):
        return fn

    return wrap
