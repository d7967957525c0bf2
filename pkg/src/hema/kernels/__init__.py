"""Block-tridiagonal KKT factor/solve kernels.

The interior-point solver spends essentially all of its time factorising
and back-solving a symmetric block-tridiagonal KKT system (one 6x6 block
per horizon stage).  Two interchangeable implementations exist:

* ``numba_backend`` - @njit kernels with a hand-rolled pivoted LU per block
  (the default when numba imports cleanly),
* ``numpy_backend``  - the same block-Thomas recursion in plain numpy.

Selection: environment variable ``HEMA_BACKEND`` set to ``numba``,
``numpy`` or ``auto`` (default).  ``auto`` prefers numba and silently falls
back to numpy when numba is unavailable; asking explicitly for numba when
it cannot be imported raises.

Both backends expose:

    factor(diag, sub) -> opaque factorisation (consumes/overwrites `diag`)
    solve(fact, sub, rhs) -> solution vector (rhs untouched)

with diag (N, b, b) diagonal blocks, sub (N, b, b) sub-diagonal blocks
(sub[0] ignored), rhs (N*b,).
"""

from __future__ import annotations

import os

from . import numpy_backend

_CHOICE = os.environ.get("HEMA_BACKEND", "auto").strip().lower()

if _CHOICE not in ("auto", "numba", "numpy"):
    raise ValueError(f"HEMA_BACKEND must be auto|numba|numpy, got {_CHOICE!r}")

_numba_backend = None
if _CHOICE in ("auto", "numba"):
    try:
        from . import numba_backend as _numba_backend
    except ImportError:
        if _CHOICE == "numba":
            raise


def get_backend(name: str | None = None):
    """Return a backend module by name, or the environment-selected default."""
    if name is None:
        name = "numba" if _numba_backend is not None else "numpy"
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        if _numba_backend is None:
            from . import numba_backend  # raise the real ImportError
            raise AssertionError("unreachable")
        return _numba_backend
    raise ValueError(f"unknown backend {name!r}")


def backend_name() -> str:
    """Name of the backend the solver will use by default."""
    return get_backend().NAME


_default = get_backend()
factor = _default.factor
solve = _default.solve
