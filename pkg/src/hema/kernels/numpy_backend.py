"""Pure-numpy block-Thomas factor/solve for symmetric block-tridiagonal systems.

Same recursion as the numba backend; per-block linear algebra goes through
np.linalg.solve.  Slower (Python-level stage loop) but dependency-free and
used as the reference implementation in tests.
"""

from __future__ import annotations

import numpy as np

NAME = "numpy"


def factor(diag, sub):
    """Schur-complement sweep: S_0 = D_0, S_i = D_i - L_i S_{i-1}^{-1} L_i^T.

    `diag` is overwritten with the S_i blocks and returned as the
    factorisation object.
    """
    n = diag.shape[0]
    for i in range(1, n):
        w = np.linalg.solve(diag[i - 1], sub[i].T)
        diag[i] -= sub[i] @ w
    return diag


def solve(fact, sub, rhs):
    """Forward/backward block sweep for K x = rhs given factor() output."""
    n, b = fact.shape[0], fact.shape[1]
    t = rhs.reshape(n, b).copy()
    for i in range(1, n):
        t[i] -= sub[i] @ np.linalg.solve(fact[i - 1], t[i - 1])
    x = t
    x[n - 1] = np.linalg.solve(fact[n - 1], x[n - 1])
    for i in range(n - 2, -1, -1):
        x[i] = np.linalg.solve(fact[i], x[i] - sub[i + 1].T @ x[i + 1])
    return x.reshape(-1)
