"""Numba-accelerated block-Thomas kernels.

Each Schur-complement diagonal block is LU-factorised in place with partial
pivoting; factors are reused by the predictor and corrector solves of every
interior-point iteration.  fastmath stays off so results track the numpy
backend to rounding error.
"""

from __future__ import annotations

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def _lu_factor_inplace(a, piv):
    n = a.shape[0]
    for k in range(n):
        p = k
        amax = abs(a[k, k])
        for r in range(k + 1, n):
            v = abs(a[r, k])
            if v > amax:
                amax = v
                p = r
        piv[k] = p
        if p != k:
            for c in range(n):
                tmp = a[k, c]
                a[k, c] = a[p, c]
                a[p, c] = tmp
        akk = a[k, k]
        if akk == 0.0:
            # regularised KKT blocks should never be exactly singular
            akk = 1e-300
            a[k, k] = akk
        for r in range(k + 1, n):
            m = a[r, k] / akk
            a[r, k] = m
            for c in range(k + 1, n):
                a[r, c] -= m * a[k, c]


@njit(cache=True)
def _lu_solve_inplace(a, piv, x):
    n = a.shape[0]
    for k in range(n):
        p = piv[k]
        if p != k:
            tmp = x[k]
            x[k] = x[p]
            x[p] = tmp
    for k in range(n):
        s = x[k]
        for c in range(k):
            s -= a[k, c] * x[c]
        x[k] = s
    for k in range(n - 1, -1, -1):
        s = x[k]
        for c in range(k + 1, n):
            s -= a[k, c] * x[c]
        x[k] = s / a[k, k]


@njit(cache=True)
def _factor(diag, sub, piv):
    n, b = diag.shape[0], diag.shape[1]
    w = np.empty((b, b))
    col = np.empty(b)
    for i in range(n):
        if i > 0:
            # w = S_{i-1}^{-1} L_i^T, column by column
            for c in range(b):
                for r in range(b):
                    col[r] = sub[i, c, r]
                _lu_solve_inplace(diag[i - 1], piv[i - 1], col)
                for r in range(b):
                    w[r, c] = col[r]
            for r in range(b):
                for c in range(b):
                    acc = 0.0
                    for k in range(b):
                        acc += sub[i, r, k] * w[k, c]
                    diag[i, r, c] -= acc
        _lu_factor_inplace(diag[i], piv[i])


@njit(cache=True)
def _solve(lu, piv, sub, rhs, out):
    n, b = lu.shape[0], lu.shape[1]
    tmp = np.empty(b)
    for i in range(n):
        for r in range(b):
            out[i, r] = rhs[i * b + r]
    for i in range(1, n):
        for r in range(b):
            tmp[r] = out[i - 1, r]
        _lu_solve_inplace(lu[i - 1], piv[i - 1], tmp)
        for r in range(b):
            acc = 0.0
            for k in range(b):
                acc += sub[i, r, k] * tmp[k]
            out[i, r] -= acc
    _lu_solve_inplace(lu[n - 1], piv[n - 1], out[n - 1])
    for i in range(n - 2, -1, -1):
        for r in range(b):
            acc = 0.0
            for k in range(b):
                acc += sub[i + 1, k, r] * out[i + 1, k]
            out[i, r] -= acc
        _lu_solve_inplace(lu[i], piv[i], out[i])


def factor(diag, sub):
    """LU-factorised Schur blocks; overwrites `diag`, returns (lu, piv)."""
    diag = np.ascontiguousarray(diag)
    sub = np.ascontiguousarray(sub)
    piv = np.empty((diag.shape[0], diag.shape[1]), dtype=np.int64)
    _factor(diag, sub, piv)
    return diag, piv


def solve(fact, sub, rhs):
    lu, piv = fact
    sub = np.ascontiguousarray(sub)
    out = np.empty((lu.shape[0], lu.shape[1]))
    _solve(lu, piv, sub, np.ascontiguousarray(rhs), out)
    return out.reshape(-1)
