"""Cholesky factors of correlation matrices from unbounded coordinates.

Coordinates map through tanh to canonical partial correlations z, and

    L[0, 0] = 1
    L[i, j] = z_ij * sqrt(1 - sum_{k<j} L[i, k]^2)    (j < i)
    L[i, i] = sqrt(1 - sum_{k<i} L[i, k]^2)

so every row has unit norm. Tangents are carried alongside the values so
the Jacobian dL/dy is exact.
"""

from __future__ import annotations

import numpy as np
from scipy.special import betaln

from bdarch._jit import jit


@jit
def corr_cholesky(y, d):
    """Factor L, log|Jacobian|, dL/dy (d, d, n) and d log|J| / dy."""
    n = y.shape[0]
    L = np.zeros((d, d))
    dL = np.zeros((d, d, n))
    glogj = np.zeros(n)
    logj = 0.0
    L[0, 0] = 1.0
    k = 0
    for i in range(1, d):
        # rem = 1 - sum of squares so far, kept as a product of (1 - z^2)
        # factors so it never rounds to zero
        rem = 1.0
        dss = np.zeros(n)
        for j in range(i):
            z = np.tanh(y[k])
            ch = np.cosh(y[k])
            dz = 1.0 / (ch * ch)
            logj += np.log(dz)
            glogj[k] += -2.0 * z
            sq = np.sqrt(rem)
            L[i, j] = z * sq
            # tangent: d(z sqrt(rem)) = dz sqrt(rem) + z d(rem) / (2 sqrt(rem))
            for c in range(n):
                dL[i, j, c] = z * (-dss[c]) / (2.0 * sq)
            dL[i, j, k] += dz * sq
            if j > 0:
                logj += 0.5 * np.log(rem)
                for c in range(n):
                    glogj[c] += 0.5 * (-dss[c]) / rem
            for c in range(n):
                dss[c] += 2.0 * L[i, j] * dL[i, j, c]
            rem *= dz
            k += 1
        L[i, i] = np.sqrt(rem)
        for c in range(n):
            dL[i, i, c] = -dss[c] / (2.0 * L[i, i])
    return L, logj, dL, glogj


def corr_cholesky_inv(L: np.ndarray) -> np.ndarray:
    """Unbounded coordinates reproducing a given correlation Cholesky factor."""
    d = L.shape[0]
    out = []
    for i in range(1, d):
        ss = 0.0
        for j in range(i):
            z = L[i, j] / np.sqrt(1.0 - ss)
            out.append(np.arctanh(z))
            ss += L[i, j] ** 2
    return np.array(out)


def lkj_log_norm(shape: float, d: int) -> float:
    """log of the LKJ normalizing constant for d x d correlation matrices."""
    out = 0.0
    for i in range(1, d):
        b = shape + (d - 1 - i) / 2.0
        out += (2.0 * shape - 2.0 + d - i) * (d - i) * np.log(2.0) + (d - i) * betaln(b, b)
    return out


def lkj_cholesky_logpdf(L: np.ndarray, shape: float) -> float:
    """Density of the Cholesky factor induced by LKJ(shape) on L L'."""
    d = L.shape[0]
    if d < 2:
        return 0.0
    i = np.arange(1, d)
    coef = d - i - 1 + 2.0 * shape - 2.0
    return float(np.sum(coef * np.log(np.diag(L)[1:]))) - lkj_log_norm(shape, d)


def lkj_cholesky_grad(L: np.ndarray, shape: float) -> np.ndarray:
    d = L.shape[0]
    g = np.zeros((d, d))
    for i in range(1, d):
        g[i, i] = (d - i - 1 + 2.0 * shape - 2.0) / L[i, i]
    return g
