"""Hot loop: pulling form components back through a batch of Jacobians.

out[p, J] = sum_I coef[p, I] * det(jac[p][rows_I, cols_J])

The numba kernel is used unless ``DEGCW_DISABLE_NUMBA`` is set to a truthy
value (or numba is missing); the numpy path is the reference.
"""
from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("DEGCW_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLE:
        raise ImportError
    from numba import njit
    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def pullback_coeffs_numpy(coef, jac, rows, cols):
    coef = np.ascontiguousarray(coef, dtype=float)
    P = coef.shape[0]
    q = rows.shape[1]
    if q == 0:
        return coef[:, :1].copy() * np.ones((1, cols.shape[0]))
    sub = jac[:, rows[:, None, :, None], cols[None, :, None, :]]  # (P, nI, nJ, q, q)
    dets = np.linalg.det(sub)
    return np.einsum("pi,pij->pj", coef, dets).reshape(P, cols.shape[0])


if HAVE_NUMBA:
    @njit(cache=True)
    def _small_det(a, q):
        m = a.copy()
        det = 1.0
        for c in range(q):
            piv = c
            best = abs(m[c, c])
            for r in range(c + 1, q):
                if abs(m[r, c]) > best:
                    best = abs(m[r, c])
                    piv = r
            if best == 0.0:
                return 0.0
            if piv != c:
                for k in range(q):
                    tmp = m[c, k]
                    m[c, k] = m[piv, k]
                    m[piv, k] = tmp
                det = -det
            det *= m[c, c]
            for r in range(c + 1, q):
                fac = m[r, c] / m[c, c]
                for k in range(c, q):
                    m[r, k] -= fac * m[c, k]
        return det

    @njit(cache=True)
    def _pullback_numba(coef, jac, rows, cols):
        P = coef.shape[0]
        nI = rows.shape[0]
        nJ = cols.shape[0]
        q = rows.shape[1]
        out = np.zeros((P, nJ))
        sub = np.empty((q, q))
        for p in range(P):
            for j in range(nJ):
                acc = 0.0
                for i in range(nI):
                    c = coef[p, i]
                    if c == 0.0:
                        continue
                    for r in range(q):
                        for s in range(q):
                            sub[r, s] = jac[p, rows[i, r], cols[j, s]]
                    acc += c * _small_det(sub, q)
                out[p, j] = acc
        return out

    def pullback_coeffs_numba(coef, jac, rows, cols):
        coef = np.ascontiguousarray(coef, dtype=np.float64)
        jac = np.ascontiguousarray(jac, dtype=np.float64)
        rows = np.ascontiguousarray(rows, dtype=np.int64).reshape(len(rows), -1)
        cols = np.ascontiguousarray(cols, dtype=np.int64).reshape(len(cols), -1)
        if rows.shape[1] == 0:
            return pullback_coeffs_numpy(coef, jac, rows, cols)
        return _pullback_numba(coef, jac, rows, cols)
else:
    pullback_coeffs_numba = None


def pullback_coeffs(coef, jac, rows, cols):
    rows = np.asarray(rows, dtype=np.int64).reshape(len(rows), -1)
    cols = np.asarray(cols, dtype=np.int64).reshape(len(cols), -1)
    if HAVE_NUMBA:
        return pullback_coeffs_numba(coef, jac, rows, cols)
    return pullback_coeffs_numpy(coef, np.asarray(jac, dtype=float), rows, cols)
