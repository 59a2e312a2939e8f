"""Small dense complex linear algebra for the coefficient systems."""
from __future__ import annotations

import numpy as np

SEP_TOL = 1e-8
PIVOT_RTOL = 1e-12


class SingularMatrixError(np.linalg.LinAlgError):
    def __init__(self, msg: str, index: int | None = None):
        super().__init__(msg)
        self.index = index


class RamifiedPoleError(SingularMatrixError):
    pass


def lower_toeplitz_solve(first_column, rhs) -> np.ndarray:
    """Solve T x = rhs with T lower triangular Toeplitz, T[i, j] = col[i - j]."""
    col = np.asarray(first_column, dtype=complex)
    b = np.asarray(rhs, dtype=complex)
    d = len(b)
    if d == 0:
        return np.zeros(0, dtype=complex)
    if len(col) < d:
        raise ValueError("first column shorter than right-hand side")
    if abs(col[0]) <= SEP_TOL:
        raise RamifiedPoleError("leading Toeplitz entry vanishes (ramified pole)", 0)
    x = np.zeros(d, dtype=complex)
    for i in range(d):
        x[i] = (b[i] - np.dot(col[i:0:-1], x[:i])) / col[0]
    return x


def toeplitz_matrix(first_column, d: int | None = None) -> np.ndarray:
    col = np.asarray(first_column, dtype=complex)
    d = len(col) if d is None else d
    T = np.zeros((d, d), dtype=complex)
    for i in range(d):
        T[i, :i + 1] = col[i::-1][:i + 1]
    return T


def lu_factor(A):
    """Doolittle LU with partial pivoting. Returns (LU, perm, sign)."""
    LU = np.array(A, dtype=complex, copy=True)
    n, m = LU.shape
    if n != m:
        raise ValueError("matrix must be square")
    perm = np.arange(n)
    sign = 1
    amax = float(np.max(np.abs(LU))) if n else 0.0
    thr = PIVOT_RTOL * amax
    for k in range(n):
        p = k + int(np.argmax(np.abs(LU[k:, k])))
        if abs(LU[p, k]) <= thr or amax == 0.0:
            raise SingularMatrixError(f"singular matrix (pivot {k})", k)
        if p != k:
            LU[[k, p]] = LU[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        LU[k + 1:, k] /= LU[k, k]
        LU[k + 1:, k + 1:] -= np.outer(LU[k + 1:, k], LU[k, k + 1:])
    return LU, perm, sign


def lu_solve(factors, b) -> np.ndarray:
    LU, perm, _ = factors
    y = np.asarray(b, dtype=complex)[perm].copy()
    n = len(y)
    for i in range(n):
        y[i] -= np.dot(LU[i, :i], y[:i])
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - np.dot(LU[i, i + 1:], y[i + 1:])) / LU[i, i]
    return y


def dense_solve(A, b) -> np.ndarray:
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return np.zeros(0, dtype=complex)
    return lu_solve(lu_factor(A), b)


def determinant(A) -> complex:
    A = np.asarray(A, dtype=complex)
    if A.size == 0:
        return 1.0 + 0j
    try:
        LU, _, sign = lu_factor(A)
    except SingularMatrixError:
        return 0j
    return complex(sign * np.prod(np.diag(LU)))
