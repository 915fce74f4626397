"""Checked dense kernels over float64 numpy arrays.

Matrices are 2-D C-ordered ``float64`` arrays, vectors are 1-D.  Every
routine validates shapes up front and raises :class:`ShapeError` on a
mismatch, so callers get a clear message instead of a broadcasting surprise.
"""

import numpy as np


class ShapeError(ValueError):
    pass


def as_matrix(a):
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def as_vector(v):
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got shape {v.shape}")
    return v


def identity(n):
    return np.eye(n, dtype=np.float64)


def zeros(rows, cols):
    return np.zeros((rows, cols), dtype=np.float64)


def matmul(a, b):
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul: {a.shape} x {b.shape}")
    return a @ b


def transpose_matvec(w, s):
    """Return ``w.T @ s``: entry j is sum_i w[i, j] * s[i]."""
    w, s = as_matrix(w), as_vector(s)
    if w.shape[0] != s.shape[0]:
        raise ShapeError(f"transpose_matvec: W is {w.shape}, s has length {s.shape[0]}")
    return s @ w


def outer_accumulate(acc, u, v):
    """In-place ``acc += outer(u, v)``; returns ``acc``."""
    u, v = as_vector(u), as_vector(v)
    if acc.ndim != 2 or acc.shape != (u.shape[0], v.shape[0]):
        raise ShapeError(f"outer_accumulate: acc {acc.shape}, u {u.shape}, v {v.shape}")
    acc += np.outer(u, v)
    return acc
