"""Dense/sparse kernels and seeded random streams.

Dense matrices are float64 ``numpy`` arrays. Sparse matrices are canonical
``scipy.sparse.csr_matrix`` objects (sorted column indices, no duplicates).
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .errors import ConfigError, ShapeError

__all__ = [
    "make_rng",
    "derive_seed",
    "csr_from_triplets",
    "check_csr",
    "spmm",
    "transpose_spmm",
    "gemm",
    "relu",
    "sigmoid",
    "activation",
    "dropout",
]


def make_rng(seed: int | np.random.SeedSequence) -> np.random.Generator:
    """PCG64 generator; identical seeds give identical streams."""
    return np.random.Generator(np.random.PCG64(seed))


def derive_seed(seed: int, *path: int) -> int:
    """Independent child seed for a sub-run addressed by ``path``."""
    # SeedSequence ignores trailing zero words, so the path length is mixed in
    # to keep (s, 0) and (s, 0, 0) apart.
    ss = np.random.SeedSequence([int(seed), len(path), *(int(p) for p in path)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def csr_from_triplets(rows, cols, vals, shape: tuple[int, int]) -> sp.csr_matrix:
    """Build a CSR matrix from coordinate triplets, rejecting duplicates."""
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    if not (rows.shape == cols.shape == vals.shape):
        raise ShapeError("triplet arrays must have equal length")
    n_rows, n_cols = shape
    if rows.size:
        if rows.min() < 0 or rows.max() >= n_rows or cols.min() < 0 or cols.max() >= n_cols:
            raise ShapeError(f"triplet index out of range for shape {shape}")
        keys = rows * n_cols + cols
        if np.unique(keys).size != keys.size:
            raise ShapeError("duplicate (row, col) entries; aggregate before building")
    mat = sp.csr_matrix((vals, (rows, cols)), shape=shape, dtype=np.float64)
    mat.sort_indices()
    return mat


def check_csr(mat) -> sp.csr_matrix:
    """Validate the CSR invariants and return the matrix as float64 CSR."""
    if not sp.issparse(mat):
        raise ShapeError("expected a scipy sparse matrix")
    mat = sp.csr_matrix(mat, dtype=np.float64)
    indptr, indices = mat.indptr, mat.indices
    if np.any(np.diff(indptr) < 0):
        raise ShapeError("row offsets must be non-decreasing")
    for r in range(mat.shape[0]):
        seg = indices[indptr[r]:indptr[r + 1]]
        if seg.size > 1 and np.any(np.diff(seg) <= 0):
            raise ShapeError(f"row {r}: column indices not strictly increasing")
    return mat


def _dense(x: np.ndarray, name: str) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {x.shape}")
    return x


def spmm(S: sp.spmatrix, X: np.ndarray) -> np.ndarray:
    """``S @ X`` for sparse ``S`` (m x k) and dense ``X`` (k x n)."""
    X = _dense(X, "X")
    if S.shape[1] != X.shape[0]:
        raise ShapeError(f"spmm: {S.shape} @ {X.shape}")
    return np.asarray(S @ X, dtype=np.float64)


def transpose_spmm(S: sp.spmatrix, X: np.ndarray) -> np.ndarray:
    """``S.T @ X`` without materializing the transpose.

    ``csr.T`` is a CSC view over the same buffers, so no copy is made.
    """
    X = _dense(X, "X")
    if S.shape[0] != X.shape[0]:
        raise ShapeError(f"transpose_spmm: {S.shape}^T @ {X.shape}")
    return np.asarray(S.T @ X, dtype=np.float64)


def gemm(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    A = _dense(A, "A")
    B = _dense(B, "B")
    if A.shape[1] != B.shape[0]:
        raise ShapeError(f"gemm: {A.shape} @ {B.shape}")
    return A @ B


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def sigmoid(x):
    # expit never overflows: expit(-50) ~ 1.9e-22, expit(50) == 1.0
    return expit(x)


def activation(X: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return relu(X)
    if kind == "sigmoid":
        return sigmoid(X)
    raise ConfigError(f"unknown activation {kind!r}")


def dropout(X: np.ndarray, p: float, rng: np.random.Generator, training: bool):
    """Inverted dropout.

    Returns ``(Y, mask)`` with ``Y = X * mask``; ``mask`` already carries the
    ``1 / (1 - p)`` scale so the backward pass is a plain elementwise product.
    """
    if not 0.0 <= p < 1.0:
        raise ConfigError(f"dropout probability must be in [0, 1), got {p}")
    X = np.asarray(X, dtype=np.float64)
    if not training or p == 0.0:
        return X, np.ones_like(X)
    keep = rng.random(X.shape) >= p
    mask = keep / (1.0 - p)
    return X * mask, mask
