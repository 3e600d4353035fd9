"""Deterministic eigen/SVD kernels shared across the pipeline.

All factorizations come back in a canonical form: eigenpairs sorted by the
requested key with stable tie order, and every eigen/singular vector signed
so that its largest-magnitude coordinate is positive (lowest index wins a
tie). Given equal inputs the outputs are bit-identical, which is what the
reproducibility contract of the harness leans on.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np

from .errors import RankDeficientError

SYMMETRY_RTOL = 1e-8


class EigPairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray


def canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip column signs so each column's largest |entry| is positive."""
    vectors = np.array(vectors, dtype=np.float64)
    if vectors.ndim != 2:
        raise ValueError("expected a matrix of column vectors")
    idx = np.abs(vectors).argmax(axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0.0] = 1.0
    return vectors * signs


def _require_symmetric(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    norm = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > SYMMETRY_RTOL * norm:
        raise ValueError("matrix is not symmetric to relative tolerance 1e-8")
    return (a + a.T) / 2.0


def sym_eig_topk(a: np.ndarray, k: int, by_magnitude: bool = True) -> EigPairs:
    """Top-k eigenpairs of a symmetric matrix.

    Ordered by decreasing |eigenvalue| when ``by_magnitude`` (ties keep
    ascending-value order, so the order is deterministic), else by decreasing
    eigenvalue. Vectors are sign-canonicalized.
    """
    a = _require_symmetric(a)
    n = a.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} out of range for n={n}")
    w, v = np.linalg.eigh(a)
    key = -np.abs(w) if by_magnitude else -w
    order = np.argsort(key, kind="stable")[:k]
    return EigPairs(w[order].copy(), canonical_signs(v[:, order]))


def rank_project(a: np.ndarray, k: int) -> np.ndarray:
    """Frobenius-nearest symmetric matrix of rank <= k.

    Keeps the k largest-magnitude eigenvalues. ``k >= n`` is the identity
    projection; ``k > n`` additionally emits a warning.
    """
    a = _require_symmetric(a)
    n = a.shape[0]
    if k < 1:
        raise ValueError(f"k={k} must be positive")
    if k >= n:
        if k > n:
            warnings.warn(f"rank {k} exceeds dimension {n}, clamping", RuntimeWarning)
        return a
    w, v = np.linalg.eigh(a)
    order = np.argsort(-np.abs(w), kind="stable")[:k]
    return (v[:, order] * w[order]) @ v[:, order].T


def polar_project(x: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Closest matrix with orthonormal columns, the polar factor U V^T.

    Raises :class:`RankDeficientError` when the smallest singular value is
    below ``rank_tol`` times the largest (the projection is then not unique).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < x.shape[1]:
        raise ValueError(f"expected a tall matrix, got shape {x.shape}")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    if s[0] == 0.0 or s[-1] < rank_tol * s[0]:
        raise RankDeficientError(s[-1], s[0])
    return u @ vt


def svd_top_left(x: np.ndarray, s: int) -> np.ndarray:
    """Top-s left singular vectors, sign-canonicalized."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("expected a matrix")
    if not 1 <= s <= min(x.shape):
        raise ValueError(f"s={s} out of range for shape {x.shape}")
    u, _, _ = np.linalg.svd(x, full_matrices=False)
    return canonical_signs(u[:, :s])
