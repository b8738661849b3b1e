"""Finite-dimensional Hilbert-space kernel.

Prediction vectors are 1-D ``float64`` numpy arrays.  Everything here is a
pure function; inputs are never modified.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial.distance import pdist

from .errors import ConfigurationError, InputError, InvariantViolation, PreconditionError

SIMPLEX_TOL = 1e-9
NEGATIVE_DUST = 1e-12


def as_vector(v, dim: int | None = None) -> np.ndarray:
    """Coerce ``v`` to a finite 1-D float64 array, optionally of length ``dim``."""
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InputError(f"expected a 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ConfigurationError(f"dimension mismatch: expected {dim}, got {arr.shape[0]}")
    if not np.isfinite(arr).all():
        raise InputError("vector has non-finite coordinates")
    return arr


def as_matrix(vectors, count: int | None = None, dim: int | None = None) -> np.ndarray:
    """Stack a sequence of vectors into a finite ``(N, D)`` float64 array."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim == 1:
        # a list of scalars is a list of 1-D vectors
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise InputError(f"expected N vectors of equal length, got shape {arr.shape}")
    if count is not None and arr.shape[0] != count:
        raise InputError(f"expected {count} vectors, got {arr.shape[0]}")
    if dim is not None and arr.shape[1] != dim:
        raise InputError(f"expected dimension {dim}, got {arr.shape[1]}")
    if not np.isfinite(arr).all():
        raise InputError("non-finite coordinate among vectors")
    return arr


def norm_sq(v, dim: int | None = None) -> float:
    """Squared Euclidean norm."""
    v = as_vector(v, dim)
    return float(np.dot(v, v))


def distance(u, v) -> float:
    u = as_vector(u)
    v = as_vector(v, u.shape[0])
    d = u - v
    return math.sqrt(float(np.dot(d, d)))


def max_pairwise_distance(vectors) -> float:
    """Diameter of a finite point set: exact maximum over all pairs.

    This is an exhaustive O(N^2 D) scan; the adaptive learning rate depends
    on the exact value, so no bounding-sphere shortcut is used.
    """
    X = np.asarray(vectors, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2 or X.shape[0] == 0:
        raise PreconditionError("max_pairwise_distance needs at least one vector")
    if X.shape[0] == 1:
        return 0.0
    return math.sqrt(float(pdist(X, "sqeuclidean").max()))


def check_simplex(weights) -> np.ndarray:
    """Validate simplex weights, clamping negative floating-point dust to zero."""
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] == 0:
        raise InvariantViolation("weights must be a non-empty 1-D sequence")
    if not np.isfinite(w).all():
        raise InvariantViolation("weights contain non-finite values")
    if (w < -NEGATIVE_DUST).any():
        raise InvariantViolation(f"negative weight {w.min()!r}")
    if (w < 0).any():
        w = np.where(w < 0, 0.0, w)
    total = float(w.sum())
    if abs(total - 1.0) > SIMPLEX_TOL:
        raise InvariantViolation(f"weights sum to {total!r}, not 1")
    return w


def convex_combine(weights, vectors) -> np.ndarray:
    """Weighted sum ``sum_n w_n v_n`` for simplex weights ``w``."""
    w = check_simplex(weights)
    X = as_matrix(vectors)
    if X.shape[0] != w.shape[0]:
        raise InputError(f"{w.shape[0]} weights for {X.shape[0]} vectors")
    return w @ X
