"""Small input-validation helpers used across estimators and operations."""

from __future__ import annotations

import numpy as np

from .errors import DataError


def as_float_matrix(X, name="X") -> np.ndarray:
    """Coerce ``X`` to a 2-D float64 array, rejecting non-finite values."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DataError(f"{name} contains NaN or Inf values")
    return arr


def as_float_vector(x, name="x", min_len=1) -> np.ndarray:
    """Coerce ``x`` to a 1-D float64 array of at least ``min_len`` entries."""
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size < min_len:
        raise DataError(f"{name} needs at least {min_len} values, got {arr.size}")
    if not np.isfinite(arr).all():
        raise DataError(f"{name} contains NaN or Inf values")
    return arr


def as_binary_labels(y, name="y") -> np.ndarray:
    """Coerce class labels to a 0/1 int array."""
    arr = np.asarray(y).ravel()
    uniq = set(np.unique(arr).tolist())
    if not uniq <= {0, 1}:
        raise DataError(f"{name} must be binary 0/1, got values {sorted(uniq)}")
    return arr.astype(np.int64)


def check_same_length(a, b, name_a="a", name_b="b"):
    if len(a) != len(b):
        raise DataError(f"{name_a} and {name_b} differ in length: {len(a)} vs {len(b)}")
