"""Synthetic minority oversampling (SMOTE) for tabular features.

Each synthetic sample interpolates a minority point toward one of its k
nearest minority neighbours: x + u * (x_nn - x) with u ~ Uniform(0, 1), so
every synthetic point lies on a segment between two real minority points.
The minority class is oversampled to exact parity with the majority.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DataError
from .validation import as_binary_labels, as_float_matrix


class Smote(BaseEstimator):
    def __init__(self, k: int = 5):
        self.k = k

    def fit_resample(self, X, y, rng: np.random.Generator):
        """Return (X', y') with the minority class oversampled to parity."""
        X = as_float_matrix(X)
        y = as_binary_labels(y)
        if len(X) != len(y):
            raise DataError("X and y differ in length")
        n_pos = int(y.sum())
        n_neg = len(y) - n_pos
        if n_pos == 0 or n_neg == 0:
            raise DataError("SMOTE needs both classes present")
        if n_pos == n_neg:
            return X.copy(), y.copy()
        minority = 1 if n_pos < n_neg else 0
        need = abs(n_neg - n_pos)
        Xm = X[y == minority]
        k = self.k
        if len(Xm) == 1:
            raise DataError("SMOTE needs at least 2 minority samples")
        if len(Xm) <= k:
            k = len(Xm) - 1
            warnings.warn(
                f"minority count {len(Xm)} <= k={self.k}; using k={k}"
            )

        # k nearest minority neighbours per minority point (self excluded),
        # ties broken by index for determinism
        diff = Xm[:, None, :] - Xm[None, :, :]
        dist = np.sqrt((diff**2).sum(axis=2))
        np.fill_diagonal(dist, np.inf)
        neighbour_idx = np.argsort(dist, axis=1, kind="stable")[:, :k]

        base = rng.integers(0, len(Xm), size=need)
        pick = rng.integers(0, k, size=need)
        u = rng.uniform(0.0, 1.0, size=need)
        nn = neighbour_idx[base, pick]
        synthetic = Xm[base] + u[:, None] * (Xm[nn] - Xm[base])
        X_out = np.vstack([X, synthetic])
        y_out = np.concatenate([y, np.full(need, minority, dtype=y.dtype)])
        return X_out, y_out


def smote(X, y, k: int = 5, seed: int | np.random.Generator = 0):
    """Functional wrapper around :class:`Smote`."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    return Smote(k=k).fit_resample(X, y, rng)
