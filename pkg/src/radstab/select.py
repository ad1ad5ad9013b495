"""Univariate ANOVA-F feature ranking and top-k selection.

A feature with zero within-class variance but nonzero between-class spread
gets F = +inf and ranks first; fully constant features get F = 0.  Ties are
broken by feature-name lexicographic order so selection is deterministic.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .errors import DataError
from .validation import as_binary_labels, as_float_matrix


def anova_f_values(X, y) -> np.ndarray:
    """One-way ANOVA F statistic per column for the two label groups."""
    X = as_float_matrix(X)
    y = as_binary_labels(y)
    groups = [X[y == c] for c in (0, 1)]
    if any(len(g) == 0 for g in groups):
        raise DataError("both classes must be present")
    n = len(X)
    grand = X.mean(axis=0)
    ss_between = sum(len(g) * (g.mean(axis=0) - grand) ** 2 for g in groups)
    ss_within = sum(((g - g.mean(axis=0)) ** 2).sum(axis=0) for g in groups)
    df_between = 1.0
    df_within = float(n - 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (ss_between / df_between) / (ss_within / df_within)
    f = np.where(ss_within == 0, np.where(ss_between > 0, np.inf, 0.0), f)
    return f


def anova_f_select(X, y, names, n_keep: int = 50) -> list[int]:
    """Indices of the top ``n_keep`` features by F, ties by name."""
    f = anova_f_values(X, y)
    if len(names) != X.shape[1]:
        raise DataError("names length does not match column count")
    order = sorted(range(X.shape[1]), key=lambda j: (-f[j], str(names[j])))
    return order[: min(n_keep, X.shape[1])]


class AnovaFSelector(BaseEstimator):
    """Estimator-style wrapper: fit stores the column subset, transform slices."""

    def __init__(self, n_keep: int = 50):
        self.n_keep = n_keep

    def fit(self, X, y, names=None):
        X = as_float_matrix(X)
        if names is None:
            names = [f"f{j}" for j in range(X.shape[1])]
        self.support_ = anova_f_select(X, y, names, self.n_keep)
        self.selected_names_ = [str(names[j]) for j in self.support_]
        self.f_values_ = anova_f_values(X, y)
        return self

    def transform(self, X):
        X = as_float_matrix(X)
        return X[:, self.support_]
