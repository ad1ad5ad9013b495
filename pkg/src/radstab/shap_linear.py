"""Exact additive attributions for linear models in logit space.

Under feature independence the exact attribution of a linear model is
phi_j(x) = beta_j * (x_j - mean_background_j), and the attributions satisfy
local accuracy exactly: sum_j phi_j(x) + f(background mean) = f(x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .validation import as_float_matrix


@dataclass
class ShapRanking:
    """Mean absolute attribution per feature plus the resulting top-k list."""

    feature_names: list
    mean_abs: np.ndarray
    top: list


class LinearShapExplainer:
    def __init__(self, model, background):
        background = as_float_matrix(background, "background")
        if background.shape[0] == 0:
            raise DataError("background set is empty")
        if background.shape[1] != model.n_features_in_:
            raise DataError("background width does not match the model")
        self.model = model
        self.background_mean_ = background.mean(axis=0)
        self.base_value_ = float(
            model.decision_function(self.background_mean_[None, :])[0]
        )

    def shap_values(self, X) -> np.ndarray:
        X = as_float_matrix(X)
        return self.model.coef_ * (X - self.background_mean_)

    def ranking(self, X, feature_names, k: int = 10) -> ShapRanking:
        phi = self.shap_values(X)
        mean_abs = np.abs(phi).mean(axis=0)
        order = sorted(
            range(len(feature_names)),
            key=lambda j: (-mean_abs[j], str(feature_names[j])),
        )
        top = [str(feature_names[j]) for j in order[:k] if mean_abs[j] > 0]
        return ShapRanking(
            feature_names=[str(n) for n in feature_names],
            mean_abs=mean_abs,
            top=top,
        )


def linear_shap(model, X_eval, X_background, feature_names, k: int = 10) -> ShapRanking:
    """Functional wrapper: exact linear attributions ranked by mean |phi|."""
    return LinearShapExplainer(model, X_background).ranking(X_eval, feature_names, k)
