"""Feature z-scoring and parametric empirical-Bayes batch harmonization.

Both transforms follow the estimator protocol (fit on one table, apply to
another), and FeatureTable-level wrappers preserve keys and sidecar columns.

The harmonizer implements the standard parametric empirical-Bayes batch
adjustment: per-feature standardization against the batch-size-weighted
grand mean and pooled within-batch variance, per-batch location/scale
estimates, normal / inverse-gamma priors moment-matched across features,
iterated conditional modes to convergence, then restoration to the original
scale via (z - gamma*) / sqrt(delta*).  Population (1/n) variances are used
throughout, which makes copy-shift and copy-scale batch constructions exact
fixed points of the adjustment.  Priors whose across-feature variance is
zero are degenerate; the per-batch estimates are then used unshrunk.
"""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import DataError, NumericalError
from .tables import FeatureTable
from .validation import as_float_matrix


class ZscoreScaler(BaseEstimator, TransformerMixin):
    """Per-feature standardization with population sigma fit on training data.

    Constant features are flagged and passed through centred (scale 1).
    """

    def fit(self, X, y=None):
        X = as_float_matrix(X)
        self.mean_ = X.mean(axis=0)
        sd = X.std(axis=0)
        self.constant_mask_ = sd == 0
        self.scale_ = np.where(self.constant_mask_, 1.0, sd)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DataError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return (X - self.mean_) / self.scale_


def zscore_fit(train: FeatureTable) -> dict:
    """Per-feature (mean, sigma) parameters from a training table."""
    scaler = ZscoreScaler().fit(train.matrix())
    return {
        "features": list(train.feature_names),
        "mean": scaler.mean_,
        "scale": scaler.scale_,
        "constant": scaler.constant_mask_,
    }


def zscore_apply(params: dict, table: FeatureTable) -> FeatureTable:
    if list(table.feature_names) != list(params["features"]):
        raise DataError("feature names do not match the fitted z-score parameters")
    values = (table.matrix() - params["mean"]) / params["scale"]
    return table.with_values(values)


class CombatHarmonizer(BaseEstimator, TransformerMixin):
    """Parametric empirical-Bayes batch-effect removal.

    Parameters
    ----------
    tol : convergence threshold on the max absolute parameter delta of the
        iterated conditional modes.
    max_iter : iteration budget; exceeding it raises ``NumericalError``.
    """

    def __init__(self, tol: float = 1e-6, max_iter: int = 200):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, batches):
        X = as_float_matrix(X)
        batches = np.asarray(batches)
        if len(batches) != len(X):
            raise DataError("batch vector length does not match row count")
        self.batch_levels_ = sorted(set(batches.tolist()))
        counts = {b: int((batches == b).sum()) for b in self.batch_levels_}
        single = [b for b, c in counts.items() if c < 2]
        if single:
            raise DataError(f"batches with fewer than 2 rows: {single}")
        self.single_batch_ = len(self.batch_levels_) < 2
        if self.single_batch_:
            warnings.warn("single batch: harmonization is the identity")
            self.n_features_in_ = X.shape[1]
            return self

        n = len(X)
        batch_idx = {b: np.where(batches == b)[0] for b in self.batch_levels_}
        batch_means = np.stack(
            [X[batch_idx[b]].mean(axis=0) for b in self.batch_levels_]
        )
        weights = np.array([counts[b] / n for b in self.batch_levels_])
        self.grand_mean_ = weights @ batch_means
        residual = X - batch_means[[self.batch_levels_.index(b) for b in batches]]
        pooled = (residual**2).mean(axis=0)
        if (pooled == 0).any():
            nonzero = pooled[pooled > 0]
            fill = np.median(nonzero) if nonzero.size else 1.0
            pooled = np.where(pooled == 0, fill, pooled)
        self.pooled_var_ = pooled

        z = (X - self.grand_mean_) / np.sqrt(self.pooled_var_)
        self.gamma_star_ = {}
        self.delta_star_ = {}
        self.n_iter_ = {}
        for b in self.batch_levels_:
            zb = z[batch_idx[b]]
            gamma_hat = zb.mean(axis=0)
            delta_hat = zb.var(axis=0)  # population
            delta_hat = np.where(delta_hat == 0, 1e-12, delta_hat)
            gamma_star, delta_star, iters = self._iterate(
                zb, gamma_hat, delta_hat
            )
            self.gamma_star_[b] = gamma_star
            self.delta_star_[b] = delta_star
            self.n_iter_[b] = iters
        self.n_features_in_ = X.shape[1]
        return self

    def _iterate(self, zb, gamma_hat, delta_hat):
        n_b = len(zb)
        gamma_bar = gamma_hat.mean()
        tau2 = gamma_hat.var()
        m = delta_hat.mean()
        s2 = delta_hat.var()
        degenerate_prior = s2 <= np.finfo(float).tiny
        if not degenerate_prior:
            a_prior = (2.0 * s2 + m**2) / s2
            b_prior = (m * s2 + m**3) / s2

        if self.max_iter < 1:
            raise DataError(f"max_iter must be >= 1, got {self.max_iter}")
        gamma = gamma_hat.copy()
        delta = delta_hat.copy()
        change = np.inf
        for iteration in range(1, self.max_iter + 1):
            gamma_new = (n_b * tau2 * gamma_hat + delta * gamma_bar) / (
                n_b * tau2 + delta
            )
            ssq = ((zb - gamma_new) ** 2).sum(axis=0)
            if degenerate_prior:
                delta_new = delta_hat
            else:
                delta_new = (0.5 * ssq + b_prior) / (n_b / 2.0 + a_prior - 1.0)
            change = max(
                np.abs(gamma_new - gamma).max(), np.abs(delta_new - delta).max()
            )
            gamma, delta = gamma_new, delta_new
            if change < self.tol:
                return gamma, delta, iteration
        raise NumericalError(
            f"empirical-Bayes iteration did not converge within {self.max_iter} "
            f"iterations (last delta {change:.3e}, tol {self.tol:.1e})"
        )

    def transform(self, X, batches):
        X = as_float_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise DataError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        if self.single_batch_:
            return X.copy()
        batches = np.asarray(batches)
        unknown = sorted(set(batches.tolist()) - set(self.batch_levels_))
        if unknown:
            raise DataError(f"unknown batches at transform time: {unknown}")
        out = np.empty_like(X)
        scale = np.sqrt(self.pooled_var_)
        for b in self.batch_levels_:
            rows = np.where(batches == b)[0]
            if rows.size == 0:
                continue
            z = (X[rows] - self.grand_mean_) / scale
            adjusted = (z - self.gamma_star_[b]) / np.sqrt(self.delta_star_[b])
            out[rows] = adjusted * scale + self.grand_mean_
        return out


def combat_fit(table: FeatureTable, tol: float = 1e-6, max_iter: int = 200) -> CombatHarmonizer:
    """Fit the harmonizer on a feature table using its batch_id column."""
    model = CombatHarmonizer(tol=tol, max_iter=max_iter)
    model.fit(table.matrix(), table.frame["batch_id"].to_numpy())
    model.feature_names_ = list(table.feature_names)
    return model


def combat_apply(model: CombatHarmonizer, table: FeatureTable) -> FeatureTable:
    """Apply a fitted harmonizer; preserves table shape and row keys."""
    if getattr(model, "feature_names_", None) is not None:
        if list(table.feature_names) != model.feature_names_:
            raise DataError("feature names do not match the fitted ComBat model")
    values = model.transform(table.matrix(), table.frame["batch_id"].to_numpy())
    return table.with_values(values)
