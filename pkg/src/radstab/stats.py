"""Hypothesis tests and interval estimates for the univariate analyses.

Kolmogorov-Smirnov p-values use the asymptotic Kolmogorov distribution with
the effective-n refinement (adequate at cohort scale; exact small-sample
enumeration is out of scope).  Chi-squared p-values come from the
regularized upper incomplete gamma function.  Bonferroni correction never
decreases a p-value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import special

from .errors import DataError
from .tables import FeatureTable
from .validation import as_binary_labels, as_float_vector


@dataclass
class TestResult:
    __test__ = False  # not a pytest class despite the name

    statistic: float
    p_value: float
    p_adjusted: float
    n_comparisons: int = 1

    @staticmethod
    def from_raw(statistic: float, p_value: float, n_comparisons: int = 1) -> "TestResult":
        if n_comparisons < 1:
            raise DataError("n_comparisons must be >= 1")
        return TestResult(
            statistic=float(statistic),
            p_value=float(p_value),
            p_adjusted=float(min(1.0, p_value * n_comparisons)),
            n_comparisons=int(n_comparisons),
        )


def bonferroni(results: list[TestResult]) -> list[TestResult]:
    """Re-adjust a family of results for its own size."""
    m = len(results)
    return [TestResult.from_raw(r.statistic, r.p_value, m) for r in results]


def _kolmogorov_sf(lam: float) -> float:
    if lam < 1e-10:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = (-1.0) ** (k - 1) * np.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return float(min(1.0, max(0.0, 2.0 * total)))


def ks_two_sample(a, b, n_comparisons: int = 1) -> TestResult:
    """Two-sided two-sample KS test: D = sup |ECDF_a - ECDF_b|."""
    a = as_float_vector(a, "a", min_len=2)
    b = as_float_vector(b, "b", min_len=2)
    n, m = len(a), len(b)
    a_sorted = np.sort(a)
    b_sorted = np.sort(b)
    grid = np.concatenate([a_sorted, b_sorted])
    cdf_a = np.searchsorted(a_sorted, grid, side="right") / n
    cdf_b = np.searchsorted(b_sorted, grid, side="right") / m
    d = float(np.abs(cdf_a - cdf_b).max())
    ne = n * m / (n + m)
    lam = (np.sqrt(ne) + 0.12 + 0.11 / np.sqrt(ne)) * d
    return TestResult.from_raw(d, _kolmogorov_sf(lam), n_comparisons)


def chi_squared(table, n_comparisons: int = 1) -> TestResult:
    """Pearson chi-squared independence test on an r x c count table."""
    obs = np.asarray(table, dtype=np.float64)
    if obs.ndim != 2:
        raise DataError(f"contingency table must be 2-D, got shape {obs.shape}")
    if (obs < 0).any():
        raise DataError("counts must be nonnegative")
    rows = obs.sum(axis=1)
    cols = obs.sum(axis=0)
    if (rows == 0).any() or (cols == 0).any():
        raise DataError("zero marginal in contingency table")
    r, c = obs.shape
    df = (r - 1) * (c - 1)
    if df < 1:
        raise DataError(f"table {obs.shape} has zero degrees of freedom")
    expected = np.outer(rows, cols) / obs.sum()
    stat = float(((obs - expected) ** 2 / expected).sum())
    p = float(special.gammaincc(df / 2.0, stat / 2.0))
    return TestResult.from_raw(stat, p, n_comparisons)


def mean_ci95(samples) -> tuple[float, float, float]:
    """(mean, lo, hi) with the normal-approximation 95% interval."""
    x = as_float_vector(samples, "samples", min_len=2)
    mean = float(x.mean())
    half = 1.96 * float(x.std(ddof=1)) / np.sqrt(len(x))
    return mean, mean - half, mean + half


def format_ci(mean: float, lo: float, hi: float, digits: int = 3) -> str:
    """Render the report's "mean (lo, hi)" cell format."""
    return f"{mean:.{digits}f} ({lo:.{digits}f}, {hi:.{digits}f})"


def univariate_screen(
    features: FeatureTable,
    variant: str = "manual",
    clinical: pd.DataFrame | None = None,
) -> pd.DataFrame:
    """KS per feature column, chi-squared per categorical clinical column,
    Bonferroni over the whole family."""
    X, y, _ = features.variant_slice(variant)
    y = as_binary_labels(y.to_numpy())
    raw = []
    for name in X.columns:
        col = X[name].to_numpy(dtype=np.float64)
        if not np.isfinite(col).all():
            raw.append((name, "ks", np.nan, np.nan, "non-finite"))
            continue
        if col.std() == 0:
            raw.append((name, "ks", 0.0, 1.0, "constant"))
            continue
        res = ks_two_sample(col[y == 0], col[y == 1])
        raw.append((name, "ks", res.statistic, res.p_value, ""))
    if clinical is not None:
        missing = [p for p in X.index if p not in clinical.index]
        if missing:
            raise DataError(
                f"clinical table lacks patients present in the feature table: "
                f"{missing[:5]}"
            )
        aligned = clinical.loc[X.index]
        for name in aligned.columns:
            levels = sorted(aligned[name].astype(str).unique())
            if len(levels) < 2:
                raw.append((name, "chi2", 0.0, 1.0, "constant"))
                continue
            counts = np.array(
                [
                    [
                        int(((aligned[name].astype(str) == lev) & (y == cls)).sum())
                        for lev in levels
                    ]
                    for cls in (0, 1)
                ]
            )
            counts = counts[:, counts.sum(axis=0) > 0]
            res = chi_squared(counts)
            raw.append((name, "chi2", res.statistic, res.p_value, ""))
    m = len(raw)
    frame = pd.DataFrame(
        raw, columns=["name", "test", "statistic", "p_value", "flag"]
    )
    frame["p_adjusted"] = np.minimum(1.0, frame["p_value"] * m)
    frame["n_comparisons"] = m
    return frame
