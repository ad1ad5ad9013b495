"""Feature-stability quantification across segmentation masks.

Agreement between the reference mask and each variant is measured per
feature with the single-measure two-way random-effects agreement ICC and
with Pearson's correlation.  The reliability scores classify each patient's
(DSC, relative feature error) samples into quality / consistency /
robustness / instability regions; score = fraction of patients per class,
plus the unclassified remainder, always summing to one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DataError
from .tables import FeatureTable
from .validation import as_float_vector, check_same_length


def icc2(ratings) -> float:
    """ICC(2,1): two-way random effects, absolute agreement, single measure.

    ``ratings`` is an n_subjects x k_raters matrix with no missing cells.
    """
    m = np.asarray(ratings, dtype=np.float64)
    if m.ndim != 2:
        raise DataError(f"rating matrix must be 2-D, got shape {m.shape}")
    n, k = m.shape
    if n < 3 or k < 2:
        raise DataError(f"ICC needs >= 3 subjects and >= 2 raters, got {m.shape}")
    if not np.isfinite(m).all():
        raise DataError("rating matrix contains missing or non-finite cells")
    grand = m.mean()
    if np.allclose(m, grand):
        raise DataError("zero total variance: ICC undefined")
    row_means = m.mean(axis=1)
    col_means = m.mean(axis=0)
    ss_rows = k * ((row_means - grand) ** 2).sum()
    ss_cols = n * ((col_means - grand) ** 2).sum()
    ss_total = ((m - grand) ** 2).sum()
    ss_err = ss_total - ss_rows - ss_cols
    msr = ss_rows / (n - 1)
    msc = ss_cols / (k - 1)
    mse = ss_err / ((n - 1) * (k - 1))
    return float(
        (msr - mse) / (msr + (k - 1) * mse + (k / n) * (msc - mse))
    )


def pearson(x, y) -> float:
    """Product-moment correlation; requires length >= 3 and both variances > 0."""
    x = as_float_vector(x, "x", min_len=3)
    y = as_float_vector(y, "y", min_len=3)
    check_same_length(x, y, "x", "y")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = np.sqrt((xc**2).sum())
    sy = np.sqrt((yc**2).sum())
    if sx == 0 or sy == 0:
        raise DataError("zero variance: Pearson correlation undefined")
    return float((xc * yc).sum() / (sx * sy))


@dataclass(frozen=True)
class ReliabilityThresholds:
    """Region boundaries for the reliability classification.

    The interpretation of the scores is tied to where the cohort's DSC
    values actually lie, so thresholds are explicit configuration rather
    than hidden constants.
    """

    dsc_hi: float = 0.8
    err_lo: float = 0.1
    err_hi: float = 0.5
    r_min: float = 0.7


@dataclass
class ReliabilityScores:
    quality: float
    consistency: float
    robustness: float
    instability: float
    unclassified: float
    n_patients: int
    n_excluded: int

    def as_dict(self) -> dict:
        return {
            "quality": self.quality,
            "consistency": self.consistency,
            "robustness": self.robustness,
            "instability": self.instability,
            "unclassified": self.unclassified,
        }


def _classify(dsc: np.ndarray, err: np.ndarray, t: ReliabilityThresholds) -> str:
    if (dsc >= t.dsc_hi).all() and (err <= t.err_lo).all():
        return "quality"
    if (err <= t.err_lo).all():
        return "robustness"
    if len(dsc) >= 3 and dsc.std() > 0 and err.std() > 0:
        r = pearson(dsc, err)
        if r <= -t.r_min:
            return "consistency"
    if ((dsc >= t.dsc_hi) & (err >= t.err_hi)).any():
        return "instability"
    return "unclassified"


def reliability_scores(samples_by_patient: dict, thresholds: ReliabilityThresholds) -> ReliabilityScores:
    """Classify each patient's (dsc, rel_err) samples and report class fractions.

    ``samples_by_patient`` maps patient id to a list of (dsc, rel_err)
    pairs; patients with fewer than 2 samples are excluded and counted.
    Precedence: quality > robustness > consistency > instability.
    """
    counts = {"quality": 0, "consistency": 0, "robustness": 0,
              "instability": 0, "unclassified": 0}
    n_excluded = 0
    n_used = 0
    for _, samples in sorted(samples_by_patient.items()):
        if len(samples) < 2:
            n_excluded += 1
            continue
        arr = np.asarray(samples, dtype=np.float64)
        dsc = arr[:, 0]
        err = arr[:, 1]
        if ((dsc < 0) | (dsc > 1)).any():
            raise DataError("DSC values must lie in [0, 1]")
        if (err < 0).any() or not np.isfinite(err).all():
            raise DataError("relative errors must be finite and >= 0")
        counts[_classify(dsc, err, thresholds)] += 1
        n_used += 1
    if n_used == 0:
        raise DataError("no patient has >= 2 stability samples")
    return ReliabilityScores(
        quality=counts["quality"] / n_used,
        consistency=counts["consistency"] / n_used,
        robustness=counts["robustness"] / n_used,
        instability=counts["instability"] / n_used,
        unclassified=counts["unclassified"] / n_used,
        n_patients=n_used,
        n_excluded=n_excluded,
    )


def stability_report(
    features: FeatureTable,
    dsc: dict,
    thresholds: ReliabilityThresholds,
    ref_variant: str = "manual",
    feature_subset=None,
):
    """Per-feature pairwise ICC/Pearson against the reference mask plus
    reliability scores over the pooled per-patient samples.

    ``dsc`` maps (patient_id, variant) to the variant's DSC against the
    reference.  Returns (report frame, scatter data) where scatter data maps
    feature -> list of (patient, variant, dsc, rel_err) rows.
    """
    names = feature_subset or features.feature_names
    unknown = [n for n in names if n not in features.feature_names]
    if unknown:
        raise DataError(f"unknown features requested: {unknown[:5]}")
    variants = [v for v in features.variants if v != ref_variant]
    if not variants:
        raise DataError(f"table has no variants besides '{ref_variant}'")
    ref_X, _, _ = features.variant_slice(ref_variant)

    rows = []
    scatter: dict[str, list] = {name: [] for name in names}
    for name in names:
        ref_vals = ref_X[name]
        samples_by_patient: dict[str, list] = {}
        zero_ref = 0
        for variant in variants:
            try:
                var_X, _, _ = features.variant_slice(variant)
            except DataError:
                continue
            common = ref_vals.index.intersection(var_X.index)
            if len(common) < 3:
                continue
            pair = np.column_stack(
                [ref_vals.loc[common].to_numpy(), var_X.loc[common, name].to_numpy()]
            )
            try:
                icc_value = icc2(pair)
            except DataError:
                icc_value = np.nan
            try:
                r_value = pearson(pair[:, 0], pair[:, 1])
            except DataError:
                r_value = np.nan
            rows.append(
                {
                    "feature": name,
                    "variant": variant,
                    "icc": icc_value,
                    "pearson": r_value,
                    "n": len(common),
                }
            )
            for pid in common:
                key = (pid, variant)
                if key not in dsc:
                    continue
                ref_value = ref_vals.loc[pid]
                if ref_value == 0:
                    zero_ref += 1
                    continue
                rel_err = abs(var_X.loc[pid, name] - ref_value) / abs(ref_value)
                samples_by_patient.setdefault(pid, []).append((dsc[key], rel_err))
                scatter[name].append((pid, variant, dsc[key], rel_err))
        try:
            scores = reliability_scores(samples_by_patient, thresholds)
        except DataError:
            scores = None
        for row in rows:
            if row["feature"] == name and "quality" not in row:
                if scores is None:
                    row.update({k: np.nan for k in
                                ("quality", "consistency", "robustness",
                                 "instability", "unclassified")})
                    row["n_excluded_zero_ref"] = zero_ref
                else:
                    row.update(scores.as_dict())
                    row["n_excluded_zero_ref"] = zero_ref
    report = pd.DataFrame(rows)
    return report, scatter
