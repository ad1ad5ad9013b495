"""First-order intensity statistics (18 features).

Conventions: population moments, linear-interpolation percentiles, and
Entropy/Uniformity computed on the discretized in-mask histogram.  Skewness
and kurtosis of a zero-variance region are defined as 0.
"""

from __future__ import annotations

import numpy as np

from .discretize import DiscretizedRoi

FIRSTORDER_NAMES = (
    "10Percentile",
    "90Percentile",
    "Energy",
    "Entropy",
    "InterquartileRange",
    "Kurtosis",
    "Maximum",
    "MeanAbsoluteDeviation",
    "Mean",
    "Median",
    "Minimum",
    "Range",
    "RobustMeanAbsoluteDeviation",
    "RootMeanSquared",
    "Skewness",
    "TotalEnergy",
    "Uniformity",
    "Variance",
)


def first_order_features(roi: DiscretizedRoi, voxel_volume: float) -> dict:
    """The 18 first-order features of one discretized region."""
    x = roi.intensities
    n = x.size
    mean = float(x.mean())
    centered = x - mean
    var = float(np.mean(centered**2))
    sd = np.sqrt(var)

    p10, p25, p50, p75, p90 = np.percentile(x, [10, 25, 50, 75, 90])
    robust = x[(x >= p10) & (x <= p90)]
    energy = float(np.sum(x**2))

    counts = np.bincount(roi.labels)[1:]
    p = counts[counts > 0] / n

    if sd > 0:
        skewness = float(np.mean(centered**3)) / sd**3
        kurtosis = float(np.mean(centered**4)) / sd**4
    else:
        skewness = 0.0
        kurtosis = 0.0

    return {
        "10Percentile": float(p10),
        "90Percentile": float(p90),
        "Energy": energy,
        "Entropy": float(-np.sum(p * np.log2(p))),
        "InterquartileRange": float(p75 - p25),
        "Kurtosis": kurtosis,
        "Maximum": float(x.max()),
        "MeanAbsoluteDeviation": float(np.mean(np.abs(centered))),
        "Mean": mean,
        "Median": float(p50),
        "Minimum": float(x.min()),
        "Range": float(x.max() - x.min()),
        "RobustMeanAbsoluteDeviation": float(np.mean(np.abs(robust - robust.mean()))),
        "RootMeanSquared": float(np.sqrt(energy / n)),
        "Skewness": skewness,
        "TotalEnergy": float(voxel_volume * energy),
        "Uniformity": float(np.sum(p**2)),
        "Variance": var,
    }
