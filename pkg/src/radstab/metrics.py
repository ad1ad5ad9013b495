"""Classification skill scores: confusion-matrix metrics plus rank ROC-AUC."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .validation import as_binary_labels, as_float_vector, check_same_length


@dataclass
class SkillScores:
    accuracy: float
    recall: float
    specificity: float
    balanced_accuracy: float
    roc_auc: float

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "recall": self.recall,
            "specificity": self.specificity,
            "balanced_accuracy": self.balanced_accuracy,
            "roc_auc": self.roc_auc,
        }


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(y_true, y_score) -> float:
    """Mann-Whitney rank AUC with tie correction (average ranks)."""
    y = as_binary_labels(y_true)
    s = as_float_vector(y_score, "y_score", min_len=2)
    check_same_length(y, s, "y_true", "y_score")
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DataError("ROC-AUC undefined: only one class present")
    ranks = _average_ranks(s)
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def skill(y_true, y_prob, threshold: float = 0.5) -> SkillScores:
    """Confusion-matrix scores at ``threshold`` plus rank ROC-AUC."""
    y = as_binary_labels(y_true)
    p = as_float_vector(y_prob, "y_prob", min_len=2)
    check_same_length(y, p, "y_true", "y_prob")
    auc = roc_auc(y, p)
    pred = (p >= threshold).astype(np.int64)
    tp = int(((pred == 1) & (y == 1)).sum())
    tn = int(((pred == 0) & (y == 0)).sum())
    fp = int(((pred == 1) & (y == 0)).sum())
    fn = int(((pred == 0) & (y == 1)).sum())
    recall = tp / (tp + fn)
    specificity = tn / (tn + fp)
    return SkillScores(
        accuracy=(tp + tn) / len(y),
        recall=recall,
        specificity=specificity,
        balanced_accuracy=(recall + specificity) / 2.0,
        roc_auc=auc,
    )
