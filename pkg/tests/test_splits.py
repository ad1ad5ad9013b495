import numpy as np
import pytest

from radstab import DataError
from radstab.splits import make_splits


def ids_labels(n_pos, n_neg):
    ids = [f"p{i:03d}" for i in range(n_pos + n_neg)]
    labels = [1] * n_pos + [0] * n_neg
    return ids, labels


def test_paper_scale_test_positives():
    ids, labels = ids_labels(71, 173)
    plan = make_splits(ids, labels, n_splits=20, train_frac=0.7, seed=1)
    lab = dict(zip(ids, labels))
    for train, test in plan:
        test_pos = sum(lab[p] for p in test)
        assert test_pos in (21, 22)
        assert len(train) + len(test) == 244
        assert not set(train) & set(test)


def test_ten_patients_50_50():
    ids, labels = ids_labels(5, 5)
    plan = make_splits(ids, labels, n_splits=50, train_frac=0.7, seed=3)
    lab = dict(zip(ids, labels))
    for train, test in plan:
        assert len(train) == 7 and len(test) == 3
        assert sum(lab[p] for p in train) in (3, 4)


def test_deterministic_per_seed():
    ids, labels = ids_labels(12, 28)
    a = make_splits(ids, labels, n_splits=10, seed=9)
    b = make_splits(ids, labels, n_splits=10, seed=9)
    c = make_splits(ids, labels, n_splits=10, seed=10)
    assert a.splits == b.splits
    assert a.splits != c.splits


def test_stratification_within_one_patient():
    ids, labels = ids_labels(30, 70)
    plan = make_splits(ids, labels, n_splits=25, train_frac=0.7, seed=2)
    lab = dict(zip(ids, labels))
    for train, test in plan:
        ratio = 0.3
        assert abs(sum(lab[p] for p in train) - ratio * len(train)) <= 1.0
        assert abs(sum(lab[p] for p in test) - ratio * len(test)) <= 1.0
        # both classes always appear in the test set
        assert 0 < sum(lab[p] for p in test) < len(test)


def test_class_too_small():
    ids, labels = ids_labels(1, 9)
    with pytest.raises(DataError, match=">= 2"):
        make_splits(ids, labels)


def test_duplicate_ids_rejected():
    with pytest.raises(DataError, match="duplicate"):
        make_splits(["a", "a", "b", "c"], [0, 0, 1, 1])
