"""Stratified train/test split plans, reproducible from one seed.

Per-class training counts are allocated by largest remainder so the total
training size equals round(frac * n) while each class stays within one
patient of the global ratio.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError

_SPLIT_STAGE = 3  # spawn-key component reserved for split generation


def stage_rng(seed: int, stage: int, index: int | None = None) -> np.random.Generator:
    """Counter-style per-stage RNG derivation from the single run seed."""
    key = (stage,) if index is None else (stage, index)
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


@dataclass
class SplitPlan:
    n_splits: int
    train_frac: float
    seed: int
    splits: list = field(default_factory=list)  # [(train_ids, test_ids), ...]

    def __iter__(self):
        return iter(self.splits)


def _allocate(counts: dict, frac: float, n_train_total: int) -> dict:
    floors = {}
    remainders = {}
    for cls, n in counts.items():
        exact = frac * n
        floors[cls] = int(np.floor(exact))
        remainders[cls] = exact - floors[cls]
    missing = n_train_total - sum(floors.values())
    order = sorted(counts, key=lambda c: (-remainders[c], c))
    for cls in order[:missing]:
        floors[cls] += 1
    return floors


def make_splits(patient_ids, labels, n_splits: int = 130, train_frac: float = 0.7,
                seed: int = 0) -> SplitPlan:
    """Build ``n_splits`` stratified splits over (patient_ids, labels)."""
    patient_ids = [str(p) for p in patient_ids]
    labels = np.asarray(labels).ravel()
    if len(patient_ids) != len(labels):
        raise DataError("patient_ids and labels differ in length")
    if len(set(patient_ids)) != len(patient_ids):
        raise DataError("duplicate patient ids")
    if not 0.0 < train_frac < 1.0:
        raise DataError(f"train_frac must be in (0, 1), got {train_frac}")
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) < 2:
        raise DataError("need two classes for stratified splitting")
    if counts.min() < 2:
        raise DataError(
            f"smallest class has {counts.min()} member(s); need >= 2"
        )
    n = len(patient_ids)
    n_train_total = int(np.floor(train_frac * n + 0.5))
    count_map = {int(c): int(k) for c, k in zip(classes, counts)}
    train_per_class = _allocate(count_map, train_frac, n_train_total)
    for cls, n_tr in train_per_class.items():
        if n_tr < 1 or n_tr >= count_map[cls]:
            raise DataError(
                f"class {cls}: cannot place {n_tr} of {count_map[cls]} patients "
                "in training and keep a nonempty test set"
            )

    by_class = {
        int(c): sorted(p for p, l in zip(patient_ids, labels) if l == c)
        for c in classes
    }
    splits = []
    for i in range(n_splits):
        rng = stage_rng(seed, _SPLIT_STAGE, i)
        train, test = [], []
        for cls in sorted(by_class):
            members = list(by_class[cls])
            rng.shuffle(members)
            k = train_per_class[cls]
            train += members[:k]
            test += members[k:]
        splits.append((sorted(train), sorted(test)))
    return SplitPlan(n_splits=n_splits, train_frac=train_frac, seed=seed,
                     splits=splits)
