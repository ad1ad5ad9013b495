"""Synthetic cohort generator for desk-scale experiments and tests.

Each patient gets one lumpy lesion (two-lobe ellipsoid plus satellite
nodules and spikes) embedded in a noisy background volume.  Class signal is
injected twice: the lesion mean intensity is shifted by ``delta`` for
positive patients, and positive lesions carry larger intensity noise, so
both first-order and texture features are learnable downstream.  Scanner
batches differ in lesion contrast and lesion noise (global affine effects
would be cancelled by whole-volume z-score normalization, so the batch
effect is injected where it survives it).  Biopsy variables are correlated
with the label; demographic variables are pure noise.

Everything is a pure function of the arguments: the same seed reproduces a
byte-identical cohort.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import DataError
from .tables import CohortRecord, save_cohort_records
from .volumes import BinaryMask, ImageVolume, save_mask, save_volume

_BACKGROUND_MEAN = 100.0
_BACKGROUND_SD = 10.0
_LESION_CONTRAST = 15.0
_LESION_SD = (8.0, 10.0)  # per class
_LESION_SD_JITTER = 1.2   # per-patient spread keeps texture non-separating
_PATIENT_JITTER_SD = 4.0
_BATCH_CONTRAST = {"scanner_a": 0.0, "scanner_b": 2.0}
_BATCH_NOISE_GAIN = {"scanner_a": 1.0, "scanner_b": 1.2}
_BIOPSY_PROBS = {0: (0.50, 0.35, 0.15), 1: (0.15, 0.35, 0.50)}


def _lesion_mask(rng: np.random.Generator, size: int) -> np.ndarray:
    zz, yy, xx = np.mgrid[0:size, 0:size, 0:size].astype(np.float64)
    center = size / 2 + rng.uniform(-2, 2, 3)
    semi = rng.uniform(5.0, 7.5, 3)

    def ellipsoid(c, s):
        return (
            ((zz - c[0]) / s[0]) ** 2
            + ((yy - c[1]) / s[1]) ** 2
            + ((xx - c[2]) / s[2]) ** 2
        ) <= 1.0

    mask = ellipsoid(center, semi)
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    lobe_center = center + direction * semi.mean() * rng.uniform(0.7, 1.1)
    mask |= ellipsoid(lobe_center, semi * rng.uniform(0.5, 0.8))

    for _ in range(rng.integers(4, 8)):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        r_sat = rng.uniform(2.0, 4.0)
        gap = rng.uniform(1.0, 6.0)
        c2 = center + d * (semi.mean() + gap + r_sat)
        mask |= ((zz - c2[0]) ** 2 + (yy - c2[1]) ** 2 + (xx - c2[2]) ** 2) <= r_sat**2

    for _ in range(rng.integers(4, 8)):
        d = rng.normal(size=3)
        d /= np.linalg.norm(d)
        length = rng.uniform(3.0, 9.0)
        for t in np.linspace(0.0, 1.0, 30):
            p = np.round(center + d * (semi.mean() * 0.8 + t * length)).astype(int)
            if (p >= 0).all() and (p < size).all():
                mask[p[0], p[1], p[2]] = True
    return mask


def _clinical(rng: np.random.Generator, label: int) -> dict:
    biopsy_p = _BIOPSY_PROBS[label]
    levels = np.array(["1", "2", "3"])
    return {
        "age": float(np.clip(rng.normal(56.0, 10.0), 30.0, 85.0)),
        "menopause": rng.choice(["pre", "post"], p=[0.45, 0.55]),
        "ethnicity": rng.choice(["group_a", "group_b", "group_c"], p=[0.5, 0.3, 0.2]),
        "metastatic": rng.choice(["no", "yes"], p=[0.85, 0.15]),
        "tubule_formation": rng.choice(levels, p=biopsy_p),
        "nuclear_grade": rng.choice(levels, p=biopsy_p),
        "mitotic_rate": rng.choice(levels, p=biopsy_p),
    }


def synth_cohort(
    n_patients: int,
    class_ratio: float,
    seed: int,
    size: int = 48,
    spacing=(1.0, 1.0, 1.0),
    delta: float = 3.0,
) -> list[tuple[ImageVolume, BinaryMask, CohortRecord]]:
    """Deterministically generate ``n_patients`` (volume, mask, record) triples.

    ``class_ratio`` is the positive fraction (rounded to a patient count),
    ``delta`` the class shift of mean lesion intensity.
    """
    if n_patients < 4:
        raise DataError(f"need at least 4 patients, got {n_patients}")
    if not 0.0 < class_ratio < 1.0:
        raise DataError(f"class_ratio must be in (0, 1), got {class_ratio}")
    n_pos = int(round(n_patients * class_ratio))
    if n_pos < 2 or n_patients - n_pos < 2:
        raise DataError(
            f"cohort of {n_patients} at ratio {class_ratio} leaves a class with "
            "fewer than 2 patients; stratified splitting would be impossible"
        )

    master = np.random.SeedSequence(seed)
    label_rng = np.random.default_rng(master.spawn(1)[0])
    labels = np.zeros(n_patients, dtype=int)
    labels[:n_pos] = 1
    label_rng.shuffle(labels)

    patient_seeds = master.spawn(n_patients + 1)[1:]
    cohort = []
    for idx in range(n_patients):
        rng = np.random.default_rng(patient_seeds[idx])
        label = int(labels[idx])
        batch = "scanner_a" if idx % 2 == 0 else "scanner_b"

        mask = _lesion_mask(rng, size)
        volume = rng.normal(
            _BACKGROUND_MEAN,
            _BACKGROUND_SD * _BATCH_NOISE_GAIN[batch],
            (size, size, size),
        )
        lesion_mean = (
            _BACKGROUND_MEAN
            + _LESION_CONTRAST
            + _BATCH_CONTRAST[batch]
            + delta * label
            + rng.normal(0.0, _PATIENT_JITTER_SD)
        )
        lesion_sd = max(
            2.0, rng.normal(_LESION_SD[label], _LESION_SD_JITTER)
        ) * _BATCH_NOISE_GAIN[batch]
        volume[mask] = rng.normal(lesion_mean, lesion_sd, int(mask.sum()))

        record = CohortRecord(
            patient_id=f"p{idx:03d}",
            label=label,
            batch_id=batch,
            clinical=_clinical(rng, label),
        )
        cohort.append(
            (
                ImageVolume(volume.astype(np.float32), spacing),
                BinaryMask(mask, spacing),
                record,
            )
        )
    return cohort


def write_cohort(cohort, out_dir) -> Path:
    """Persist a cohort as ``<pid>.rvol`` + ``<pid>__manual.rmask`` + cohort.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for volume, mask, record in cohort:
        save_volume(volume, out_dir / f"{record.patient_id}.rvol")
        save_mask(mask, out_dir / f"{record.patient_id}__manual.rmask")
        records.append(record)
    save_cohort_records(records, out_dir / "cohort.csv")
    return out_dir
