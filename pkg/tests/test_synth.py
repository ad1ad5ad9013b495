import numpy as np
import pytest

from radstab import DataError
from radstab.synth import synth_cohort, write_cohort
from radstab import load_cohort_records, load_mask, load_volume


def test_class_counts_forced_by_ratio():
    cohort = synth_cohort(40, 0.3, seed=7, size=32)
    labels = [rec.label for _, _, rec in cohort]
    assert sum(labels) == 12
    assert len(labels) - sum(labels) == 28


def test_same_seed_byte_identical():
    a = synth_cohort(6, 0.5, seed=11, size=24)
    b = synth_cohort(6, 0.5, seed=11, size=24)
    for (va, ma, ra), (vb, mb, rb) in zip(a, b):
        assert va.voxels.tobytes() == vb.voxels.tobytes()
        assert ma.voxels.tobytes() == mb.voxels.tobytes()
        assert ra == rb
    c = synth_cohort(6, 0.5, seed=12, size=24)
    assert any(
        va.voxels.tobytes() != vc.voxels.tobytes() for (va, _, _), (vc, _, _) in zip(a, c)
    )


def test_class_conditional_mean_intensity_differs_by_delta():
    delta = 9.0
    cohort = synth_cohort(60, 0.5, seed=3, size=28, delta=delta)
    means = {0: [], 1: []}
    for vol, mask, rec in cohort:
        means[rec.label].append(float(vol.voxels[mask.voxels].mean()))
    diff = np.mean(means[1]) - np.mean(means[0])
    se = np.sqrt(np.var(means[1]) / len(means[1]) + np.var(means[0]) / len(means[0]))
    assert abs(diff - delta) < 3.0 * se + 0.5


def test_biopsy_signal_and_demographic_noise():
    cohort = synth_cohort(200, 0.5, seed=5, size=24)
    pos_grades = [
        int(rec.clinical["nuclear_grade"]) for _, _, rec in cohort if rec.label == 1
    ]
    neg_grades = [
        int(rec.clinical["nuclear_grade"]) for _, _, rec in cohort if rec.label == 0
    ]
    assert np.mean(pos_grades) > np.mean(neg_grades) + 0.4


def test_preconditions():
    with pytest.raises(DataError):
        synth_cohort(3, 0.5, seed=1)
    with pytest.raises(DataError):
        synth_cohort(10, 0.0, seed=1)
    with pytest.raises(DataError):
        synth_cohort(10, 0.05, seed=1)  # would leave < 2 positives


def test_write_cohort_roundtrip(tmp_path):
    cohort = synth_cohort(4, 0.5, seed=2, size=20)
    write_cohort(cohort, tmp_path)
    records = load_cohort_records(tmp_path / "cohort.csv")
    assert [r.patient_id for r in records] == [rec.patient_id for _, _, rec in cohort]
    vol = load_volume(tmp_path / f"{records[0].patient_id}.rvol")
    mask = load_mask(tmp_path / f"{records[0].patient_id}__manual.rmask")
    assert vol.voxels.tobytes() == cohort[0][0].voxels.astype("<f4").tobytes()
    assert (mask.voxels == cohort[0][1].voxels).all()
