import numpy as np
import pandas as pd
import pytest

from radstab import DataError, FeatureTable, NumericalError
from radstab.harmonize import (
    CombatHarmonizer,
    ZscoreScaler,
    combat_apply,
    combat_fit,
    zscore_apply,
    zscore_fit,
)


def table_from(values, batches, prefix="f"):
    values = np.asarray(values, dtype=float)
    n, p = values.shape
    key_cols = pd.DataFrame(
        {
            "patient_id": [f"p{i:03d}" for i in range(n)],
            "mask_variant": ["manual"] * n,
            "label": [i % 2 for i in range(n)],
            "batch_id": list(batches),
        }
    )
    feat_cols = pd.DataFrame(values, columns=[f"{prefix}|x|{j}" for j in range(p)])
    return FeatureTable(pd.concat([key_cols, feat_cols], axis=1))


def test_zscore_hand_example():
    scaler = ZscoreScaler().fit(np.array([[1.0], [2.0], [3.0]]))
    assert scaler.mean_[0] == 2.0
    assert scaler.scale_[0] == pytest.approx(np.sqrt(2.0 / 3.0))
    out = scaler.transform(np.array([[1.0], [2.0], [3.0]]))
    np.testing.assert_allclose(out.ravel(), [-1.22474487, 0.0, 1.22474487])


def test_zscore_constant_column_flagged():
    scaler = ZscoreScaler().fit(np.array([[5.0, 1.0], [5.0, 2.0]]))
    assert scaler.constant_mask_.tolist() == [True, False]
    out = scaler.transform(np.array([[5.0, 1.5]]))
    assert out[0, 0] == 0.0


def test_zscore_apply_to_train_is_standard(rng):
    table = table_from(rng.normal(3, 2, (20, 4)), ["a"] * 20)
    params = zscore_fit(table)
    out = zscore_apply(params, table)
    m = out.matrix()
    np.testing.assert_allclose(m.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(m.std(axis=0), 1.0, atol=1e-12)


def test_zscore_apply_unknown_features(rng):
    table = table_from(rng.normal(size=(6, 2)), ["a"] * 6)
    other = table_from(rng.normal(size=(6, 2)), ["a"] * 6, prefix="g")
    params = zscore_fit(table)
    with pytest.raises(DataError, match="feature names"):
        zscore_apply(params, other)


def test_combat_identical_batches_near_identity(rng):
    base = rng.normal(10, 3, (20, 8))
    values = np.vstack([base, base])
    table = table_from(values, ["a"] * 20 + ["b"] * 20)
    model = combat_fit(table)
    out = combat_apply(model, table)
    assert np.abs(out.matrix() - values).max() <= 1e-6


def test_combat_additive_shift_removed(rng):
    # batch B = batch A + per-feature shift proportional to feature scale
    a = rng.normal(5, 2, (24, 10)) * rng.uniform(0.5, 4.0, 10)
    shift = 0.8 * np.vstack([a, a]).std(axis=0)
    values = np.vstack([a, a + shift])
    table = table_from(values, ["a"] * 24 + ["b"] * 24)
    out = combat_apply(combat_fit(table), table)
    m = out.matrix()
    gap = np.abs(m[:24].mean(axis=0) - m[24:].mean(axis=0))
    assert gap.max() <= 1e-6


def test_combat_multiplicative_effect_equalizes_variance(rng):
    a = rng.normal(0, 1.5, (30, 6)) + rng.normal(2, 1, 6)
    values = np.vstack([a, a * 2.5])
    table = table_from(values, ["a"] * 30 + ["b"] * 30)
    out = combat_apply(combat_fit(table), table)
    m = out.matrix()
    va = m[:30].var(axis=0)
    vb = m[30:].var(axis=0)
    assert np.abs(va - vb).max() <= 1e-4


def test_combat_generic_shift_reduces_f_statistic(rng):
    # generic random shifts: EB shrinkage reduces the between-batch
    # F-statistic for at least 95% of features
    a = rng.normal(0, 1, (30, 200))
    b = rng.normal(0, 1, (30, 200)) + rng.uniform(0.5, 2.0, 200)
    values = np.vstack([a, b])
    table = table_from(values, ["a"] * 30 + ["b"] * 30)
    out = combat_apply(combat_fit(table), table)

    def f_stat(m):
        g1, g2 = m[:30], m[30:]
        between = 30 * ((g1.mean(0) - m.mean(0)) ** 2 + (g2.mean(0) - m.mean(0)) ** 2)
        within = ((g1 - g1.mean(0)) ** 2).sum(0) + ((g2 - g2.mean(0)) ** 2).sum(0)
        return (between / 1.0) / (within / (60 - 2))

    improved = f_stat(out.matrix()) < f_stat(values)
    assert improved.mean() >= 0.95


def test_combat_preserves_shape_and_keys(rng):
    table = table_from(rng.normal(size=(12, 5)), ["a", "b"] * 6)
    out = combat_apply(combat_fit(table), table)
    assert out.frame[["patient_id", "mask_variant", "label", "batch_id"]].equals(
        table.frame[["patient_id", "mask_variant", "label", "batch_id"]]
    )
    assert out.matrix().shape == (12, 5)


def test_combat_single_batch_identity_warns(rng):
    values = rng.normal(size=(10, 3))
    table = table_from(values, ["a"] * 10)
    with pytest.warns(UserWarning, match="single batch"):
        model = combat_fit(table)
    out = combat_apply(model, table)
    np.testing.assert_array_equal(out.matrix(), values)


def test_combat_batch_with_one_row_rejected(rng):
    table = table_from(rng.normal(size=(5, 3)), ["a", "a", "a", "a", "b"])
    with pytest.raises(DataError, match="fewer than 2"):
        combat_fit(table)


def test_combat_nonconvergence_raises(rng):
    values = np.vstack(
        [rng.normal(0, 1, (10, 20)), rng.normal(3, 2, (10, 20))]
    ) * rng.uniform(0.1, 10, 20)
    table = table_from(values, ["a"] * 10 + ["b"] * 10)
    with pytest.raises(NumericalError, match="converge"):
        combat_fit(table, max_iter=1)


def test_combat_convergence_within_budget(rng):
    values = np.vstack([rng.normal(0, 1, (15, 40)), rng.normal(1, 1.5, (15, 40))])
    table = table_from(values, ["a"] * 15 + ["b"] * 15)
    model = combat_fit(table)
    assert all(iters <= 200 for iters in model.n_iter_.values())


def test_combat_transform_unknown_batch(rng):
    table = table_from(rng.normal(size=(8, 2)), ["a"] * 4 + ["b"] * 4)
    model = combat_fit(table)
    with pytest.raises(DataError, match="unknown batches"):
        model.transform(table.matrix(), ["c"] * 8)
