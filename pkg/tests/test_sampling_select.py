import numpy as np
import pytest

from radstab import DataError
from radstab.sampling import smote
from radstab.select import AnovaFSelector, anova_f_select, anova_f_values


def test_smote_balanced_input_unchanged(rng):
    X = rng.normal(size=(10, 3))
    y = np.array([0, 1] * 5)
    X2, y2 = smote(X, y, seed=0)
    np.testing.assert_array_equal(X2, X)
    np.testing.assert_array_equal(y2, y)


def test_smote_convexity_two_points():
    X = np.array([[0.0], [1.0], [5.0], [6.0], [7.0]])
    y = np.array([1, 1, 0, 0, 0])
    X2, y2 = smote(X, y, k=1, seed=4)
    synthetic = X2[len(X):]
    assert len(synthetic) == 1
    assert 0.0 <= synthetic[0, 0] <= 1.0


def test_smote_parity_counts(rng):
    X = rng.normal(size=(100, 4))
    y = np.array([1] * 30 + [0] * 70)
    X2, y2 = smote(X, y, seed=1)
    assert len(X2) == 140
    assert (y2 == 1).sum() == 70
    assert (y2 == 0).sum() == 70
    np.testing.assert_array_equal(X2[:100], X)


def test_smote_synthetic_on_segments(rng):
    X = rng.normal(size=(40, 2))
    y = np.array([1] * 8 + [0] * 32)
    X2, y2 = smote(X, y, k=3, seed=7)
    minority = X[y == 1]
    for s in X2[40:]:
        # each synthetic point lies on a segment between two minority points
        found = False
        for i in range(len(minority)):
            for j in range(len(minority)):
                if i == j:
                    continue
                d = minority[j] - minority[i]
                denom = (d**2).sum()
                if denom == 0:
                    continue
                u = ((s - minority[i]) @ d) / denom
                if -1e-9 <= u <= 1 + 1e-9 and np.allclose(
                    minority[i] + u * d, s, atol=1e-9
                ):
                    found = True
        assert found


def test_smote_k_reduced_with_warning(rng):
    X = rng.normal(size=(10, 2))
    y = np.array([1, 1, 1] + [0] * 7)
    with pytest.warns(UserWarning, match="using k=2"):
        X2, y2 = smote(X, y, k=5, seed=2)
    assert (y2 == 1).sum() == 7


def test_smote_single_minority_rejected(rng):
    X = rng.normal(size=(5, 2))
    y = np.array([1, 0, 0, 0, 0])
    with pytest.raises(DataError, match="at least 2"):
        smote(X, y, seed=0)


def test_smote_deterministic(rng):
    X = rng.normal(size=(30, 3))
    y = np.array([1] * 9 + [0] * 21)
    a = smote(X, y, seed=11)[0]
    b = smote(X, y, seed=11)[0]
    np.testing.assert_array_equal(a, b)


def test_anova_f_hand_example():
    X = np.array([[1.0], [2.0], [3.0], [4.0], [5.0], [6.0]])
    y = np.array([0, 0, 0, 1, 1, 1])
    f = anova_f_values(X, y)
    assert f[0] == pytest.approx(13.5)


def test_anova_f_conventions(rng):
    n = 20
    y = np.array([0, 1] * 10)
    X = np.column_stack(
        [
            rng.normal(size=n),      # noise
            y.astype(float),         # equals the label -> +inf
            np.full(n, 3.0),         # fully constant -> 0
        ]
    )
    f = anova_f_values(X, y)
    assert np.isinf(f[1])
    assert f[2] == 0.0
    order = anova_f_select(X, y, ["noise", "label_copy", "const"], n_keep=3)
    assert order[0] == 1
    assert order[-1] == 2


def test_anova_tie_break_lexicographic():
    X = np.zeros((6, 3))
    y = np.array([0, 0, 0, 1, 1, 1])
    names = ["b", "a", "c"]
    order = anova_f_select(X, y, names, n_keep=3)
    assert [names[j] for j in order] == ["a", "b", "c"]


def test_selector_estimator_api(rng):
    X = rng.normal(size=(30, 10))
    y = np.array([0, 1] * 15)
    X[:, 4] += 3 * y
    sel = AnovaFSelector(n_keep=2).fit(X, y)
    assert 4 in sel.support_
    assert sel.transform(X).shape == (30, 2)
    assert sel.get_params()["n_keep"] == 2
