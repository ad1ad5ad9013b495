import numpy as np
import pytest

from radstab import DataError, NumericalError
from radstab.logreg import L1LogisticRegression, fit_l1_logreg


def standardized(rng, n, p):
    X = rng.normal(size=(n, p))
    return (X - X.mean(axis=0)) / X.std(axis=0)


def test_huge_penalty_gives_null_model(rng):
    X = standardized(rng, 60, 4)
    y = (rng.random(60) < 0.3).astype(int)
    model = fit_l1_logreg(X, y, C=1e-6)
    assert np.all(model.coef_ == 0.0)
    base_rate = y.mean()
    assert model.intercept_ == pytest.approx(np.log(base_rate / (1 - base_rate)), abs=1e-4)


def test_informative_vs_noise_feature(rng):
    n = 80
    signal = np.concatenate([-np.abs(rng.normal(2, 0.3, n // 2)),
                             np.abs(rng.normal(2, 0.3, n // 2))])
    noise = rng.normal(size=n)
    X = np.column_stack([signal, noise])
    X = (X - X.mean(0)) / X.std(0)
    y = np.array([0] * (n // 2) + [1] * (n // 2))
    model = fit_l1_logreg(X, y, C=1.0)
    assert abs(model.coef_[0]) > 0
    assert model.coef_[1] == 0.0
    assert model.kkt_violation(X, y) <= 1e-6


def test_matches_cvxpy_oracle(rng):
    import cvxpy as cp

    n, p = 40, 5
    X = standardized(rng, n, p)
    w = np.array([1.5, -2.0, 0.0, 0.0, 0.5])
    y = (X @ w + rng.normal(0, 1, n) > 0).astype(int)

    for C in (0.5, 1.0, 4.0):
        model = fit_l1_logreg(X, y, C=C, tol=1e-9)
        t = 2.0 * y - 1.0
        beta = cp.Variable(p)
        b0 = cp.Variable()
        objective = cp.sum(cp.logistic(-cp.multiply(t, X @ beta + b0)))
        objective = objective + (1.0 / C) * cp.norm1(beta)
        problem = cp.Problem(cp.Minimize(objective))
        problem.solve(solver=cp.CLARABEL)
        assert np.abs(model.coef_ - beta.value).max() <= 1e-4
        assert abs(model.intercept_ - float(b0.value)) <= 1e-3


def test_kkt_certificate_on_fitted_models(rng):
    for seed in range(3):
        r = np.random.default_rng(seed)
        X = standardized(r, 50, 8)
        y = (X[:, 0] + 0.5 * r.normal(size=50) > 0).astype(int)
        model = fit_l1_logreg(X, y, C=1.0)
        assert model.kkt_violation(X, y) <= 1e-6


def test_l1_produces_sparsity(rng):
    X = standardized(rng, 60, 30)
    y = (X[:, 0] - X[:, 1] + rng.normal(0, 0.5, 60) > 0).astype(int)
    model = fit_l1_logreg(X, y, C=1.0)
    assert (model.coef_ != 0).sum() < 30


def test_nonconvergence_raises(rng):
    X = standardized(rng, 40, 5)
    y = (X[:, 0] > 0).astype(int)
    with pytest.raises(NumericalError, match="KKT violation"):
        L1LogisticRegression(C=1.0, max_iter=1, tol=1e-12).fit(X, y)


def test_predict_api(rng):
    X = standardized(rng, 30, 3)
    y = (X[:, 0] > 0).astype(int)
    model = fit_l1_logreg(X, y)
    proba = model.predict_proba(X)
    assert proba.shape == (30, 2)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0)
    assert set(model.predict(X)) <= {0, 1}
    assert model.get_params()["C"] == 1.0
    with pytest.raises(DataError):
        model.decision_function(X[:, :2])


def test_validation_errors(rng):
    X = standardized(rng, 10, 2)
    with pytest.raises(DataError):
        fit_l1_logreg(X, [0, 1, 2] * 3 + [0])
    with pytest.raises(DataError):
        fit_l1_logreg(X, np.zeros(10), C=-1.0)
