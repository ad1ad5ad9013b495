"""The per-split prediction protocol and best-attribution aggregation.

Baseline stage, per stratified split: standardize on the training rows,
oversample the training minority to parity, keep the 50 best features by
ANOVA F, fit the L1 logistic model (C = 1) with a 5-fold cross-validation
sanity score on the training rows, evaluate on the held-out test rows, and
rank features by mean absolute attribution.  The second stage reruns the
same protocol with a fixed feature list: the features whose per-split
top-10 attribution appearances reach the aggregation threshold.

Held-out test rows never contribute to standardization statistics,
oversampling neighbourhoods, or feature selection.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import DataError
from .harmonize import CombatHarmonizer, ZscoreScaler
from .logreg import L1LogisticRegression
from .metrics import SkillScores, skill
from .sampling import Smote
from .select import anova_f_select
from .shap_linear import LinearShapExplainer, ShapRanking
from .splits import SplitPlan, stage_rng
from .tables import CohortRecord

_STAGE_SMOTE = 4
_STAGE_CV = 5


@dataclass
class ProtocolConfig:
    C: float = 1.0
    smote_k: int = 5
    n_keep: int = 50
    threshold: float = 0.5
    cv_folds: int = 5
    shap_top_k: int = 10
    shap_on: str = "test"  # "test" | "train"
    smote_after_scaling: bool = True
    combat_per_split: bool = False
    solver_tol: float = 1e-7
    solver_max_iter: int = 200


@dataclass
class ModelRun:
    split_index: int
    feature_names: list
    coef: np.ndarray
    intercept: float
    test_scores: SkillScores
    shap: ShapRanking
    cv_auc_mean: float
    cv_auc_std: float
    n_cv_folds: int
    train_ids: list = field(default_factory=list)
    test_ids: list = field(default_factory=list)

    def record(self) -> dict:
        """JSON-serializable summary of this split's model."""
        def _num(v):
            return None if np.isnan(v) else float(v)

        return {
            "split": self.split_index,
            "features": list(self.feature_names),
            "coef": [float(c) for c in self.coef],
            "intercept": self.intercept,
            "nonzero_coef": int((self.coef != 0).sum()),
            "cv_auc_mean": _num(self.cv_auc_mean),
            "cv_auc_std": _num(self.cv_auc_std),
            "scores": self.test_scores.as_dict(),
            "shap_top": list(self.shap.top),
        }


def _stratified_folds(y: np.ndarray, n_folds: int, rng) -> list[np.ndarray]:
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for cls in (0, 1):
        idx = np.where(y == cls)[0]
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            folds[pos % n_folds].append(int(i))
    return [np.array(sorted(f), dtype=int) for f in folds]


def _cv_auc(X, y, config: ProtocolConfig, rng) -> tuple[float, float, int]:
    n_folds = min(config.cv_folds, int(y.sum()), int((1 - y).sum()))
    if n_folds < 2:
        return float("nan"), float("nan"), 0
    folds = _stratified_folds(y, n_folds, rng)
    aucs = []
    for k, val_idx in enumerate(folds):
        train_idx = np.setdiff1d(np.arange(len(y)), val_idx)
        y_tr, y_val = y[train_idx], y[val_idx]
        if len(np.unique(y_val)) < 2 or len(np.unique(y_tr)) < 2:
            continue
        X_tr, y_tr = Smote(k=config.smote_k).fit_resample(
            X[train_idx], y_tr, rng
        )
        model = L1LogisticRegression(
            C=config.C, tol=config.solver_tol, max_iter=config.solver_max_iter
        ).fit(X_tr, y_tr)
        aucs.append(skill(y_val, model.predict_proba(X[val_idx])[:, 1]).roc_auc)
    if not aucs:
        return float("nan"), float("nan"), 0
    return float(np.mean(aucs)), float(np.std(aucs)), len(aucs)


def run_protocol(
    X: pd.DataFrame,
    y: pd.Series,
    plan: SplitPlan,
    stage="baseline",
    config: ProtocolConfig | None = None,
    batches: pd.Series | None = None,
) -> list[ModelRun]:
    """Run the per-split protocol.

    ``stage`` is either ``"baseline"`` (ANOVA-F pre-selection) or an explicit
    feature list (the aggregated best-attribution stage).  ``X`` holds one
    mask variant's rows indexed by patient id.
    """
    config = config or ProtocolConfig()
    feature_names = [str(c) for c in X.columns]
    if stage != "baseline":
        fixed = [str(f) for f in stage]
        missing = [f for f in fixed if f not in feature_names]
        if missing:
            raise DataError(f"best-attribution features not in table: {missing[:5]}")
        if not fixed:
            raise DataError("empty feature list for the fixed-feature stage")
    if config.combat_per_split and batches is None:
        raise DataError("combat_per_split requires a batch vector")

    runs = []
    for i, (train_ids, test_ids) in enumerate(plan):
        missing = [p for p in train_ids + test_ids if p not in X.index]
        if missing:
            raise DataError(f"split {i} references unknown patients: {missing[:5]}")
        X_tr_raw = X.loc[train_ids].to_numpy(dtype=np.float64)
        X_te_raw = X.loc[test_ids].to_numpy(dtype=np.float64)
        y_tr = y.loc[train_ids].to_numpy(dtype=np.int64)
        y_te = y.loc[test_ids].to_numpy(dtype=np.int64)

        if config.combat_per_split:
            combat = CombatHarmonizer()
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                combat.fit(X_tr_raw, batches.loc[train_ids].to_numpy())
                X_tr_raw = combat.transform(X_tr_raw, batches.loc[train_ids].to_numpy())
                X_te_raw = combat.transform(X_te_raw, batches.loc[test_ids].to_numpy())

        rng = stage_rng(plan.seed, _STAGE_SMOTE, i)
        if config.smote_after_scaling:
            scaler = ZscoreScaler().fit(X_tr_raw)
            X_tr = scaler.transform(X_tr_raw)
            X_te = scaler.transform(X_te_raw)
            X_fit, y_fit = Smote(k=config.smote_k).fit_resample(X_tr, y_tr, rng)
        else:
            X_bal, y_fit = Smote(k=config.smote_k).fit_resample(X_tr_raw, y_tr, rng)
            scaler = ZscoreScaler().fit(X_bal)
            X_fit = scaler.transform(X_bal)
            X_tr = scaler.transform(X_tr_raw)
            X_te = scaler.transform(X_te_raw)

        if stage == "baseline":
            selected = anova_f_select(X_fit, y_fit, feature_names, config.n_keep)
        else:
            selected = [feature_names.index(f) for f in fixed]
        sel_names = [feature_names[j] for j in selected]
        X_fit_sel = X_fit[:, selected]
        X_tr_sel = X_tr[:, selected]
        X_te_sel = X_te[:, selected]

        cv_rng = stage_rng(plan.seed, _STAGE_CV, i)
        cv_mean, cv_std, n_cv = _cv_auc(X_tr_sel, y_tr, config, cv_rng)

        model = L1LogisticRegression(
            C=config.C, tol=config.solver_tol, max_iter=config.solver_max_iter
        ).fit(X_fit_sel, y_fit)

        scores = skill(y_te, model.predict_proba(X_te_sel)[:, 1], config.threshold)
        explainer = LinearShapExplainer(model, X_tr_sel)
        eval_matrix = X_te_sel if config.shap_on == "test" else X_tr_sel
        ranking = explainer.ranking(eval_matrix, sel_names, k=config.shap_top_k)

        runs.append(
            ModelRun(
                split_index=i,
                feature_names=sel_names,
                coef=model.coef_.copy(),
                intercept=model.intercept_,
                test_scores=scores,
                shap=ranking,
                cv_auc_mean=cv_mean,
                cv_auc_std=cv_std,
                n_cv_folds=n_cv,
                train_ids=list(train_ids),
                test_ids=list(test_ids),
            )
        )
    return runs


def best_shap_aggregate(per_split_top: list, min_count: int = 15) -> list[str]:
    """Features appearing at least ``min_count`` times across per-split top lists.

    Ordered by count descending, ties by name; empty result only warns so a
    caller can skip the second stage gracefully.
    """
    if not per_split_top:
        raise DataError("no per-split rankings given")
    counter: Counter = Counter()
    for top in per_split_top:
        counter.update(str(f) for f in top)
    ranked = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [name for name, count in ranked if count >= min_count]
    if not kept:
        warnings.warn(
            f"no feature reached {min_count} appearances; best-attribution "
            "stage will be skipped"
        )
    return kept


def encode_clinical(records: list[CohortRecord], which: str):
    """Design matrix for demographic-only or biopsy-only models.

    Numeric variables pass through; categorical variables are one-hot
    encoded over all observed levels.  Rows with missing values are dropped
    and counted.
    """
    if which == "demographic":
        variables = CohortRecord.DEMOGRAPHIC_VARS
    elif which == "biopsy":
        variables = CohortRecord.BIOPSY_VARS
    else:
        raise DataError(f"unknown clinical set '{which}'")
    kept, dropped = [], 0
    for rec in records:
        if any(v not in rec.clinical or rec.clinical[v] in ("", None) for v in variables):
            dropped += 1
            continue
        kept.append(rec)
    if len(kept) < 4:
        raise DataError(f"only {len(kept)} records have complete '{which}' variables")

    columns: dict[str, list] = {}
    for var in variables:
        values = [rec.clinical[var] for rec in kept]
        if all(isinstance(v, (int, float)) for v in values):
            columns[var] = [float(v) for v in values]
        else:
            levels = sorted({str(v) for v in values})
            for level in levels:
                columns[f"{var}={level}"] = [
                    1.0 if str(v) == level else 0.0 for v in values
                ]
    X = pd.DataFrame(columns, index=[rec.patient_id for rec in kept])
    y = pd.Series([rec.label for rec in kept], index=X.index, name="label")
    return X, y, dropped


def clinical_models(
    records: list[CohortRecord],
    plan: SplitPlan,
    which: str,
    config: ProtocolConfig | None = None,
) -> list[ModelRun]:
    """Run the protocol on demographic-only or biopsy-only variables."""
    config = config or ProtocolConfig()
    X, y, dropped = encode_clinical(records, which)
    if dropped:
        warnings.warn(f"dropped {dropped} records with missing '{which}' variables")
    plan_ids = {p for train, test in plan for p in train + test}
    missing = plan_ids - set(X.index)
    if missing:
        filtered = [
            (
                [p for p in train if p in X.index],
                [p for p in test if p in X.index],
            )
            for train, test in plan
        ]
        plan = SplitPlan(plan.n_splits, plan.train_frac, plan.seed, filtered)
    return run_protocol(X, y, plan, stage="baseline", config=config)
