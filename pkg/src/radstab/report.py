"""Report generation: result tables and plot-ready figure data + SVGs.

Reads the artifacts earlier stages left in the run directory and renders:

* ``table1_dsc.csv``      variant overlap summary (mean +/- sd), fixed order
* ``table3_skill.csv``    per-experiment "mean (lo, hi)" skill scores
* ``table4_ks.csv``       score-distribution comparisons, Bonferroni adjusted
* ``fig4_*``              per-experiment ROC-AUC boxplot quantiles
* ``fig5_*``              ICC / Pearson per tracked feature across variants
* ``fig6_*``              reliability score bars per tracked feature
* ``fig7_*``              DSC vs relative-error scatter data

Missing inputs raise :class:`DataError` naming the stage that produces them.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
import pandas as pd

from . import svgplot
from .errors import DataError
from .stats import format_ci, ks_two_sample, mean_ci95

VARIANT_ORDER = ("closing_08", "closing_07", "closing_06", "ellipsoid_04")
METRICS = ("accuracy", "balanced_accuracy", "recall", "specificity", "roc_auc")


def _require(path, producer: str) -> Path:
    candidates = path if isinstance(path, (list, tuple)) else [path]
    for candidate in candidates:
        if Path(candidate).exists():
            return Path(candidate)
    first = Path(candidates[0])
    raise DataError(
        f"missing artifact {first.name}: run `radstab {producer}` first "
        f"(expected at {first})"
    )


def _write_csv(path: Path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)


def _experiment_order(names):
    def key(name):
        if name == "demographic":
            return (0, 0)
        if name == "biopsy":
            return (1, 0)
        for prefix, rank in (("baseline", 2), ("best_shap", 3)):
            if name.startswith(prefix):
                variant = name[len(prefix) + 1 :]
                vorder = (["manual"] + list(VARIANT_ORDER)).index(variant) \
                    if variant in ("manual",) + VARIANT_ORDER else 99
                return (rank, vorder)
        return (9, 0)

    return sorted(names, key=key)


def build_report(run_dir, out_dir=None) -> Path:
    run_dir = Path(run_dir)
    out = Path(out_dir) if out_dir else run_dir / "report"
    out.mkdir(parents=True, exist_ok=True)

    _report_dsc(run_dir, out)
    scores = _load_skill_scores(run_dir)
    _report_skill(scores, out)
    _report_ks(scores, out)
    _report_boxplots(scores, out)
    _report_stability(run_dir, out)
    return out


def _report_dsc(run_dir: Path, out: Path):
    dsc_path = _require(
        [run_dir / "dsc.csv", run_dir / "variants" / "dsc.csv"], "variants"
    )
    frame = pd.read_csv(dsc_path)
    rows = []
    for variant in VARIANT_ORDER:
        sub = frame[frame["variant"] == variant]["dsc"]
        if sub.empty:
            continue
        rows.append(
            [variant, repr(float(sub.mean())), repr(float(sub.std(ddof=1)))]
        )
    if not rows:
        raise DataError(f"{dsc_path} holds no known variants")
    _write_csv(out / "table1_dsc.csv", ["variant", "mean_dsc", "sd_dsc"], rows)


def _load_skill_scores(run_dir: Path) -> dict:
    runs_dir = _require(run_dir / "runs", "train")
    scores = {}
    for sub in sorted(runs_dir.iterdir()):
        csv_path = sub / "skill_scores.csv"
        if sub.is_dir() and csv_path.exists():
            scores[sub.name] = pd.read_csv(csv_path)
    if not scores:
        raise DataError(
            f"no skill_scores.csv under {runs_dir}: run `radstab train` first"
        )
    return scores


def _report_skill(scores: dict, out: Path):
    rows = []
    for name in _experiment_order(scores):
        frame = scores[name]
        row = [name]
        for metric in METRICS:
            row.append(format_ci(*mean_ci95(frame[metric].to_numpy())))
        rows.append(row)
    _write_csv(out / "table3_skill.csv", ["experiment", *METRICS], rows)


def _report_ks(scores: dict, out: Path):
    names = _experiment_order(scores)
    pairs = []
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            baseline_vs_best = a.startswith("baseline") and b.startswith("best_shap")
            best_vs_best = a.startswith("best_shap") and b.startswith("best_shap")
            clinical_vs_best = a in ("demographic", "biopsy") and b.startswith("best_shap")
            if baseline_vs_best or best_vs_best or clinical_vs_best:
                pairs.append((a, b))
    results = []
    for a, b in pairs:
        res = ks_two_sample(
            scores[a]["roc_auc"].to_numpy(), scores[b]["roc_auc"].to_numpy()
        )
        results.append((a, b, res))
    m = max(len(results), 1)
    rows = [
        [
            a,
            b,
            repr(res.statistic),
            repr(res.p_value),
            repr(min(1.0, res.p_value * m)),
            "*" if res.p_value * m < 0.05 else "-",
        ]
        for a, b, res in results
    ]
    _write_csv(
        out / "table4_ks.csv",
        ["model_1", "model_2", "statistic", "p_value", "p_adjusted", "significant"],
        rows,
    )


def _report_boxplots(scores: dict, out: Path):
    names = _experiment_order(scores)
    rows = []
    stats = []
    for name in names:
        auc = scores[name]["roc_auc"].to_numpy()
        q = np.percentile(auc, [0, 25, 50, 75, 100])
        rows.append([name] + [repr(float(v)) for v in q])
        stats.append(tuple(q))
    _write_csv(
        out / "fig4_boxplots.csv",
        ["experiment", "min", "q1", "median", "q3", "max"],
        rows,
    )
    svgplot.boxplot_svg(
        out / "fig4_boxplots.svg", names, stats,
        "Test ROC-AUC across data splits", "ROC-AUC",
    )


def _slug(feature: str) -> str:
    return feature.replace("|", "_").replace(" ", "").replace("/", "-")


def _report_stability(run_dir: Path, out: Path):
    stab_path = _require(run_dir / "stability.csv", "stability")
    frame = pd.read_csv(stab_path)
    tracked_path = run_dir / "tracked_features.txt"
    if tracked_path.exists():
        tracked = [l.strip() for l in tracked_path.read_text().splitlines() if l.strip()]
    else:
        tracked = sorted(frame["feature"].unique())[:4]
    variants = [v for v in VARIANT_ORDER if v in set(frame["variant"])]

    rows = []
    icc_series = {}
    pearson_series = {}
    for feature in tracked:
        sub = frame[frame["feature"] == feature].set_index("variant")
        icc_series[feature] = [
            float(sub["icc"].get(v, np.nan)) for v in variants
        ]
        pearson_series[feature] = [
            float(sub["pearson"].get(v, np.nan)) for v in variants
        ]
        for v in variants:
            if v in sub.index:
                rows.append([feature, v, repr(float(sub.loc[v, "icc"])),
                             repr(float(sub.loc[v, "pearson"]))])
    median_icc = frame.groupby("variant")["icc"].median()
    icc_series["median (all features)"] = [
        float(median_icc.get(v, np.nan)) for v in variants
    ]
    median_r = frame.groupby("variant")["pearson"].median()
    pearson_series["median (all features)"] = [
        float(median_r.get(v, np.nan)) for v in variants
    ]
    _write_csv(out / "fig5_icc.csv", ["feature", "variant", "icc", "pearson"], rows)
    svgplot.lines_svg(out / "fig5_icc.svg", list(variants), icc_series,
                      "Agreement with the reference mask", "ICC(2,1)")
    svgplot.lines_svg(out / "fig5_pearson.svg", list(variants), pearson_series,
                      "Correlation with the reference mask", "Pearson r")

    score_cols = ("quality", "consistency", "robustness", "instability", "unclassified")
    bar_rows = []
    for feature in tracked:
        sub = frame[frame["feature"] == feature]
        if sub.empty:
            continue
        first = sub.iloc[0]
        bar_rows.append([feature] + [repr(float(first[c])) for c in score_cols])
    _write_csv(out / "fig6_reliability.csv", ["feature", *score_cols], bar_rows)
    if bar_rows:
        svgplot.grouped_bars_svg(
            out / "fig6_reliability.svg",
            [r[0].split("|")[-1] for r in bar_rows],
            list(score_cols),
            [[float(v) for v in r[1:]] for r in bar_rows],
            "Reliability scores of tracked features", "fraction of patients",
        )

    scatter_dir = run_dir / "scatter"
    if scatter_dir.exists():
        for feature in tracked:
            src = scatter_dir / f"{_slug(feature)}.csv"
            if not src.exists():
                continue
            data = pd.read_csv(src)
            points = list(zip(data["dsc"], data["rel_err"]))
            svgplot.scatter_svg(
                out / f"fig7_{_slug(feature)}.svg", points,
                feature, "DSC", "relative error",
            )
            (out / f"fig7_{_slug(feature)}.csv").write_bytes(src.read_bytes())
