"""The ``radstab`` command-line workbench.

Subcommands cover the full experiment loop::

    synth      generate a synthetic cohort (volumes, masks, cohort.csv)
    variants   build the four segmentation variants + DSC table
    extract    compute the feature table for every (patient, variant)
    harmonize  remove batch effects from a feature table
    screen     univariate KS / chi-squared screening with Bonferroni
    train      per-split models: baseline, fixed-feature, or clinical
    stability  ICC / Pearson / reliability scores across variants
    report     result tables and figure data (CSV + SVG)

Exit codes: 0 ok, 2 usage, 3 data error, 4 numerical failure.  Outputs are
written to a temporary sibling and renamed into place only on success, so a
failed run never leaves a partial artifact behind.  Worker count is bounded
by the ``RADSTAB_THREADS`` environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import shutil
import sys
import warnings
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pandas as pd

from .config import RunConfig, load_config, save_config
from .errors import DataError, NumericalError
from .extract import extract_cohort, worker_count
from .harmonize import combat_apply, combat_fit
from .perturb import make_variants
from .protocol import best_shap_aggregate, clinical_models, run_protocol
from .report import build_report
from .splits import make_splits
from .stability import stability_report
from .stats import univariate_screen
from .synth import synth_cohort, write_cohort
from .tables import (
    load_cohort_records,
    load_feature_table,
    save_feature_table,
)
from .volumes import load_mask, save_mask


@contextmanager
def _atomic_file(final_path):
    """Yield a temp path; rename onto ``final_path`` only on success."""
    final = Path(final_path)
    final.parent.mkdir(parents=True, exist_ok=True)
    tmp = final.with_name(final.name + ".tmp")
    try:
        yield tmp
        os.replace(tmp, final)
    except BaseException:
        if tmp.exists():
            tmp.unlink()
        raise


@contextmanager
def _atomic_dir(final_path):
    final = Path(final_path)
    final.parent.mkdir(parents=True, exist_ok=True)
    tmp = final.with_name(final.name + ".tmp")
    if tmp.exists():
        shutil.rmtree(tmp)
    tmp.mkdir()
    try:
        yield tmp
        if final.exists():
            shutil.rmtree(final)
        os.replace(tmp, final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def _config_from(args) -> RunConfig:
    return load_config(args.config) if args.config else RunConfig()


def _first_existing(candidates, producer):
    for c in candidates:
        if Path(c).exists():
            return Path(c)
    raise DataError(
        f"missing artifact {Path(candidates[0]).name}: run `radstab {producer}` "
        f"first (looked in {', '.join(str(c) for c in candidates)})"
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    cfg = _config_from(args)
    n = args.n if args.n is not None else cfg.synth_n
    ratio = args.ratio if args.ratio is not None else cfg.synth_ratio
    seed = args.seed if args.seed is not None else cfg.seed
    size = args.size if args.size is not None else cfg.synth_size
    cohort = synth_cohort(n, ratio, seed=seed, size=size, delta=cfg.synth_delta)
    with _atomic_dir(args.out) as tmp:
        write_cohort(cohort, tmp)
        save_config(cfg, Path(tmp) / "synth_config.txt")
    print(f"wrote {n}-patient cohort to {args.out}")
    return 0


def cmd_variants(args) -> int:
    cfg = _config_from(args)
    cohort_dir = Path(args.cohort)
    records = load_cohort_records(
        _first_existing([cohort_dir / "cohort.csv"], "synth")
    )
    rows = []
    with _atomic_dir(args.out) as tmp:
        for rec in records:
            mask = load_mask(
                _first_existing(
                    [cohort_dir / f"{rec.patient_id}__manual.rmask.json"], "synth"
                )
            )
            vs = make_variants(mask, closing_recipes=cfg.closing_recipes())
            for name in sorted(vs.variants):
                save_mask(vs.variants[name], Path(tmp) / f"{rec.patient_id}__{name}.rmask")
                rows.append((rec.patient_id, name, vs.dsc[name],
                             int(vs.border_contact[name])))
            for msg in vs.warnings:
                print(f"warning [{rec.patient_id}]: {msg}", file=sys.stderr)
        frame = pd.DataFrame(rows, columns=["patient_id", "variant", "dsc",
                                            "border_contact"])
        frame.to_csv(Path(tmp) / "dsc.csv", index=False)
    print(f"wrote variants for {len(records)} patients to {args.out}")
    return 0


def cmd_extract(args) -> int:
    cfg = _config_from(args)
    records = load_cohort_records(
        _first_existing([Path(args.cohort) / "cohort.csv"], "synth")
    )
    if args.variants and not Path(args.variants).exists():
        raise DataError(
            f"missing artifact {args.variants}: run `radstab variants` first"
        )
    table = extract_cohort(
        args.cohort,
        args.variants,
        records,
        config=cfg.extraction_config(),
        workers=args.workers,
        dump_filtered_dir=args.dump_filtered,
    )
    with _atomic_file(args.out) as tmp:
        save_feature_table(table, tmp)
    print(f"extracted {table.n_features} features x {len(table)} rows -> {args.out}")
    return 0


def cmd_harmonize(args) -> int:
    cfg = _config_from(args)
    if args.batch_col != "batch_id":
        raise DataError(
            f"feature tables store the batch variable in 'batch_id'; "
            f"got --batch-col {args.batch_col}"
        )
    table = load_feature_table(
        _first_existing([args.infile], "extract")
    )
    model = combat_fit(table, tol=cfg.combat_tol, max_iter=cfg.combat_max_iter)
    out = combat_apply(model, table)
    with _atomic_file(args.out) as tmp:
        save_feature_table(out, tmp)
    print(f"harmonized {table.n_features} features across "
          f"{len(model.batch_levels_) if not model.single_batch_ else 1} batches -> {args.out}")
    return 0


def cmd_screen(args) -> int:
    table = load_feature_table(_first_existing([args.infile], "extract"))
    clinical = None
    if args.cohort_csv:
        records = load_cohort_records(args.cohort_csv)
        cat_vars = [
            v for v in records[0].clinical
            if v != "age"
        ]
        clinical = pd.DataFrame(
            {v: [str(r.clinical.get(v, "")) for r in records] for v in cat_vars},
            index=[r.patient_id for r in records],
        )
    out = univariate_screen(table, variant=args.variant, clinical=clinical)
    with _atomic_file(args.out) as tmp:
        out.to_csv(tmp, index=False)
    n_sig = int((out["p_adjusted"] < 0.05).sum())
    print(f"screened {len(out)} variables; {n_sig} significant after Bonferroni")
    return 0


def _write_runs(runs, out_dir: Path, write_best_list: bool, min_count: int):
    records = [r.record() for r in runs]
    (out_dir / "models.json").write_text(
        json.dumps(records, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    score_rows = []
    shap_rows = []
    for r in runs:
        s = r.test_scores
        score_rows.append(
            [r.split_index, repr(s.accuracy), repr(s.recall), repr(s.specificity),
             repr(s.balanced_accuracy), repr(s.roc_auc), repr(r.cv_auc_mean),
             repr(r.cv_auc_std), r.n_cv_folds]
        )
        values = dict(zip(r.shap.feature_names, r.shap.mean_abs))
        for rank, feature in enumerate(r.shap.top, 1):
            shap_rows.append([r.split_index, rank, feature, repr(float(values[feature]))])
    import csv as _csv

    with open(out_dir / "skill_scores.csv", "w", newline="", encoding="utf-8") as fh:
        w = _csv.writer(fh)
        w.writerow(["split", "accuracy", "recall", "specificity",
                    "balanced_accuracy", "roc_auc", "cv_auc_mean", "cv_auc_std",
                    "n_cv_folds"])
        w.writerows(score_rows)
    with open(out_dir / "shap_top10.csv", "w", newline="", encoding="utf-8") as fh:
        w = _csv.writer(fh)
        w.writerow(["split", "rank", "feature", "mean_abs_shap"])
        w.writerows(shap_rows)
    if write_best_list:
        best = best_shap_aggregate([r.shap.top for r in runs], min_count=min_count)
        (out_dir / "best_shap_features.txt").write_text(
            "\n".join(best) + ("\n" if best else ""), encoding="utf-8"
        )


def cmd_train(args) -> int:
    cfg = _config_from(args)
    n_splits = args.splits if args.splits is not None else cfg.n_splits
    seed = args.seed if args.seed is not None else cfg.seed
    min_count = args.min_count if args.min_count is not None else cfg.min_count
    pconfig = cfg.protocol_config()
    if args.combat_per_split:
        pconfig.combat_per_split = True

    if args.clinical:
        if not args.cohort_csv:
            raise DataError("--clinical requires --cohort-csv")
        records = load_cohort_records(args.cohort_csv)
        plan = make_splits(
            [r.patient_id for r in records],
            [r.label for r in records],
            n_splits=n_splits,
            train_frac=cfg.train_frac,
            seed=seed,
        )
        runs = clinical_models(records, plan, args.clinical, pconfig)
        name = args.stage_name or args.clinical
    else:
        if not args.infile:
            raise DataError("train needs --in FEATURES.csv (or --clinical)")
        table = load_feature_table(_first_existing([args.infile], "extract"))
        X, y, batch = table.variant_slice(args.variant)
        plan = make_splits(
            list(X.index), y.to_numpy(), n_splits=n_splits,
            train_frac=cfg.train_frac, seed=seed,
        )
        if args.best_shap_from:
            feats = [
                line.strip()
                for line in Path(
                    _first_existing([args.best_shap_from], "train")
                ).read_text().splitlines()
                if line.strip()
            ]
            if not feats:
                raise DataError(
                    f"{args.best_shap_from} lists no features; "
                    "the aggregation threshold may be too high"
                )
            stage = feats
            name = args.stage_name or f"best_shap_{args.variant}"
        else:
            stage = "baseline"
            name = args.stage_name or f"baseline_{args.variant}"
        runs = run_protocol(X, y, plan, stage=stage, config=pconfig, batches=batch)

    out_root = Path(args.out)
    with _atomic_dir(out_root / name) as tmp:
        _write_runs(runs, Path(tmp), write_best_list=not args.clinical
                    and not args.best_shap_from, min_count=min_count)
    aucs = [r.test_scores.roc_auc for r in runs]
    print(f"{name}: {len(runs)} splits, mean test ROC-AUC {np.mean(aucs):.3f}")
    return 0


def cmd_stability(args) -> int:
    cfg = _config_from(args)
    table = load_feature_table(_first_existing([args.infile], "extract"))
    if not args.dsc:
        raise DataError(
            "stability needs --dsc DSC.csv (produced by `radstab variants`)"
        )
    dsc_frame = pd.read_csv(_first_existing([args.dsc], "variants"))
    dsc = {
        (str(r.patient_id), str(r.variant)): float(r.dsc)
        for r in dsc_frame.itertuples(index=False)
    }
    subset = [s.strip() for s in args.features.split(",")] if args.features else None
    report, scatter = stability_report(
        table, dsc, cfg.thresholds(), ref_variant=args.ref_variant,
        feature_subset=subset,
    )
    with _atomic_file(args.out) as tmp:
        report.to_csv(tmp, index=False)
    if args.scatter_dir:
        from .report import _slug

        tracked = subset or sorted(scatter)[:4]
        with _atomic_dir(args.scatter_dir) as tmp:
            for feature in tracked:
                rows = scatter.get(feature, [])
                frame = pd.DataFrame(
                    rows, columns=["patient_id", "variant", "dsc", "rel_err"]
                )
                frame.to_csv(Path(tmp) / f"{_slug(feature)}.csv", index=False)
        tracked_file = Path(args.out).parent / "tracked_features.txt"
        tracked_file.write_text("\n".join(tracked) + "\n", encoding="utf-8")
    print(f"stability report for {report['feature'].nunique()} features -> {args.out}")
    return 0


def cmd_report(args) -> int:
    out = build_report(args.dir, args.out)
    print(f"report written to {out}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="radstab",
        description="segmentation-stability radiomics workbench",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config(p):
        p.add_argument("--config", help="run configuration file")

    p = sub.add_parser("synth", help="generate a synthetic cohort")
    add_config(p)
    p.add_argument("--out", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--ratio", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--size", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("variants", help="derive segmentation variants + DSC")
    add_config(p)
    p.add_argument("--cohort", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_variants)

    p = sub.add_parser("extract", help="extract the radiomic feature table")
    add_config(p)
    p.add_argument("--cohort", required=True)
    p.add_argument("--variants", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--dump-filtered", dest="dump_filtered", default=None,
                   help="directory for the 12 filtered images per patient")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("harmonize", help="batch-effect harmonization")
    add_config(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--batch-col", dest="batch_col", default="batch_id")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_harmonize)

    p = sub.add_parser("screen", help="univariate feature screening")
    add_config(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--variant", default="manual")
    p.add_argument("--cohort-csv", dest="cohort_csv", default=None,
                   help="cohort.csv adding categorical clinical tests")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("train", help="per-split prediction models")
    add_config(p)
    p.add_argument("--in", dest="infile", default=None)
    p.add_argument("--variant", default="manual")
    p.add_argument("--splits", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--min-count", dest="min_count", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--best-shap-from", dest="best_shap_from", default=None)
    p.add_argument("--clinical", choices=("demographic", "biopsy"), default=None)
    p.add_argument("--cohort-csv", dest="cohort_csv", default=None)
    p.add_argument("--stage-name", dest="stage_name", default=None)
    p.add_argument("--combat-per-split", dest="combat_per_split",
                   action="store_true",
                   help="refit harmonization on each split's training rows "
                        "(leak-free alternative to the whole-table default)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("stability", help="feature stability across variants")
    add_config(p)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--dsc", default=None, help="DSC table from `radstab variants`")
    p.add_argument("--ref-variant", dest="ref_variant", default="manual")
    p.add_argument("--features", default=None, help="comma-separated subset")
    p.add_argument("--scatter-dir", dest="scatter_dir", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("report", help="render result tables and figures")
    add_config(p)
    p.add_argument("--dir", required=True, help="run directory with artifacts")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("once")
            return args.func(args)
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
