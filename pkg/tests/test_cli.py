import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from radstab.cli import main
from radstab.config import RunConfig, save_config

SMALL_CFG = RunConfig(
    synth_n=12,
    synth_ratio=0.5,
    synth_size=28,
    seed=3,
    n_splits=4,
    min_count=1,
    cv_folds=2,
    n_keep=10,
    C=2.0,
    use_wavelet=False,
    use_log=False,
    families=("firstorder", "gldm"),
)


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    """A complete small pipeline run shared by the CLI tests."""
    root = tmp_path_factory.mktemp("run")
    cfg_path = root / "run.cfg"
    save_config(SMALL_CFG, cfg_path)
    c = str(cfg_path)
    assert main(["synth", "--config", c, "--out", str(root / "cohort")]) == 0
    assert main(["variants", "--config", c, "--cohort", str(root / "cohort"),
                 "--out", str(root / "variants")]) == 0
    assert main(["extract", "--config", c, "--cohort", str(root / "cohort"),
                 "--variants", str(root / "variants"),
                 "--out", str(root / "features.csv")]) == 0
    assert main(["harmonize", "--config", c, "--in", str(root / "features.csv"),
                 "--out", str(root / "features_combat.csv")]) == 0
    return root, c


def test_synth_outputs(run_dir):
    root, _ = run_dir
    assert (root / "cohort" / "cohort.csv").exists()
    assert len(list((root / "cohort").glob("*.rvol.bin"))) == 12


def test_variants_outputs(run_dir):
    root, _ = run_dir
    dsc = pd.read_csv(root / "variants" / "dsc.csv")
    assert set(dsc["variant"]) == {
        "closing_08", "closing_07", "closing_06", "ellipsoid_04"
    }
    assert ((dsc["dsc"] > 0) & (dsc["dsc"] <= 1)).all()
    assert len(list((root / "variants").glob("*.rmask.json"))) == 48


def test_extract_outputs(run_dir):
    root, _ = run_dir
    from radstab import load_feature_table

    table = load_feature_table(root / "features.csv")
    assert len(table) == 60  # 12 patients x (manual + 4 variants)
    assert table.n_features == SMALL_CFG.extraction_config().n_features


def test_screen_and_train_and_stability_and_report(run_dir):
    root, c = run_dir
    assert main(["screen", "--config", c, "--in", str(root / "features_combat.csv"),
                 "--cohort-csv", str(root / "cohort" / "cohort.csv"),
                 "--out", str(root / "univariate.csv")]) == 0
    out = pd.read_csv(root / "univariate.csv")
    assert (out["p_adjusted"] >= out["p_value"] - 1e-15).all()

    assert main(["train", "--config", c, "--in", str(root / "features_combat.csv"),
                 "--variant", "manual", "--out", str(root / "runs")]) == 0
    best = root / "runs" / "baseline_manual" / "best_shap_features.txt"
    assert best.exists()
    assert main(["train", "--config", c, "--in", str(root / "features_combat.csv"),
                 "--variant", "manual", "--best-shap-from", str(best),
                 "--out", str(root / "runs")]) == 0
    assert main(["train", "--config", c, "--clinical", "biopsy",
                 "--cohort-csv", str(root / "cohort" / "cohort.csv"),
                 "--out", str(root / "runs")]) == 0
    assert main(["train", "--config", c, "--clinical", "demographic",
                 "--cohort-csv", str(root / "cohort" / "cohort.csv"),
                 "--out", str(root / "runs")]) == 0

    models = json.loads(
        (root / "runs" / "baseline_manual" / "models.json").read_text()
    )
    assert len(models) == 4
    assert all(m["nonzero_coef"] <= len(m["features"]) for m in models)

    feats = pd.read_csv(root / "features.csv", nrows=1)
    tracked = [col for col in feats.columns if "|gldm|" in col][:2]
    assert main(["stability", "--config", c,
                 "--in", str(root / "features_combat.csv"),
                 "--dsc", str(root / "variants" / "dsc.csv"),
                 "--features", ",".join(tracked),
                 "--scatter-dir", str(root / "scatter"),
                 "--out", str(root / "stability.csv")]) == 0
    stab = pd.read_csv(root / "stability.csv")
    assert set(stab["feature"]) == set(tracked)

    assert main(["report", "--dir", str(root)]) == 0
    report = root / "report"
    expected = [
        "table1_dsc.csv", "table3_skill.csv", "table4_ks.csv",
        "fig4_boxplots.csv", "fig4_boxplots.svg", "fig5_icc.csv",
        "fig5_icc.svg", "fig6_reliability.csv",
    ]
    for name in expected:
        path = report / name
        assert path.exists() and path.stat().st_size > 0, name

    table1 = pd.read_csv(report / "table1_dsc.csv")
    assert table1["variant"].tolist() == [
        "closing_08", "closing_07", "closing_06", "ellipsoid_04"
    ]
    table3 = pd.read_csv(report / "table3_skill.csv")
    assert table3["experiment"].tolist()[:2] == ["demographic", "biopsy"]
    cell = table3["roc_auc"].iloc[0]
    import re

    assert re.match(r"^\d\.\d{3} \(-?\d\.\d{3}, -?\d\.\d{3}\)$", cell)


def test_stage_order_violation_names_missing_artifact(tmp_path):
    code = main(["report", "--dir", str(tmp_path)])
    assert code == 3


def test_extract_before_variants_errors(tmp_path):
    code = main(["extract", "--cohort", str(tmp_path), "--out",
                 str(tmp_path / "f.csv")])
    assert code == 3


def test_train_missing_input_errors(tmp_path):
    code = main(["train", "--in", str(tmp_path / "none.csv"),
                 "--out", str(tmp_path / "runs")])
    assert code == 3


def test_usage_error_exit_2():
    assert main(["bogus-subcommand"]) == 2
    assert main(["synth"]) == 2  # missing --out


def test_harmonize_wrong_batch_col(run_dir):
    root, _ = run_dir
    code = main(["harmonize", "--in", str(root / "features.csv"),
                 "--batch-col", "scanner", "--out", str(root / "x.csv")])
    assert code == 3


def test_no_partial_outputs_on_failure(tmp_path):
    # missing cohort: the variants command must not leave the output dir
    code = main(["variants", "--cohort", str(tmp_path / "nope"),
                 "--out", str(tmp_path / "variants")])
    assert code == 3
    assert not (tmp_path / "variants").exists()


def test_dump_filtered_writes_rvol(run_dir, tmp_path):
    root, _ = run_dir
    dump = tmp_path / "filtered"
    code = main(["extract", "--cohort", str(root / "cohort"),
                 "--out", str(tmp_path / "f.csv"), "--dump-filtered", str(dump),
                 "--workers", "2"])
    assert code == 0
    files = sorted(dump.glob("p000__*.rvol.json"))
    # one per default filter: original + 8 wavelet subbands + 3 LoG scales
    assert len(files) == 12


def test_combat_per_split_flag(run_dir, tmp_path):
    root, c = run_dir
    code = main(["train", "--config", c, "--in", str(root / "features_combat.csv"),
                 "--variant", "manual", "--combat-per-split",
                 "--stage-name", "cps_check", "--out", str(tmp_path / "runs")])
    assert code == 0
    assert (tmp_path / "runs" / "cps_check" / "skill_scores.csv").exists()


def test_numerical_failure_exit_4(run_dir, tmp_path):
    root, _ = run_dir
    cfg = tmp_path / "tight.cfg"
    save_config(
        RunConfig(combat_max_iter=1, combat_tol=1e-18,
                  use_wavelet=False, use_log=False,
                  families=("firstorder", "gldm")),
        cfg,
    )
    code = main(["harmonize", "--config", str(cfg),
                 "--in", str(root / "features.csv"),
                 "--out", str(tmp_path / "h.csv")])
    assert code == 4
    assert not (tmp_path / "h.csv").exists()
