import pytest

from radstab import DataError, RunConfig, load_config, save_config


def test_roundtrip(tmp_path):
    cfg = RunConfig(seed=42, bins=32, families=("firstorder", "glcm"),
                    log_sigmas=(1.0, 2.5), use_log=False, n_splits=10)
    save_config(cfg, tmp_path / "run.cfg")
    again = load_config(tmp_path / "run.cfg")
    assert again == cfg


def test_defaults_match_protocol():
    cfg = RunConfig()
    assert cfg.n_splits == 130
    assert cfg.train_frac == 0.7
    assert cfg.C == 1.0
    assert cfg.bins == 50
    assert cfg.min_count == 15
    assert cfg.extraction_config().n_features == 1130


def test_unknown_key_rejected(tmp_path):
    (tmp_path / "bad.cfg").write_text("sneaky_option = 3\n")
    with pytest.raises(DataError, match="unknown config key"):
        load_config(tmp_path / "bad.cfg")


def test_type_errors(tmp_path):
    (tmp_path / "bad.cfg").write_text("bins = many\n")
    with pytest.raises(DataError, match="expected integer"):
        load_config(tmp_path / "bad.cfg")
    (tmp_path / "bad2.cfg").write_text("use_log = maybe\n")
    with pytest.raises(DataError, match="true/false"):
        load_config(tmp_path / "bad2.cfg")


def test_comments_and_blanks(tmp_path):
    (tmp_path / "c.cfg").write_text("# comment\n\nseed = 3\nbins=16\n")
    cfg = load_config(tmp_path / "c.cfg")
    assert cfg.seed == 3 and cfg.bins == 16


def test_semantic_validation(tmp_path):
    (tmp_path / "c.cfg").write_text("train_frac = 1.5\n")
    with pytest.raises(DataError, match="train_frac"):
        load_config(tmp_path / "c.cfg")
    (tmp_path / "d.cfg").write_text("families = glcm, bogus\n")
    with pytest.raises(DataError, match="unknown feature families"):
        load_config(tmp_path / "d.cfg")


def test_derived_configs():
    cfg = RunConfig(dsc_hi=0.75, C=2.0, closing_06_dilate=13)
    assert cfg.thresholds().dsc_hi == 0.75
    assert cfg.protocol_config().C == 2.0
    assert cfg.closing_recipes()["closing_06"] == (13, 9)
