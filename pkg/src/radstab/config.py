"""Run configuration: one flat, human-readable key-value file.

Format: ``key = value`` per line, ``#`` comments, blank lines ignored.
Unknown keys are rejected hard so typos cannot silently change a run.
Every stage derives its randomness from the single ``seed`` via
counter-keyed child generators (see :func:`radstab.splits.stage_rng`), so
stages re-run independently yet reproducibly.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .errors import DataError
from .extract import FAMILY_ORDER, ExtractionConfig
from .protocol import ProtocolConfig
from .stability import ReliabilityThresholds


@dataclass
class RunConfig:
    # paths
    cohort_dir: str = ""
    out_dir: str = ""
    # extraction
    bins: int = 50
    wavelet: str = "coif1"
    log_sigmas: tuple = (1.0, 2.0, 3.0)
    use_wavelet: bool = True
    use_log: bool = True
    families: tuple = FAMILY_ORDER
    # variant recipes: (dilation radius, erosion radius) per closing variant
    closing_08_dilate: int = 5
    closing_08_erode: int = 5
    closing_07_dilate: int = 9
    closing_07_erode: int = 9
    closing_06_dilate: int = 11
    closing_06_erode: int = 9
    # prediction pipeline
    n_splits: int = 130
    train_frac: float = 0.7
    seed: int = 7
    C: float = 1.0
    smote_k: int = 5
    n_keep: int = 50
    min_count: int = 15
    threshold: float = 0.5
    cv_folds: int = 5
    shap_top_k: int = 10
    shap_on: str = "test"
    smote_after_scaling: bool = True
    combat_per_split: bool = False
    # harmonization
    combat_tol: float = 1e-6
    combat_max_iter: int = 200
    # stability thresholds
    dsc_hi: float = 0.8
    err_lo: float = 0.1
    err_hi: float = 0.5
    r_min: float = 0.7
    # synthetic cohort generation
    synth_n: int = 40
    synth_ratio: float = 0.3
    synth_size: int = 48
    synth_delta: float = 3.0

    def extraction_config(self) -> ExtractionConfig:
        return ExtractionConfig(
            bins=self.bins,
            wavelet=self.wavelet,
            log_sigmas=tuple(self.log_sigmas),
            use_wavelet=self.use_wavelet,
            use_log=self.use_log,
            families=tuple(self.families),
        )

    def protocol_config(self) -> ProtocolConfig:
        return ProtocolConfig(
            C=self.C,
            smote_k=self.smote_k,
            n_keep=self.n_keep,
            threshold=self.threshold,
            cv_folds=self.cv_folds,
            shap_top_k=self.shap_top_k,
            shap_on=self.shap_on,
            smote_after_scaling=self.smote_after_scaling,
            combat_per_split=self.combat_per_split,
        )

    def thresholds(self) -> ReliabilityThresholds:
        return ReliabilityThresholds(
            dsc_hi=self.dsc_hi,
            err_lo=self.err_lo,
            err_hi=self.err_hi,
            r_min=self.r_min,
        )

    def closing_recipes(self) -> dict:
        return {
            "closing_08": (self.closing_08_dilate, self.closing_08_erode),
            "closing_07": (self.closing_07_dilate, self.closing_07_erode),
            "closing_06": (self.closing_06_dilate, self.closing_06_erode),
        }


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (tuple, list)):
        return ", ".join(str(v) for v in value)
    return str(value)


def _parse_value(raw: str, kind, key: str):
    raw = raw.strip()
    if kind is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise DataError(f"config key '{key}': expected true/false, got '{raw}'")
    if kind is int:
        try:
            return int(raw)
        except ValueError:
            raise DataError(f"config key '{key}': expected integer, got '{raw}'")
    if kind is float:
        try:
            return float(raw)
        except ValueError:
            raise DataError(f"config key '{key}': expected number, got '{raw}'")
    if kind is tuple:
        items = [s.strip() for s in raw.split(",") if s.strip()]
        try:
            return tuple(float(v) for v in items)
        except ValueError:
            return tuple(items)
    return raw


def save_config(config: RunConfig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["# radstab run configuration"]
    for f in fields(config):
        lines.append(f"{f.name} = {_format_value(getattr(config, f.name))}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    known = {f.name: f for f in fields(RunConfig)}
    defaults = RunConfig()
    values = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key not in known:
            raise DataError(f"{path}:{lineno}: unknown config key '{key}'")
        default = getattr(defaults, key)
        values[key] = _parse_value(raw, type(default), key)
    config = RunConfig(**values)
    _validate(config)
    return config


def _validate(config: RunConfig):
    if config.bins < 1:
        raise DataError("bins must be >= 1")
    if not 0.0 < config.train_frac < 1.0:
        raise DataError("train_frac must be in (0, 1)")
    if config.C <= 0:
        raise DataError("C must be positive")
    if config.shap_on not in ("test", "train"):
        raise DataError("shap_on must be 'test' or 'train'")
    if not set(config.families) <= set(FAMILY_ORDER):
        raise DataError(f"unknown feature families: {set(config.families) - set(FAMILY_ORDER)}")
    for name in ("dsc_hi", "r_min"):
        if not 0.0 <= getattr(config, name) <= 1.0:
            raise DataError(f"{name} must lie in [0, 1]")
    if not 0.0 <= config.err_lo < config.err_hi:
        raise DataError("need 0 <= err_lo < err_hi")
    if config.combat_max_iter < 1:
        raise DataError("combat_max_iter must be >= 1")


def config_as_dict(config: RunConfig) -> dict:
    return asdict(config)
