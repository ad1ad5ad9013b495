"""Full feature extraction: 14 shape + 93 features x 12 filtered images = 1130.

Per (volume, mask) pair: the volume is z-score normalized over all voxels,
each configured filter is applied, the filtered region is re-discretized
(fixed bin count), and the six feature families are computed.  Shape
features come from the original mask only.  Feature names follow the
``filter|matrix|feature`` scheme, e.g. ``wavelet-HLH|firstorder|Skewness``.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import filters as _filters
from .discretize import discretize
from .errors import DataError
from .firstorder import FIRSTORDER_NAMES, first_order_features
from .shape import SHAPE_NAMES, shape_features
from .tables import KEY_COLUMNS, CohortRecord, FeatureTable
from .texture import (
    GLCM_NAMES, GLDM_NAMES, GLRLM_NAMES, GLSZM_NAMES, NGTDM_NAMES,
    glcm_features, gldm_features, glrlm_features, glszm_features,
    ngtdm_features,
)
from .volumes import BinaryMask, ImageVolume, load_mask, load_volume

FAMILY_ORDER = ("firstorder", "glcm", "glrlm", "glszm", "gldm", "ngtdm")
_FAMILY_NAMES = {
    "firstorder": FIRSTORDER_NAMES,
    "glcm": GLCM_NAMES,
    "glrlm": GLRLM_NAMES,
    "glszm": GLSZM_NAMES,
    "gldm": GLDM_NAMES,
    "ngtdm": NGTDM_NAMES,
}


@dataclass(frozen=True)
class ExtractionConfig:
    """Settings controlling the filter bank and feature families."""

    bins: int = 50
    wavelet: str = "coif1"
    log_sigmas: tuple = (1.0, 2.0, 3.0)
    use_wavelet: bool = True
    use_log: bool = True
    families: tuple = FAMILY_ORDER
    include_shape: bool = True
    normalize: bool = True
    gldm_alpha: int = 0

    def filter_ids(self) -> list[str]:
        return _filters.filter_ids(self.log_sigmas, self.use_wavelet, self.use_log)

    def feature_names(self) -> list[str]:
        names = []
        if self.include_shape:
            names += [f"original|shape|{n}" for n in SHAPE_NAMES]
        for fid in self.filter_ids():
            for family in self.families:
                names += [f"{fid}|{family}|{n}" for n in _FAMILY_NAMES[family]]
        return names

    @property
    def n_features(self) -> int:
        return len(self.feature_names())


class FeatureExtractor:
    """Computes the configured feature vector of a (volume, mask) pair."""

    def __init__(self, config: ExtractionConfig | None = None):
        self.config = config or ExtractionConfig()

    def _normalized(self, volume: ImageVolume) -> ImageVolume:
        data = volume.voxels.astype(np.float64)
        sd = float(data.std())
        if sd == 0:
            warnings.warn("constant volume: z-score normalization centers only")
            return ImageVolume(voxels=data - data.mean(), spacing=volume.spacing)
        return ImageVolume(voxels=(data - data.mean()) / sd, spacing=volume.spacing)

    def extract(self, volume: ImageVolume, mask: BinaryMask) -> dict:
        """Feature name -> value for one pair; degenerate values are NaN."""
        cfg = self.config
        mask.check_paired(volume)
        if mask.n_foreground == 0:
            raise DataError("cannot extract features from an empty mask")

        work = self._normalized(volume) if cfg.normalize else volume
        out: dict[str, float] = {}
        if cfg.include_shape:
            for name, value in shape_features(mask).items():
                out[f"original|shape|{name}"] = value

        voxel_volume = volume.voxel_volume
        wavelet_cache: dict = {}
        for fid in cfg.filter_ids():
            filtered = _filters.apply_filter(
                work, fid, wavelet_family=cfg.wavelet, _wavelet_cache=wavelet_cache
            )
            roi = discretize(filtered, mask, bins=cfg.bins)
            for family in cfg.families:
                if family == "firstorder":
                    values = first_order_features(roi, voxel_volume)
                elif family == "glcm":
                    values = glcm_features(roi)
                elif family == "glrlm":
                    values = glrlm_features(roi)
                elif family == "glszm":
                    values = glszm_features(roi)
                elif family == "gldm":
                    values = gldm_features(roi, alpha=cfg.gldm_alpha)
                elif family == "ngtdm":
                    values = ngtdm_features(roi)
                else:
                    raise DataError(f"unknown feature family '{family}'")
                for name, value in values.items():
                    out[f"{fid}|{family}|{name}"] = value
        return out


def worker_count() -> int:
    """Bounded worker pool size, capped by the RADSTAB_THREADS env var."""
    cap = os.environ.get("RADSTAB_THREADS")
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise DataError(f"RADSTAB_THREADS must be an integer, got '{cap}'")
    return max(1, min(n, 8))


def extract_cohort(
    cohort_dir,
    variants_dir,
    records: list[CohortRecord],
    config: ExtractionConfig | None = None,
    workers: int | None = None,
    dump_filtered_dir=None,
) -> FeatureTable:
    """Extract features for every (patient, mask variant) pair found on disk.

    ``cohort_dir`` holds ``<pid>.rvol`` volumes and ``<pid>__manual.rmask``
    masks; ``variants_dir`` holds ``<pid>__<variant>.rmask`` masks.  Output
    row order is deterministic regardless of worker scheduling.
    """
    cohort_dir = Path(cohort_dir)
    variants_dir = Path(variants_dir) if variants_dir else None
    config = config or ExtractionConfig()
    extractor = FeatureExtractor(config)

    tasks = []
    for rec in records:
        vol_path = cohort_dir / f"{rec.patient_id}.rvol"
        if not (vol_path.with_suffix(".rvol.json")).exists():
            raise DataError(f"missing volume for patient {rec.patient_id}: {vol_path}.json")
        mask_paths = {"manual": cohort_dir / f"{rec.patient_id}__manual.rmask"}
        if variants_dir is not None:
            for header in sorted(variants_dir.glob(f"{rec.patient_id}__*.rmask.json")):
                stem = header.name[: -len(".rmask.json")]
                variant = stem.split("__", 1)[1]
                mask_paths[variant] = variants_dir / f"{stem}.rmask"
        for variant, mpath in sorted(mask_paths.items()):
            tasks.append((rec, variant, vol_path, mpath))

    def run(task):
        rec, variant, vol_path, mask_path = task
        volume = load_volume(vol_path)
        mask = load_mask(mask_path)
        feats = extractor.extract(volume, mask)
        if dump_filtered_dir is not None and variant == "manual":
            _dump_filtered(volume, extractor, rec.patient_id, dump_filtered_dir)
        return (rec.patient_id, variant, rec.label, rec.batch_id, feats)

    n_workers = workers if workers is not None else worker_count()
    if n_workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(run, tasks))
    else:
        results = [run(t) for t in tasks]

    names = config.feature_names()
    rows = []
    for pid, variant, label, batch, feats in sorted(results, key=lambda r: (r[0], r[1])):
        row = {"patient_id": pid, "mask_variant": variant, "label": label,
               "batch_id": batch}
        row.update({n: feats[n] for n in names})
        rows.append(row)
    frame = pd.DataFrame(rows, columns=list(KEY_COLUMNS) + names)
    return FeatureTable(frame)


def _dump_filtered(volume: ImageVolume, extractor: FeatureExtractor, pid, out_dir):
    from .volumes import save_volume  # local import to avoid cycle at top

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = extractor.config
    work = extractor._normalized(volume) if cfg.normalize else volume
    cache: dict = {}
    for fid in cfg.filter_ids():
        filtered = _filters.apply_filter(work, fid, cfg.wavelet, _wavelet_cache=cache)
        save_volume(
            ImageVolume(filtered.voxels.astype(np.float32), filtered.spacing),
            out_dir / f"{pid}__{fid}.rvol",
        )
