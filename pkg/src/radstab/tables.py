"""Feature tables and cohort records with strict CSV round-tripping.

Feature CSV layout: header row ``patient_id, mask_variant, label, batch_id``
followed by one column per feature (names in the ``filter|matrix|feature``
scheme).  UTF-8, comma separated, ``.`` decimal.  Floats are written with
``repr`` so a save/load round trip is value-exact.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import DataError

KEY_COLUMNS = ("patient_id", "mask_variant", "label", "batch_id")


@dataclass
class CohortRecord:
    """One patient: label, ComBat batch variable, and clinical variables."""

    patient_id: str
    label: int
    batch_id: str
    clinical: dict = field(default_factory=dict)

    DEMOGRAPHIC_VARS = ("age", "menopause", "ethnicity", "metastatic")
    BIOPSY_VARS = ("tubule_formation", "nuclear_grade", "mitotic_rate")


class FeatureTable:
    """Patient x feature matrix keyed by (patient_id, mask_variant).

    Wraps a pandas DataFrame whose first four columns are the key/sidecar
    columns and whose remaining columns are numeric features.
    """

    def __init__(self, frame: pd.DataFrame):
        missing = [c for c in KEY_COLUMNS if c not in frame.columns]
        if missing:
            raise DataError(f"feature table missing required columns: {missing}")
        keys = list(zip(frame["patient_id"], frame["mask_variant"]))
        if len(set(keys)) != len(keys):
            dupes = sorted({k for k in keys if keys.count(k) > 1})[:5]
            raise DataError(f"duplicate (patient_id, mask_variant) keys: {dupes}")
        feature_cols = [c for c in frame.columns if c not in KEY_COLUMNS]
        if len(set(feature_cols)) != len(feature_cols):
            raise DataError("feature names are not unique")
        frame = frame.copy()
        frame["patient_id"] = frame["patient_id"].astype(str)
        frame["mask_variant"] = frame["mask_variant"].astype(str)
        frame["batch_id"] = frame["batch_id"].astype(str)
        try:
            frame["label"] = frame["label"].astype(np.int64)
        except (TypeError, ValueError) as exc:
            raise DataError(f"label column is not integer-valued: {exc}") from exc
        for col in feature_cols:
            try:
                frame[col] = frame[col].astype(np.float64)
            except (TypeError, ValueError) as exc:
                raise DataError(f"feature column '{col}' is not numeric: {exc}") from exc
        label_per_patient = frame.groupby("patient_id")["label"].nunique()
        if (label_per_patient > 1).any():
            bad = label_per_patient[label_per_patient > 1].index.tolist()
            raise DataError(f"inconsistent labels across variants for patients {bad}")
        self.frame = frame.reset_index(drop=True)
        self.feature_names = feature_cols

    def __len__(self):
        return len(self.frame)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)

    @property
    def variants(self) -> list[str]:
        return sorted(self.frame["mask_variant"].unique())

    @property
    def patients(self) -> list[str]:
        return sorted(self.frame["patient_id"].unique())

    def matrix(self) -> np.ndarray:
        return self.frame[self.feature_names].to_numpy(dtype=np.float64)

    def variant_slice(self, variant: str):
        """Rows for one mask variant: (X indexed by patient, y, batch)."""
        sub = self.frame[self.frame["mask_variant"] == variant]
        if sub.empty:
            raise DataError(
                f"no rows for mask variant '{variant}'; present: {self.variants}"
            )
        sub = sub.sort_values("patient_id")
        X = sub.set_index("patient_id")[self.feature_names]
        y = sub.set_index("patient_id")["label"]
        batch = sub.set_index("patient_id")["batch_id"]
        return X, y, batch

    def with_values(self, values: np.ndarray) -> "FeatureTable":
        """Same keys/sidecar, replaced feature values (used by harmonization)."""
        if values.shape != (len(self.frame), self.n_features):
            raise DataError(
                f"replacement values shape {values.shape} does not match "
                f"({len(self.frame)}, {self.n_features})"
            )
        frame = self.frame.copy()
        frame[self.feature_names] = values
        return FeatureTable(frame)


def _format_cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def save_feature_table(table: FeatureTable, path):
    """Write a feature CSV; float cells use shortest round-trip repr."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = list(KEY_COLUMNS) + table.feature_names
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in table.frame.itertuples(index=False):
            writer.writerow([_format_cell(v) for v in row])


def load_feature_table(path) -> FeatureTable:
    """Read a feature CSV, rejecting ragged rows and duplicate keys."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"feature table not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{lineno}: ragged row with {len(row)} fields, "
                    f"header has {len(header)}"
                )
            rows.append(row)
    frame = pd.DataFrame(rows, columns=header)
    return FeatureTable(frame)


_COHORT_COLUMNS = ("patient_id", "label", "batch_id") + \
    CohortRecord.DEMOGRAPHIC_VARS + CohortRecord.BIOPSY_VARS


def save_cohort_records(records: list[CohortRecord], path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_COHORT_COLUMNS)
        for rec in records:
            row = [rec.patient_id, rec.label, rec.batch_id]
            row += [_format_cell(rec.clinical.get(k, "")) for k in _COHORT_COLUMNS[3:]]
            writer.writerow(row)


def load_cohort_records(path) -> list[CohortRecord]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"cohort records not found: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        records = []
        seen = set()
        for row in reader:
            pid = row["patient_id"]
            if pid in seen:
                raise DataError(f"{path}: duplicate patient_id '{pid}'")
            seen.add(pid)
            if row.get("label", "") == "":
                raise DataError(f"{path}: missing label for patient '{pid}'")
            clinical = {}
            for key in _COHORT_COLUMNS[3:]:
                raw = row.get(key, "")
                if raw == "":
                    continue
                clinical[key] = float(raw) if key == "age" else raw
            records.append(
                CohortRecord(
                    patient_id=pid,
                    label=int(row["label"]),
                    batch_id=row["batch_id"],
                    clinical=clinical,
                )
            )
    return records
