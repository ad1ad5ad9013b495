"""Volume and mask data types with bit-exact raw+JSON file I/O.

A volume on disk is a pair ``<name>.json`` / ``<name>.bin``.  The JSON header
holds ``{"dims": [nx, ny, nz], "spacing": [sx, sy, sz], "dtype": "f32"|"u8"}``;
the ``.bin`` buffer is little-endian, row-major with z outermost (x fastest).
In memory the voxel array is indexed ``[z, y, x]`` so that a C-contiguous
buffer matches the on-disk layout exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

_DTYPES = {"f32": np.dtype("<f4"), "u8": np.dtype("u1")}


def _check_geometry(voxels: np.ndarray, spacing) -> tuple[float, float, float]:
    if voxels.ndim != 3:
        raise DataError(f"voxel array must be 3-D, got shape {voxels.shape}")
    if min(voxels.shape) < 1:
        raise DataError(f"all dims must be >= 1, got {voxels.shape}")
    spacing = tuple(float(s) for s in spacing)
    if len(spacing) != 3 or any(s <= 0 for s in spacing):
        raise DataError(f"spacing must be three positive values, got {spacing}")
    return spacing


@dataclass(frozen=True)
class ImageVolume:
    """3-D scalar field with physical voxel spacing in millimetres.

    Attributes:
        voxels: intensities, shape (nz, ny, nx), z outermost.
        spacing: (sx, sy, sz) in mm, all strictly positive.
    """

    voxels: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        spacing = _check_geometry(self.voxels, self.spacing)
        object.__setattr__(self, "spacing", spacing)
        if not np.isfinite(self.voxels).all():
            raise DataError("volume contains NaN or Inf intensities")

    @property
    def dims(self) -> tuple[int, int, int]:
        """(nx, ny, nz) voxel counts."""
        nz, ny, nx = self.voxels.shape
        return (nx, ny, nz)

    @property
    def n_voxels(self) -> int:
        return int(self.voxels.size)

    @property
    def voxel_volume(self) -> float:
        """Physical volume of one voxel in mm^3."""
        sx, sy, sz = self.spacing
        return sx * sy * sz


@dataclass(frozen=True)
class BinaryMask:
    """3-D boolean field aligned with an :class:`ImageVolume`."""

    voxels: np.ndarray
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    warnings: tuple = field(default_factory=tuple, compare=False)

    def __post_init__(self):
        spacing = _check_geometry(self.voxels, self.spacing)
        object.__setattr__(self, "spacing", spacing)
        if self.voxels.dtype != np.bool_:
            vox = np.asarray(self.voxels)
            if not np.isin(vox, (0, 1)).all():
                raise DataError("mask voxels must be 0/1")
            object.__setattr__(self, "voxels", vox.astype(bool))

    @property
    def dims(self) -> tuple[int, int, int]:
        nz, ny, nx = self.voxels.shape
        return (nx, ny, nz)

    @property
    def n_foreground(self) -> int:
        return int(self.voxels.sum())

    def check_paired(self, volume: ImageVolume):
        """Require identical dims with the paired volume."""
        if self.voxels.shape != volume.voxels.shape:
            raise DataError(
                f"mask dims {self.dims} do not match volume dims {volume.dims}"
            )


def _resolve_pair(path) -> tuple[Path, Path]:
    """Accept the base name or either member of a .json/.bin pair."""
    p = Path(path)
    if p.suffix in (".json", ".bin"):
        p = p.with_suffix("")
    return p.with_suffix(p.suffix + ".json"), p.with_suffix(p.suffix + ".bin")


def _load_raw(path, expected_dtype: str):
    header_path, buffer_path = _resolve_pair(path)
    if not header_path.exists():
        raise DataError(f"missing header file: {header_path}")
    if not buffer_path.exists():
        raise DataError(f"missing buffer file: {buffer_path}")
    try:
        header = json.loads(header_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"unparseable header {header_path}: {exc}") from exc
    for key in ("dims", "spacing", "dtype"):
        if key not in header:
            raise DataError(f"header {header_path} missing key '{key}'")
    dtype_tag = header["dtype"]
    if dtype_tag != expected_dtype:
        raise DataError(
            f"{header_path}: expected dtype '{expected_dtype}', found '{dtype_tag}'"
        )
    nx, ny, nz = (int(d) for d in header["dims"])
    raw = buffer_path.read_bytes()
    dtype = _DTYPES[dtype_tag]
    expected_bytes = nx * ny * nz * dtype.itemsize
    if len(raw) != expected_bytes:
        raise DataError(
            f"{buffer_path}: buffer holds {len(raw)} bytes, header dims "
            f"{(nx, ny, nz)} require {expected_bytes}"
        )
    voxels = np.frombuffer(raw, dtype=dtype).reshape(nz, ny, nx)
    spacing = tuple(float(s) for s in header["spacing"])
    return voxels, spacing


def _save_raw(voxels: np.ndarray, spacing, dtype_tag: str, path):
    header_path, buffer_path = _resolve_pair(path)
    nz, ny, nx = voxels.shape
    header = {
        "dims": [nx, ny, nz],
        "spacing": [float(s) for s in spacing],
        "dtype": dtype_tag,
    }
    header_path.parent.mkdir(parents=True, exist_ok=True)
    header_path.write_text(json.dumps(header) + "\n", encoding="utf-8")
    buffer_path.write_bytes(np.ascontiguousarray(voxels, dtype=_DTYPES[dtype_tag]).tobytes())


def load_volume(path) -> ImageVolume:
    """Load an ``.rvol`` pair; raises :class:`DataError` on any inconsistency."""
    voxels, spacing = _load_raw(path, "f32")
    if not np.isfinite(voxels).all():
        raise DataError(f"{path}: buffer contains NaN or Inf values")
    return ImageVolume(voxels=voxels.copy(), spacing=spacing)


def save_volume(volume: ImageVolume, path):
    """Write an ``.rvol`` pair readable by :func:`load_volume` (bit-exact)."""
    _save_raw(volume.voxels, volume.spacing, "f32", path)


def load_mask(path) -> BinaryMask:
    """Load an ``.rmask`` pair (u8 buffer holding 0/1 only)."""
    voxels, spacing = _load_raw(path, "u8")
    if not np.isin(voxels, (0, 1)).all():
        raise DataError(f"{path}: mask buffer must contain only 0 and 1")
    return BinaryMask(voxels=voxels.astype(bool), spacing=spacing)


def save_mask(mask: BinaryMask, path):
    _save_raw(mask.voxels.astype("u1"), mask.spacing, "u8", path)
