"""Fixed-bin-count intensity discretization of a masked region.

Bins are equal-width over the in-mask [min, max] range: left-closed with the
last bin right-closed, so the minimum maps to bin 1 and the maximum to bin B.
The labelled region is cropped to the mask bounding box, which is what the
texture-matrix builders consume.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .volumes import BinaryMask, ImageVolume


@dataclass
class DiscretizedRoi:
    """Bin labels for the in-mask voxels of one (volume, mask) pair.

    Attributes:
        label_volume: int array cropped to the mask bounding box; 0 outside
            the mask, 1..bins inside.
        mask: boolean array of the same cropped shape.
        bins: configured bin count B.
        bin_edges: B+1 strictly increasing edges.
        intensities: raw in-mask intensities (1-D, C-order over the crop).
        degenerate: True when the in-mask range was zero (all labels 1).
    """

    label_volume: np.ndarray
    mask: np.ndarray
    bins: int
    bin_edges: np.ndarray
    intensities: np.ndarray
    degenerate: bool = False

    @property
    def labels(self) -> np.ndarray:
        """1-D bin label per in-mask voxel."""
        return self.label_volume[self.mask]

    @property
    def n_voxels(self) -> int:
        return int(self.mask.sum())

    @property
    def max_level(self) -> int:
        """Highest occupied bin index (the cited library's Ng)."""
        return int(self.label_volume.max())


def _crop_to_mask(mask: np.ndarray):
    coords = np.argwhere(mask)
    lo = coords.min(axis=0)
    hi = coords.max(axis=0) + 1
    return tuple(slice(a, b) for a, b in zip(lo, hi))


def discretize(volume: ImageVolume, mask: BinaryMask, bins: int = 50) -> DiscretizedRoi:
    """Discretize the in-mask intensities of ``volume`` into ``bins`` levels."""
    if bins < 1:
        raise DataError(f"bin count must be >= 1, got {bins}")
    mask.check_paired(volume)
    if mask.n_foreground == 0:
        raise DataError("cannot discretize an empty mask")

    box = _crop_to_mask(mask.voxels)
    sub_mask = mask.voxels[box]
    sub_vals = volume.voxels[box].astype(np.float64)
    inside = sub_vals[sub_mask]

    lo = float(inside.min())
    hi = float(inside.max())
    degenerate = hi == lo
    label_volume = np.zeros(sub_mask.shape, dtype=np.int32)
    if degenerate:
        warnings.warn("degenerate intensity range: all in-mask voxels map to bin 1")
        edges = np.array([lo, lo + 1.0])
        label_volume[sub_mask] = 1
    else:
        edges = np.linspace(lo, hi, bins + 1)
        label_volume[sub_mask] = np.digitize(inside, edges[1:-1], right=False) + 1
    return DiscretizedRoi(
        label_volume=label_volume,
        mask=sub_mask,
        bins=bins,
        bin_edges=edges,
        intensities=inside,
        degenerate=degenerate,
    )
