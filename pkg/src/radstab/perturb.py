"""Segmentation-variant generation and overlap quantification.

Four variants are derived from a reference mask: three morphological
closings with growing ball kernels (dilate 5 / erode 5, dilate 9 / erode 9,
dilate 11 / erode 9) and the ellipsoid inscribed in the reference's
axis-aligned bounding box.  Overlap with the reference is measured by the
Dice similarity coefficient.

Morphology operates in voxel space (anisotropic spacing is ignored).  Ball
dilation and erosion are computed through the exact Euclidean distance
transform, which is identical to set morphology with the ball structuring
element: a voxel is dilated in iff some mask voxel lies within distance r,
and survives erosion iff no in-array background voxel lies within r.  Out of
array bounds counts as foreground for erosion, so closings remain extensive
even when the dilated mask is clipped at the border; border contact is
recorded per variant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import DataError
from .volumes import BinaryMask

DEFAULT_CLOSING_RECIPES = {
    "closing_08": (5, 5),
    "closing_07": (9, 9),
    "closing_06": (11, 9),
}
VARIANT_ORDER = ("closing_08", "closing_07", "closing_06", "ellipsoid_04")


@dataclass(frozen=True)
class StructuringElement:
    """Ball structuring element: integer offsets with Euclidean norm <= radius."""

    radius: int
    offsets: np.ndarray  # (n, 3) int offsets, (dz, dy, dx)

    @property
    def footprint(self) -> np.ndarray:
        """Dense (2r+1)^3 boolean array centred on the origin."""
        r = self.radius
        fp = np.zeros((2 * r + 1,) * 3, dtype=bool)
        idx = self.offsets + r
        fp[idx[:, 0], idx[:, 1], idx[:, 2]] = True
        return fp


def ball(radius: int) -> StructuringElement:
    """All integer 3-vectors within Euclidean distance ``radius`` of the origin."""
    radius = int(radius)
    if radius < 1:
        raise DataError(f"ball radius must be >= 1, got {radius}")
    grid = np.arange(-radius, radius + 1)
    dz, dy, dx = np.meshgrid(grid, grid, grid, indexing="ij")
    keep = dz * dz + dy * dy + dx * dx <= radius * radius
    offsets = np.stack([dz[keep], dy[keep], dx[keep]], axis=1)
    return StructuringElement(radius=radius, offsets=offsets)


def _squared_distances(zero_set: np.ndarray) -> np.ndarray:
    """Integer squared Euclidean distance to the nearest True voxel."""
    dt = ndimage.distance_transform_edt(~zero_set)
    return np.rint(dt * dt)


def dilate(mask: BinaryMask, element: StructuringElement) -> BinaryMask:
    """Ball dilation, clipped at array bounds; output contains the input."""
    if mask.n_foreground == 0:
        raise DataError("cannot dilate an empty mask")
    d2 = _squared_distances(mask.voxels)
    out = d2 <= element.radius * element.radius
    return BinaryMask(voxels=out, spacing=mask.spacing)


def erode(mask: BinaryMask, element: StructuringElement) -> BinaryMask:
    """Ball erosion; voxels beyond the array border count as foreground."""
    if mask.n_foreground == 0:
        raise DataError("cannot erode an empty mask")
    background = ~mask.voxels
    if not background.any():
        return BinaryMask(voxels=mask.voxels.copy(), spacing=mask.spacing)
    d2 = _squared_distances(background)
    out = mask.voxels & (d2 > element.radius * element.radius)
    return BinaryMask(voxels=out, spacing=mask.spacing)


def dice(a: BinaryMask, b: BinaryMask) -> float:
    """Dice similarity coefficient 2|a&b| / (|a|+|b|)."""
    if a.voxels.shape != b.voxels.shape:
        raise DataError(
            f"dice requires equal dims, got {a.dims} vs {b.dims}"
        )
    size_a = a.n_foreground
    size_b = b.n_foreground
    if size_a == 0 and size_b == 0:
        raise DataError("dice is undefined for two empty masks")
    inter = int(np.logical_and(a.voxels, b.voxels).sum())
    return 2.0 * inter / (size_a + size_b)


def inscribed_ellipsoid(reference: BinaryMask) -> BinaryMask:
    """Ellipsoid inscribed in the reference's axis-aligned bounding box."""
    if reference.n_foreground == 0:
        raise DataError("cannot build an ellipsoid from an empty mask")
    coords = np.argwhere(reference.voxels)
    lo = coords.min(axis=0).astype(float)
    hi = coords.max(axis=0).astype(float)
    center = (lo + hi) / 2.0
    semi = np.maximum((hi - lo) / 2.0, 0.5)
    zz, yy, xx = np.ogrid[[slice(0, n) for n in reference.voxels.shape]]
    r2 = (
        ((zz - center[0]) / semi[0]) ** 2
        + ((yy - center[1]) / semi[1]) ** 2
        + ((xx - center[2]) / semi[2]) ** 2
    )
    return BinaryMask(voxels=r2 <= 1.0, spacing=reference.spacing)


def _touches_border(voxels: np.ndarray) -> bool:
    return bool(
        voxels[0].any() or voxels[-1].any()
        or voxels[:, 0].any() or voxels[:, -1].any()
        or voxels[:, :, 0].any() or voxels[:, :, -1].any()
    )


@dataclass
class VariantSet:
    """Named segmentation variants of one reference mask plus their DSC."""

    reference: BinaryMask
    variants: dict = field(default_factory=dict)
    dsc: dict = field(default_factory=dict)
    border_contact: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)


def make_variants(reference: BinaryMask, closing_recipes=None) -> VariantSet:
    """Generate the four segmentation variants from a reference mask.

    ``closing_recipes`` maps variant name to (dilation radius, erosion
    radius); the inscribed ellipsoid is always added as ``ellipsoid_04``.
    Variants that come out empty are dropped with a warning record.
    """
    if reference.n_foreground == 0:
        raise DataError("reference mask is empty")
    recipes = dict(DEFAULT_CLOSING_RECIPES if closing_recipes is None else closing_recipes)
    result = VariantSet(reference=reference)

    candidates = {}
    for name, (r_dil, r_ero) in recipes.items():
        dilated = dilate(reference, ball(r_dil))
        closed = erode(dilated, ball(r_ero))
        candidates[name] = (closed, _touches_border(dilated.voxels))
    ellip = inscribed_ellipsoid(reference)
    candidates["ellipsoid_04"] = (ellip, _touches_border(ellip.voxels))

    for name, (mask, border) in candidates.items():
        if mask.n_foreground == 0:
            msg = f"variant '{name}' is empty and was dropped"
            result.warnings.append(msg)
            warnings.warn(msg)
            continue
        result.variants[name] = mask
        result.dsc[name] = dice(mask, reference)
        result.border_contact[name] = border
    return result
