"""3-D shape descriptors (14 features) from a meshed mask surface.

The mask is padded and meshed with marching cubes at level 0.5.  Surface
area and mesh volume are measured on a Taubin-faired copy of that mesh
(10 lambda/mu passes), which removes the staircase faceting of a binary
surface without the volume shrinkage of plain Laplacian smoothing; maximum
diameters use the raw mesh vertices, whose coordinates lie on exact voxel
half-planes.  Axis lengths derive from a PCA of the physical voxel-centre
coordinates (4 * sqrt(eigenvalue) convention, sample covariance).  Masks too
small to mesh fall back to voxel-based approximations and are flagged via a
warning.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import sparse
from scipy.spatial import ConvexHull, QhullError
from skimage import measure

from .errors import DataError
from .volumes import BinaryMask

SHAPE_NAMES = (
    "Elongation",
    "Flatness",
    "LeastAxisLength",
    "MajorAxisLength",
    "Maximum2DDiameterColumn",
    "Maximum2DDiameterRow",
    "Maximum2DDiameterSlice",
    "Maximum3DDiameter",
    "MeshVolume",
    "MinorAxisLength",
    "Sphericity",
    "SurfaceArea",
    "SurfaceVolumeRatio",
    "VoxelVolume",
)


def _mesh(mask_voxels: np.ndarray, spacing_zyx):
    padded = np.pad(mask_voxels, 1).astype(np.float64)
    verts, faces, _, _ = measure.marching_cubes(
        padded, level=0.5, spacing=spacing_zyx
    )
    return verts, faces


def _taubin_fair(verts: np.ndarray, faces: np.ndarray,
                 lam=0.5, mu=-0.53, iterations=10) -> np.ndarray:
    """Taubin lambda/mu mesh fairing: smooths MC staircase with low shrinkage."""
    n = len(verts)
    rows = np.concatenate([faces[:, 0], faces[:, 1], faces[:, 0],
                           faces[:, 2], faces[:, 1], faces[:, 2]])
    cols = np.concatenate([faces[:, 1], faces[:, 0], faces[:, 2],
                           faces[:, 0], faces[:, 2], faces[:, 1]])
    adj = sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(n, n)
    )
    adj.data[:] = 1.0
    degree = np.asarray(adj.sum(axis=1)).ravel()
    averaging = sparse.diags(1.0 / np.maximum(degree, 1)) @ adj
    out = verts.copy()
    for _ in range(iterations):
        out = out + lam * (averaging @ out - out)
        out = out + mu * (averaging @ out - out)
    return out


def _mesh_area_volume(verts: np.ndarray, faces: np.ndarray):
    a = verts[faces[:, 0]]
    b = verts[faces[:, 1]]
    c = verts[faces[:, 2]]
    cross = np.cross(b - a, c - a)
    area = 0.5 * np.linalg.norm(cross, axis=1).sum()
    volume = abs(np.einsum("ij,ij->i", a, np.cross(b, c)).sum()) / 6.0
    return float(area), float(volume)


def _hull_points(points: np.ndarray) -> np.ndarray:
    if len(points) > 16:
        try:
            hull = ConvexHull(points)
            return points[hull.vertices]
        except QhullError:
            pass
    return points


def _max_pairwise_distance(points: np.ndarray) -> float:
    pts = _hull_points(points)
    if len(pts) < 2:
        return 0.0
    diff = pts[:, None, :] - pts[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=2).max()))


def _max_planar_diameter(verts: np.ndarray, fixed_axis: int) -> float:
    """Largest in-plane distance among mesh vertices sharing ``fixed_axis``."""
    keep = [a for a in range(3) if a != fixed_axis]
    keys = np.round(verts[:, fixed_axis], 6)
    best = 0.0
    for value in np.unique(keys):
        group = verts[keys == value][:, keep]
        if len(group) < 2:
            continue
        best = max(best, _max_pairwise_distance(group))
    return best


def _axis_lengths(coords_physical: np.ndarray):
    cov = np.cov(coords_physical.T)
    eigvals = np.sort(np.linalg.eigvalsh(cov))[::-1]
    eigvals = np.clip(eigvals, 0.0, None)
    major, minor, least = 4.0 * np.sqrt(eigvals)
    elongation = float(np.sqrt(eigvals[1] / eigvals[0])) if eigvals[0] > 0 else 0.0
    flatness = float(np.sqrt(eigvals[2] / eigvals[0])) if eigvals[0] > 0 else 0.0
    return float(major), float(minor), float(least), elongation, flatness


def shape_features(mask: BinaryMask) -> dict:
    """The 14 shape descriptors of a nonempty mask."""
    if mask.n_foreground == 0:
        raise DataError("cannot compute shape features of an empty mask")
    sx, sy, sz = mask.spacing
    spacing_zyx = (sz, sy, sx)
    per_voxel = sx * sy * sz
    n = mask.n_foreground
    voxel_volume = n * per_voxel

    coords = np.argwhere(mask.voxels).astype(np.float64) * np.array(spacing_zyx)

    if n < 2:
        warnings.warn("single-voxel mask: shape features use voxel approximations")
        area = 2.0 * (sx * sy + sy * sz + sx * sz)
        diag = float(np.sqrt(sx**2 + sy**2 + sz**2))
        sides = sorted((sx, sy, sz), reverse=True)
        return {
            "Elongation": 1.0,
            "Flatness": 1.0,
            "LeastAxisLength": sides[2],
            "MajorAxisLength": sides[0],
            "Maximum2DDiameterColumn": float(np.sqrt(sy**2 + sz**2)),
            "Maximum2DDiameterRow": float(np.sqrt(sx**2 + sz**2)),
            "Maximum2DDiameterSlice": float(np.sqrt(sx**2 + sy**2)),
            "Maximum3DDiameter": diag,
            "MeshVolume": voxel_volume,
            "MinorAxisLength": sides[1],
            "Sphericity": float((36.0 * np.pi * voxel_volume**2) ** (1.0 / 3.0) / area),
            "SurfaceArea": area,
            "SurfaceVolumeRatio": area / voxel_volume,
            "VoxelVolume": voxel_volume,
        }

    verts, faces = _mesh(mask.voxels, spacing_zyx)
    verts = verts - np.array(spacing_zyx)  # undo the one-voxel pad
    area, mesh_volume = _mesh_area_volume(_taubin_fair(verts, faces), faces)
    major, minor, least, elongation, flatness = _axis_lengths(coords)

    return {
        "Elongation": elongation,
        "Flatness": flatness,
        "LeastAxisLength": least,
        "MajorAxisLength": major,
        "Maximum2DDiameterColumn": _max_planar_diameter(verts, fixed_axis=2),
        "Maximum2DDiameterRow": _max_planar_diameter(verts, fixed_axis=1),
        "Maximum2DDiameterSlice": _max_planar_diameter(verts, fixed_axis=0),
        "Maximum3DDiameter": _max_pairwise_distance(verts),
        "MeshVolume": mesh_volume,
        "MinorAxisLength": minor,
        "Sphericity": float((36.0 * np.pi * mesh_volume**2) ** (1.0 / 3.0) / area),
        "SurfaceArea": area,
        "SurfaceVolumeRatio": area / mesh_volume,
        "VoxelVolume": voxel_volume,
    }
