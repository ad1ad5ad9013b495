"""Texture matrices and their features: GLCM, GLRLM, GLSZM, GLDM, NGTDM.

Definitions follow the documented formulas of the standard extraction
library this workbench is calibrated against:

* GLCM: 13 unique distance-1 offsets, symmetrized, normalized per angle,
  features averaged over angles.  Gray levels run 1..Ng where Ng is the
  highest occupied bin; absent intermediate levels occupy empty rows.
* GLRLM: runs of equal gray level along the same 13 directions, features per
  direction then averaged.
* GLSZM: zones are 26-connected components of equal gray level; one matrix.
* GLDM: distance-1 neighbourhood, a neighbour is dependent when its level
  differs by at most ``alpha`` (default 0); dependence size counts the centre
  voxel plus its dependent neighbours.
* NGTDM: per-level sums of absolute differences from the mean level of the
  26-neighbourhood (in-mask neighbours only); voxels without any in-mask
  neighbour are excluded from the counts.

Degenerate regions (e.g. a single voxel has no co-occurring pairs) yield
NaN feature values, which callers treat as flagged-missing.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .discretize import DiscretizedRoi

_EPS = np.spacing(1.0)

# The 13 unique direction vectors (dz, dy, dx) of a distance-1 3-D
# neighbourhood, one per +/- pair of the 26-neighbourhood.
DIRECTIONS_13 = tuple(
    (dz, dy, dx)
    for dz in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dx in (-1, 0, 1)
    if (dz, dy, dx) > (0, 0, 0)
)
DIRECTIONS_26 = tuple(
    (dz, dy, dx)
    for dz in (-1, 0, 1)
    for dy in (-1, 0, 1)
    for dx in (-1, 0, 1)
    if (dz, dy, dx) != (0, 0, 0)
)

GLCM_NAMES = (
    "Autocorrelation", "ClusterProminence", "ClusterShade", "ClusterTendency",
    "Contrast", "Correlation", "DifferenceAverage", "DifferenceEntropy",
    "DifferenceVariance", "Id", "Idm", "Idmn", "Idn", "Imc1", "Imc2",
    "InverseVariance", "JointAverage", "JointEnergy", "JointEntropy", "MCC",
    "MaximumProbability", "SumAverage", "SumEntropy", "SumSquares",
)
GLRLM_NAMES = (
    "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
    "GrayLevelVariance", "HighGrayLevelRunEmphasis", "LongRunEmphasis",
    "LongRunHighGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis",
    "LowGrayLevelRunEmphasis", "RunEntropy", "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized", "RunPercentage", "RunVariance",
    "ShortRunEmphasis", "ShortRunHighGrayLevelEmphasis",
    "ShortRunLowGrayLevelEmphasis",
)
GLSZM_NAMES = (
    "GrayLevelNonUniformity", "GrayLevelNonUniformityNormalized",
    "GrayLevelVariance", "HighGrayLevelZoneEmphasis", "LargeAreaEmphasis",
    "LargeAreaHighGrayLevelEmphasis", "LargeAreaLowGrayLevelEmphasis",
    "LowGrayLevelZoneEmphasis", "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized", "SmallAreaEmphasis",
    "SmallAreaHighGrayLevelEmphasis", "SmallAreaLowGrayLevelEmphasis",
    "ZoneEntropy", "ZonePercentage", "ZoneVariance",
)
GLDM_NAMES = (
    "DependenceEntropy", "DependenceNonUniformity",
    "DependenceNonUniformityNormalized", "DependenceVariance",
    "GrayLevelNonUniformity", "GrayLevelVariance", "HighGrayLevelEmphasis",
    "LargeDependenceEmphasis", "LargeDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis", "LowGrayLevelEmphasis",
    "SmallDependenceEmphasis", "SmallDependenceHighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis",
)
NGTDM_NAMES = ("Busyness", "Coarseness", "Complexity", "Contrast", "Strength")


def _offset_slices(shape, offset):
    """Aligned views (src, dst) with dst = src + offset, clipped to bounds."""
    src, dst = [], []
    for n, step in zip(shape, offset):
        if step >= 0:
            src.append(slice(0, n - step))
            dst.append(slice(step, n))
        else:
            src.append(slice(-step, n))
            dst.append(slice(0, n + step))
    return tuple(src), tuple(dst)


def _nan_features(names) -> dict:
    return {name: float("nan") for name in names}


# ---------------------------------------------------------------------------
# GLCM
# ---------------------------------------------------------------------------

def glcm_matrix(roi: DiscretizedRoi) -> np.ndarray:
    """Stack of per-angle symmetric normalized GLCMs, shape (Ng, Ng, A)."""
    labels = roi.label_volume
    ng = roi.max_level
    mats = []
    for offset in DIRECTIONS_13:
        src, dst = _offset_slices(labels.shape, offset)
        a = labels[src].ravel()
        b = labels[dst].ravel()
        valid = (a > 0) & (b > 0)
        if not valid.any():
            continue
        idx = (a[valid] - 1) * ng + (b[valid] - 1)
        m = np.bincount(idx, minlength=ng * ng).astype(np.float64).reshape(ng, ng)
        m = m + m.T
        mats.append(m / m.sum())
    if not mats:
        return np.zeros((ng, ng, 0))
    return np.stack(mats, axis=-1)


def _glcm_mcc(p: np.ndarray, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Per-angle maximal correlation coefficient of the stack ``p``."""
    ng = p.shape[0]
    if ng < 2:
        return np.ones(p.shape[2])
    out = np.empty(p.shape[2])
    for a in range(p.shape[2]):
        pk = p[:, :, a]
        # Q(i, j) = sum_k p(i,k) p(j,k) / (px(i) py(k) + eps)
        denom = px[:, 0, a][:, None] * py[0, :, a][None, :] + _EPS
        q = (pk / denom) @ pk.T
        eig = np.sort(np.linalg.eigvals(q).real)
        second = eig[-2]
        out[a] = np.sqrt(second) if second >= 0 else np.nan
    return out


def glcm_features(roi: DiscretizedRoi) -> dict:
    """The 24 co-occurrence features, averaged over angles."""
    p = glcm_matrix(roi)
    if p.shape[2] == 0:
        return _nan_features(GLCM_NAMES)
    ng = p.shape[0]
    levels = np.arange(1, ng + 1, dtype=np.float64)
    i = levels[:, None, None]
    j = levels[None, :, None]

    px = p.sum(1, keepdims=True)  # (Ng, 1, A)
    py = p.sum(0, keepdims=True)  # (1, Ng, A)
    ux = (i * p).sum((0, 1), keepdims=True)
    uy = (j * p).sum((0, 1), keepdims=True)
    sigx = np.sqrt((p * (i - ux) ** 2).sum((0, 1), keepdims=True))
    sigy = np.sqrt((p * (j - uy) ** 2).sum((0, 1), keepdims=True))

    k_sum = np.arange(2, 2 * ng + 1, dtype=np.float64)
    k_diff = np.arange(0, ng, dtype=np.float64)
    ii, jj = np.meshgrid(levels, levels, indexing="ij")
    p_sum = np.array([p[ii + jj == k].sum(0) for k in k_sum])      # (2Ng-1, A)
    p_diff = np.array([p[np.abs(ii - jj) == k].sum(0) for k in k_diff])  # (Ng, A)

    hx = -(px * np.log2(px + _EPS)).sum((0, 1))
    hy = -(py * np.log2(py + _EPS)).sum((0, 1))
    hxy = -(p * np.log2(p + _EPS)).sum((0, 1))
    hxy1 = -(p * np.log2(px * py + _EPS)).sum((0, 1))
    hxy2 = -((px * py) * np.log2(px * py + _EPS)).sum((0, 1))

    diff_avg = (k_diff[:, None] * p_diff).sum(0)
    sum_avg = (k_sum[:, None] * p_sum).sum(0)

    with np.errstate(invalid="ignore", divide="ignore"):
        sig_prod = (sigx * sigy)[0, 0]
        corr_num = (p * (i - ux) * (j - uy)).sum((0, 1))
        correlation = np.where(sig_prod > 0, corr_num / np.where(sig_prod > 0, sig_prod, 1.0), 1.0)
        max_h = np.maximum(hx, hy)
        imc1 = np.where(max_h > 0, (hxy - hxy1) / np.where(max_h > 0, max_h, 1.0), 0.0)
    imc2 = np.sqrt(np.clip(1.0 - np.exp(-2.0 * (hxy2 - hxy)), 0.0, None))

    off_diag = np.abs(ii - jj) > 0
    inv_var = np.array([
        (p[:, :, k][off_diag] / (ii - jj)[off_diag] ** 2).sum()
        for k in range(p.shape[2])
    ])

    feats = {
        "Autocorrelation": (p * i * j).sum((0, 1)),
        "ClusterProminence": (p * (i + j - ux - uy) ** 4).sum((0, 1)),
        "ClusterShade": (p * (i + j - ux - uy) ** 3).sum((0, 1)),
        "ClusterTendency": (p * (i + j - ux - uy) ** 2).sum((0, 1)),
        "Contrast": (p * (i - j) ** 2).sum((0, 1)),
        "Correlation": correlation,
        "DifferenceAverage": diff_avg,
        "DifferenceEntropy": -(p_diff * np.log2(p_diff + _EPS)).sum(0),
        "DifferenceVariance": (p_diff * (k_diff[:, None] - diff_avg) ** 2).sum(0),
        "Id": (p / (1.0 + np.abs(i - j))).sum((0, 1)),
        "Idm": (p / (1.0 + (i - j) ** 2)).sum((0, 1)),
        "Idmn": (p / (1.0 + (i - j) ** 2 / ng**2)).sum((0, 1)),
        "Idn": (p / (1.0 + np.abs(i - j) / ng)).sum((0, 1)),
        "Imc1": imc1,
        "Imc2": imc2,
        "InverseVariance": inv_var,
        "JointAverage": ux[0, 0],
        "JointEnergy": (p**2).sum((0, 1)),
        "JointEntropy": hxy,
        "MCC": _glcm_mcc(p, px, py),
        "MaximumProbability": p.max((0, 1)),
        "SumAverage": sum_avg,
        "SumEntropy": -(p_sum * np.log2(p_sum + _EPS)).sum(0),
        "SumSquares": (p * (i - ux) ** 2).sum((0, 1)),
    }
    return {name: float(np.nanmean(vals)) for name, vals in feats.items()}


# ---------------------------------------------------------------------------
# GLRLM
# ---------------------------------------------------------------------------

def glrlm_matrices(roi: DiscretizedRoi) -> list[np.ndarray]:
    """One run-length matrix (Ng, max run length) per direction."""
    labels = roi.label_volume
    mask = roi.mask
    shape = labels.shape
    ng = roi.max_level
    matrices = []
    for offset in DIRECTIONS_13:
        src, dst = _offset_slices(shape, offset)
        same = np.zeros(shape, dtype=bool)
        same[src] = mask[src] & mask[dst] & (labels[src] == labels[dst])

        prev = np.zeros(shape, dtype=bool)
        prev[dst] = same[src]  # prev[v] == run continues into v from v - offset
        starts = mask & ~prev

        # lengths[v] = 1 + number of consecutive "same" steps from v:
        # alive holds A_j[v] = same[v] & same[v+d] & ... & same[v+(j-1)d]
        lengths = np.ones(shape, dtype=np.int64)
        alive = same.copy()
        step = 1
        while alive.any():
            lengths += alive
            shifted = np.zeros(shape, dtype=bool)
            ssrc, sdst = _offset_slices(shape, tuple(c * step for c in offset))
            shifted[ssrc] = same[sdst]
            alive &= shifted
            step += 1

        run_levels = labels[starts]
        run_lengths = lengths[starts]
        max_len = int(run_lengths.max())
        idx = (run_levels - 1) * max_len + (run_lengths - 1)
        mat = np.bincount(idx, minlength=ng * max_len).astype(np.float64)
        matrices.append(mat.reshape(ng, max_len))
    return matrices


def _gray_length_features(mat: np.ndarray, n_voxels: int, kind: str) -> dict:
    """Shared feature formulas of gray-level x size/length/dependence matrices."""
    nr = mat.sum()
    p = mat / nr
    ng, nl = mat.shape
    i = np.arange(1, ng + 1, dtype=np.float64)[:, None]
    j = np.arange(1, nl + 1, dtype=np.float64)[None, :]
    pg = mat.sum(1)
    pl = mat.sum(0)
    mu_i = (p * i).sum()
    mu_j = (p * j).sum()
    pos = p[p > 0]
    short = {
        "GrayLevelNonUniformity": (pg**2).sum() / nr,
        "GrayLevelNonUniformityNormalized": (pg**2).sum() / nr**2,
        "GrayLevelVariance": (p * (i - mu_i) ** 2).sum(),
        f"HighGrayLevel{kind}Emphasis": (mat * i**2).sum() / nr,
        f"LowGrayLevel{kind}Emphasis": (mat / i**2).sum() / nr,
    }
    return short, nr, p, i, j, pg, pl, mu_j, pos


def glrlm_features(roi: DiscretizedRoi) -> dict:
    """The 16 run-length features, averaged over 13 directions."""
    mats = glrlm_matrices(roi)
    np_vox = roi.n_voxels
    acc = {name: [] for name in GLRLM_NAMES}
    for mat in mats:
        short, nr, p, i, j, pg, pl, mu_j, pos = _gray_length_features(mat, np_vox, "Run")
        acc["GrayLevelNonUniformity"].append(short["GrayLevelNonUniformity"])
        acc["GrayLevelNonUniformityNormalized"].append(short["GrayLevelNonUniformityNormalized"])
        acc["GrayLevelVariance"].append(short["GrayLevelVariance"])
        acc["HighGrayLevelRunEmphasis"].append(short["HighGrayLevelRunEmphasis"])
        acc["LowGrayLevelRunEmphasis"].append(short["LowGrayLevelRunEmphasis"])
        acc["LongRunEmphasis"].append((mat * j**2).sum() / nr)
        acc["LongRunHighGrayLevelEmphasis"].append((mat * i**2 * j**2).sum() / nr)
        acc["LongRunLowGrayLevelEmphasis"].append((mat * j**2 / i**2).sum() / nr)
        acc["RunEntropy"].append(-(pos * np.log2(pos)).sum())
        acc["RunLengthNonUniformity"].append((pl**2).sum() / nr)
        acc["RunLengthNonUniformityNormalized"].append((pl**2).sum() / nr**2)
        acc["RunPercentage"].append(nr / np_vox)
        acc["RunVariance"].append((p * (j - mu_j) ** 2).sum())
        acc["ShortRunEmphasis"].append((mat / j**2).sum() / nr)
        acc["ShortRunHighGrayLevelEmphasis"].append((mat * i**2 / j**2).sum() / nr)
        acc["ShortRunLowGrayLevelEmphasis"].append((mat / (i**2 * j**2)).sum() / nr)
    return {name: float(np.mean(vals)) for name, vals in acc.items()}


# ---------------------------------------------------------------------------
# GLSZM
# ---------------------------------------------------------------------------

def glszm_matrix(roi: DiscretizedRoi) -> np.ndarray:
    """Zone-size matrix (Ng, max zone size), zones by 26-connectivity."""
    labels = roi.label_volume
    ng = roi.max_level
    structure = np.ones((3, 3, 3), dtype=bool)
    zones = []
    for level in np.unique(labels[labels > 0]):
        comp, n_comp = ndimage.label(labels == level, structure=structure)
        if n_comp == 0:
            continue
        sizes = np.bincount(comp.ravel())[1:]
        zones.extend((int(level), int(s)) for s in sizes)
    max_size = max(s for _, s in zones)
    mat = np.zeros((ng, max_size), dtype=np.float64)
    for level, size in zones:
        mat[level - 1, size - 1] += 1.0
    return mat


def glszm_features(roi: DiscretizedRoi) -> dict:
    """The 16 size-zone features."""
    mat = glszm_matrix(roi)
    np_vox = roi.n_voxels
    short, nz, p, i, j, pg, pl, mu_j, pos = _gray_length_features(mat, np_vox, "Zone")
    return {
        "GrayLevelNonUniformity": float(short["GrayLevelNonUniformity"]),
        "GrayLevelNonUniformityNormalized": float(short["GrayLevelNonUniformityNormalized"]),
        "GrayLevelVariance": float(short["GrayLevelVariance"]),
        "HighGrayLevelZoneEmphasis": float(short["HighGrayLevelZoneEmphasis"]),
        "LargeAreaEmphasis": float((mat * j**2).sum() / nz),
        "LargeAreaHighGrayLevelEmphasis": float((mat * i**2 * j**2).sum() / nz),
        "LargeAreaLowGrayLevelEmphasis": float((mat * j**2 / i**2).sum() / nz),
        "LowGrayLevelZoneEmphasis": float(short["LowGrayLevelZoneEmphasis"]),
        "SizeZoneNonUniformity": float((pl**2).sum() / nz),
        "SizeZoneNonUniformityNormalized": float((pl**2).sum() / nz**2),
        "SmallAreaEmphasis": float((mat / j**2).sum() / nz),
        "SmallAreaHighGrayLevelEmphasis": float((mat * i**2 / j**2).sum() / nz),
        "SmallAreaLowGrayLevelEmphasis": float((mat / (i**2 * j**2)).sum() / nz),
        "ZoneEntropy": float(-(pos * np.log2(pos)).sum()),
        "ZonePercentage": float(nz / np_vox),
        "ZoneVariance": float((p * (j - mu_j) ** 2).sum()),
    }


# ---------------------------------------------------------------------------
# GLDM
# ---------------------------------------------------------------------------

def gldm_matrix(roi: DiscretizedRoi, alpha: int = 0) -> np.ndarray:
    """Dependence matrix (Ng, max dependence size); size = 1 + dependent nbrs."""
    labels = roi.label_volume
    mask = roi.mask
    shape = labels.shape
    ng = roi.max_level
    dep = np.zeros(shape, dtype=np.int64)
    for offset in DIRECTIONS_26:
        src, dst = _offset_slices(shape, offset)
        dep[src] += (
            mask[src] & mask[dst] & (np.abs(labels[src] - labels[dst]) <= alpha)
        )
    sizes = dep[mask] + 1
    levels = labels[mask]
    max_size = int(sizes.max())
    idx = (levels - 1) * max_size + (sizes - 1)
    mat = np.bincount(idx, minlength=ng * max_size).astype(np.float64)
    return mat.reshape(ng, max_size)


def gldm_features(roi: DiscretizedRoi, alpha: int = 0) -> dict:
    """The 14 dependence features."""
    mat = gldm_matrix(roi, alpha=alpha)
    short, nz, p, i, j, pg, pl, mu_j, pos = _gray_length_features(mat, roi.n_voxels, "")
    return {
        "DependenceEntropy": float(-(pos * np.log2(pos)).sum()),
        "DependenceNonUniformity": float((pl**2).sum() / nz),
        "DependenceNonUniformityNormalized": float((pl**2).sum() / nz**2),
        "DependenceVariance": float((p * (j - mu_j) ** 2).sum()),
        "GrayLevelNonUniformity": float(short["GrayLevelNonUniformity"]),
        "GrayLevelVariance": float(short["GrayLevelVariance"]),
        "HighGrayLevelEmphasis": float(short["HighGrayLevelEmphasis"]),
        "LargeDependenceEmphasis": float((mat * j**2).sum() / nz),
        "LargeDependenceHighGrayLevelEmphasis": float((mat * i**2 * j**2).sum() / nz),
        "LargeDependenceLowGrayLevelEmphasis": float((mat * j**2 / i**2).sum() / nz),
        "LowGrayLevelEmphasis": float(short["LowGrayLevelEmphasis"]),
        "SmallDependenceEmphasis": float((mat / j**2).sum() / nz),
        "SmallDependenceHighGrayLevelEmphasis": float((mat * i**2 / j**2).sum() / nz),
        "SmallDependenceLowGrayLevelEmphasis": float((mat / (i**2 * j**2)).sum() / nz),
    }


# ---------------------------------------------------------------------------
# NGTDM
# ---------------------------------------------------------------------------

def ngtdm_table(roi: DiscretizedRoi):
    """(n_i, s_i) per gray level 1..Ng from 26-neighbourhood differences."""
    labels = roi.label_volume
    mask = roi.mask
    shape = labels.shape
    ng = roi.max_level
    nbr_sum = np.zeros(shape, dtype=np.float64)
    nbr_cnt = np.zeros(shape, dtype=np.int64)
    for offset in DIRECTIONS_26:
        src, dst = _offset_slices(shape, offset)
        nbr_sum[src] += labels[dst] * mask[dst]
        nbr_cnt[src] += mask[dst]
    valid = mask & (nbr_cnt > 0)
    levels = labels[valid].astype(np.int64)
    mean_nbr = nbr_sum[valid] / nbr_cnt[valid]
    n_i = np.bincount(levels, minlength=ng + 1)[1:].astype(np.float64)
    s_i = np.bincount(
        levels, weights=np.abs(levels - mean_nbr), minlength=ng + 1
    )[1:]
    return n_i, s_i


def ngtdm_features(roi: DiscretizedRoi) -> dict:
    """The 5 neighbourhood gray-tone difference features."""
    n_i, s_i = ngtdm_table(roi)
    nvp = n_i.sum()
    if nvp == 0:
        return _nan_features(NGTDM_NAMES)
    p_i = n_i / nvp
    levels = np.arange(1, len(n_i) + 1, dtype=np.float64)
    present = p_i > 0
    ngp = int(present.sum())

    pi_p = p_i[present]
    si_p = s_i[present]
    iv = levels[present]

    coarse_denom = float((p_i * s_i).sum())
    coarseness = 1.0 / coarse_denom if coarse_denom != 0 else 1e6

    if ngp > 1:
        diff2 = (iv[:, None] - iv[None, :]) ** 2
        contrast = (
            (pi_p[:, None] * pi_p[None, :] * diff2).sum() / (ngp * (ngp - 1))
        ) * (s_i.sum() / nvp)
        busy_denom = np.abs(iv[:, None] * pi_p[:, None] - iv[None, :] * pi_p[None, :]).sum()
        busyness = float((p_i * s_i).sum() / busy_denom) if busy_denom != 0 else 0.0
        absdiff = np.abs(iv[:, None] - iv[None, :])
        weights = (pi_p[:, None] * si_p[:, None] + pi_p[None, :] * si_p[None, :]) / (
            pi_p[:, None] + pi_p[None, :]
        )
        complexity = float((absdiff * weights).sum() / nvp)
        s_total = si_p.sum()
        strength = (
            float(((pi_p[:, None] + pi_p[None, :]) * diff2).sum() / s_total)
            if s_total != 0
            else 0.0
        )
    else:
        contrast = 0.0
        busyness = 0.0
        complexity = 0.0
        strength = 0.0

    return {
        "Busyness": float(busyness),
        "Coarseness": float(coarseness),
        "Complexity": complexity,
        "Contrast": float(contrast),
        "Strength": strength,
    }
