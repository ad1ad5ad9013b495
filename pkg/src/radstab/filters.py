"""The 12 filtered images: original, 8 wavelet subbands, LoG at three scales.

Both filters are linear, same-size, and use symmetric boundary reflection.

* LoG builds its kernel in physical units: the per-axis Gaussian sigma is
  ``sigma_mm / spacing_axis`` voxels, second derivatives are divided by the
  squared spacing, and kernels are truncated at 4 sigma.  No scale
  normalization is applied, so the response to f(x) = x^2 (x in mm) is 2.
* The wavelet transform is a single-level undecimated separable 3-D
  decomposition.  Subband names use (x, y, z) letter order: "HLH" means
  high-pass along x, low-pass along y, high-pass along z.  Each 1-D stage is
  a correlation with the decomposition filter, centred at tap ``len // 2``:

      out[i] = sum_k w[k] * x_sym(i + k - len(w) // 2)

  with symmetric reflection at the boundaries.  The default family is
  Coiflet-1; Haar and Daubechies-2 banks are also available.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .errors import DataError
from .volumes import ImageVolume

SUBBAND_ORDER = ("LLL", "LLH", "LHL", "LHH", "HLL", "HLH", "HHL", "HHH")
DEFAULT_LOG_SIGMAS = (1.0, 2.0, 3.0)

_SQRT2 = float(np.sqrt(2.0))

# Orthogonal decomposition low-pass filters; the high-pass is the quadrature
# mirror h[k] = (-1)^(k+1) * g[L-1-k].
_DEC_LO = {
    "haar": np.array([1.0, 1.0]) / _SQRT2,
    "db2": np.array([
        -0.12940952255092145,
        0.22414386804185735,
        0.836516303737469,
        0.48296291314469025,
    ]),
    "coif1": np.array([
        -0.01565572813546454,
        -0.0727326195128539,
        0.38486484686420286,
        0.8525720202122554,
        0.3378976624578092,
        -0.0727326195128539,
    ]),
}


def wavelet_filter_bank(family: str) -> tuple[np.ndarray, np.ndarray]:
    """(low-pass, high-pass) decomposition filters for a wavelet family."""
    if family not in _DEC_LO:
        raise DataError(
            f"unknown wavelet family '{family}'; available: {sorted(_DEC_LO)}"
        )
    lo = _DEC_LO[family]
    n = len(lo)
    hi = np.array([(-1.0) ** (k + 1) * lo[n - 1 - k] for k in range(n)])
    return lo, hi


def filter_ids(log_sigmas=DEFAULT_LOG_SIGMAS, use_wavelet=True, use_log=True):
    """Deterministic list of filter identifiers for an extraction config."""
    ids = ["original"]
    if use_wavelet:
        ids += [f"wavelet-{band}" for band in SUBBAND_ORDER]
    if use_log:
        ids += [f"log-sigma-{s:g}" for s in log_sigmas]
    return ids


def gaussian_kernel1d(sigma_vox: float, order: int) -> np.ndarray:
    """Sampled Gaussian (order 0) or second-derivative kernel, truncated 4 sigma.

    The derivative kernel is moment-corrected so discrete responses are
    exact: zero on constants, 2 on j^2 (index units).
    """
    radius = max(1, int(np.ceil(4.0 * sigma_vox)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-0.5 * (x / sigma_vox) ** 2)
    g /= g.sum()
    if order == 0:
        return g
    if order != 2:
        raise DataError(f"only orders 0 and 2 are supported, got {order}")
    k = g * ((x / sigma_vox**2) ** 2 - 1.0 / sigma_vox**2)
    k -= k.mean()
    k *= 2.0 / (k * x**2).sum()
    return k


def log_filter(volume: ImageVolume, sigma_mm: float) -> ImageVolume:
    """Laplacian-of-Gaussian response in physical units (mm^-2)."""
    if sigma_mm <= 0:
        raise DataError(f"sigma must be positive, got {sigma_mm}")
    nz, ny, nx = volume.voxels.shape
    sx, sy, sz = volume.spacing
    extents = (nx * sx, ny * sy, nz * sz)
    if min(extents) <= 4.0 * sigma_mm:
        raise DataError(
            f"sigma {sigma_mm} mm too large: need min physical extent "
            f"> {4.0 * sigma_mm} mm, volume has {min(extents):.1f} mm"
        )
    spacing_zyx = (sz, sy, sx)
    sigma_vox = [sigma_mm / s for s in spacing_zyx]
    data = volume.voxels.astype(np.float64)
    out = np.zeros_like(data)
    for deriv_axis in range(3):
        term = data
        for axis in range(3):
            kernel = gaussian_kernel1d(
                sigma_vox[axis], 2 if axis == deriv_axis else 0
            )
            term = ndimage.correlate1d(term, kernel, axis=axis, mode="reflect")
        out += term / spacing_zyx[deriv_axis] ** 2
    return ImageVolume(voxels=out, spacing=volume.spacing)


def _correlate_axis(data: np.ndarray, weights: np.ndarray, axis: int) -> np.ndarray:
    # scipy centres even-length kernels at len // 2, matching the documented
    # indexing convention; 'reflect' is symmetric half-sample reflection.
    return ndimage.correlate1d(data, weights, axis=axis, mode="reflect", origin=0)


def wavelet_decompose(volume: ImageVolume, family: str = "coif1") -> dict:
    """Single-level undecimated 3-D wavelet transform; 8 same-size subbands."""
    lo, hi = wavelet_filter_bank(family)
    nz, ny, nx = volume.voxels.shape
    if min(nz, ny, nx) < len(lo):
        raise DataError(
            f"volume dims {volume.dims} smaller than filter length {len(lo)}"
        )
    data = volume.voxels.astype(np.float64)
    # Letter position 0 filters along x (array axis 2), 1 along y, 2 along z.
    axis_for_letter = (2, 1, 0)
    subbands = {}
    for name in SUBBAND_ORDER:
        out = data
        for letter, axis in zip(name, axis_for_letter):
            out = _correlate_axis(out, hi if letter == "H" else lo, axis)
        subbands[name] = ImageVolume(voxels=out, spacing=volume.spacing)
    return subbands


def apply_filter(volume: ImageVolume, filter_id: str, wavelet_family="coif1",
                 _wavelet_cache=None) -> ImageVolume:
    """Dispatch a filter id to its implementation.

    ``_wavelet_cache`` lets callers reuse one decomposition across the eight
    subband ids of the same volume.
    """
    if filter_id == "original":
        return volume
    if filter_id.startswith("wavelet-"):
        band = filter_id.split("-", 1)[1]
        if band not in SUBBAND_ORDER:
            raise DataError(f"unknown wavelet subband '{band}'")
        if _wavelet_cache is not None:
            if not _wavelet_cache:
                _wavelet_cache.update(wavelet_decompose(volume, wavelet_family))
            return _wavelet_cache[band]
        return wavelet_decompose(volume, wavelet_family)[band]
    if filter_id.startswith("log-sigma-"):
        sigma = float(filter_id.rsplit("-", 1)[1])
        return log_filter(volume, sigma)
    raise DataError(f"unknown filter id '{filter_id}'")
