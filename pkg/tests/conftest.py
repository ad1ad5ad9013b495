import numpy as np
import pytest

from radstab import BinaryMask, ImageVolume


def make_ball_mask(radius, size=None, spacing=(1.0, 1.0, 1.0)):
    size = size or int(2 * radius + 8)
    zz, yy, xx = np.mgrid[0:size, 0:size, 0:size].astype(float)
    c = (size - 1) / 2
    vox = (zz - c) ** 2 + (yy - c) ** 2 + (xx - c) ** 2 <= radius**2
    return BinaryMask(vox, spacing)


def random_roi_labels(rng, shape=(5, 5, 5), levels=6, mask_p=0.8):
    """Random discretized ROI: labels 1..levels inside, 0 outside."""
    labels = rng.integers(1, levels + 1, size=shape).astype(np.int32)
    mask = rng.random(shape) < mask_p
    if not mask.any():
        mask[tuple(s // 2 for s in shape)] = True
    labels[~mask] = 0
    return labels


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_volume(rng):
    return ImageVolume(rng.normal(0, 1, (12, 12, 12)))


@pytest.fixture
def small_mask():
    vox = np.zeros((12, 12, 12), dtype=bool)
    vox[3:9, 3:9, 3:9] = True
    return BinaryMask(vox)
