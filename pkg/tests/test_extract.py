import numpy as np
import pytest

from radstab import (
    BinaryMask,
    DataError,
    ExtractionConfig,
    FeatureExtractor,
    ImageVolume,
)


@pytest.fixture(scope="module")
def pair():
    rng = np.random.default_rng(42)
    vol = ImageVolume(rng.normal(100, 15, (28, 28, 28)))
    zz, yy, xx = np.mgrid[0:28, 0:28, 0:28]
    mask = BinaryMask((zz - 14) ** 2 + (yy - 14) ** 2 + (xx - 13) ** 2 <= 36)
    return vol, mask


def test_default_config_yields_1130(pair):
    cfg = ExtractionConfig()
    names = cfg.feature_names()
    assert len(names) == 1130
    shape_names = [n for n in names if "|shape|" in n]
    assert len(shape_names) == 14
    per_image = [n for n in names if n.startswith("original|") and "|shape|" not in n]
    assert len(per_image) == 93
    filters = {n.split("|")[0] for n in names}
    assert len(filters) == 12
    feats = FeatureExtractor(cfg).extract(*pair)
    assert list(feats) == names
    assert len(feats) == 1130


def test_family_breakdown():
    names = ExtractionConfig().feature_names()
    counts = {}
    for n in names:
        counts[n.split("|")[1]] = counts.get(n.split("|")[1], 0) + 1
    assert counts == {
        "shape": 14,
        "firstorder": 18 * 12,
        "glcm": 24 * 12,
        "glrlm": 16 * 12,
        "glszm": 16 * 12,
        "gldm": 14 * 12,
        "ngtdm": 5 * 12,
    }


def test_extraction_deterministic(pair):
    e = FeatureExtractor()
    a = e.extract(*pair)
    b = e.extract(*pair)
    assert a == b


def test_shape_computed_once_from_original_mask(pair):
    feats = FeatureExtractor().extract(*pair)
    shape_keys = [k for k in feats if "|shape|" in k]
    assert all(k.startswith("original|") for k in shape_keys)


def test_empty_mask_rejected(pair):
    vol, _ = pair
    empty = BinaryMask(np.zeros(vol.voxels.shape, dtype=bool))
    with pytest.raises(DataError, match="empty"):
        FeatureExtractor().extract(vol, empty)


def test_dims_mismatch_rejected(pair):
    vol, _ = pair
    with pytest.raises(DataError, match="dims"):
        FeatureExtractor().extract(vol, BinaryMask(np.ones((4, 4, 4), dtype=bool)))


def test_reduced_config(pair):
    cfg = ExtractionConfig(
        use_wavelet=False, use_log=False, families=("firstorder",), include_shape=False
    )
    feats = FeatureExtractor(cfg).extract(*pair)
    assert len(feats) == 18
    assert all(k.startswith("original|firstorder|") for k in feats)


def test_column_scale_invariance_of_discrete_features(pair):
    # fixed-bin-count discretization makes texture features invariant to
    # affine intensity maps of the whole volume
    vol, mask = pair
    scaled = ImageVolume(vol.voxels * 3.0 + 11.0, vol.spacing)
    cfg = ExtractionConfig(use_wavelet=False, use_log=False, families=("glcm", "gldm"))
    a = FeatureExtractor(cfg).extract(vol, mask)
    b = FeatureExtractor(cfg).extract(scaled, mask)
    for k in a:
        np.testing.assert_allclose(a[k], b[k], rtol=1e-9, err_msg=k)
