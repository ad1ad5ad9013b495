import numpy as np
import pytest

from radstab import BinaryMask, DataError, ImageVolume, discretize


def volume_of(values):
    arr = np.asarray(values, dtype=float).reshape(1, 1, -1)
    return ImageVolume(arr), BinaryMask(np.ones_like(arr, dtype=bool))


def test_two_values_two_bins():
    vol, mask = volume_of([0.0, 1.0])
    roi = discretize(vol, mask, bins=2)
    assert roi.labels.tolist() == [1, 2]


def test_constant_roi_degenerate():
    vol, mask = volume_of([4.0, 4.0, 4.0])
    with pytest.warns(UserWarning, match="degenerate"):
        roi = discretize(vol, mask, bins=50)
    assert roi.degenerate
    assert roi.labels.tolist() == [1, 1, 1]


def test_edge_value_convention():
    # left-closed bins, last bin right-closed: edges [0, 0.5, 1.0] put 0.5
    # into bin 2 and the maximum into the top bin
    vol, mask = volume_of([0.0, 0.5, 1.0])
    roi = discretize(vol, mask, bins=2)
    assert roi.labels.tolist() == [1, 2, 2]
    np.testing.assert_allclose(roi.bin_edges, [0.0, 0.5, 1.0])


def test_min_maps_to_1_max_maps_to_B(rng):
    vals = rng.normal(0, 10, 100)
    vol, mask = volume_of(vals)
    roi = discretize(vol, mask, bins=16)
    labels = roi.labels
    assert labels.min() >= 1 and labels.max() <= 16
    assert labels[np.argmin(vals)] == 1
    assert labels[np.argmax(vals)] == 16


def test_edges_strictly_increasing(rng):
    vol, mask = volume_of(rng.normal(0, 1, 64))
    roi = discretize(vol, mask, bins=50)
    assert (np.diff(roi.bin_edges) > 0).all()


def test_empty_mask_error():
    vol = ImageVolume(np.zeros((2, 2, 2)))
    with pytest.raises(DataError, match="empty"):
        discretize(vol, BinaryMask(np.zeros((2, 2, 2), dtype=bool)))


def test_crop_to_bounding_box():
    arr = np.zeros((6, 7, 8))
    arr[2:4, 3:5, 1:6] = np.arange(20).reshape(2, 2, 5)
    mask = np.zeros((6, 7, 8), dtype=bool)
    mask[2:4, 3:5, 1:6] = True
    roi = discretize(ImageVolume(arr), BinaryMask(mask), bins=4)
    assert roi.label_volume.shape == (2, 2, 5)
    assert roi.n_voxels == 20
    assert (roi.label_volume > 0).all()


def test_shift_invariance_of_labels(rng):
    vals = rng.normal(0, 3, 200)
    vol, mask = volume_of(vals)
    shifted, _ = volume_of(vals + 17.25)
    a = discretize(vol, mask, bins=32).labels
    b = discretize(shifted, mask, bins=32).labels
    np.testing.assert_array_equal(a, b)
