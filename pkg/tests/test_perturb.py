import numpy as np
import pytest

from radstab import BinaryMask, DataError, ball, dice, dilate, erode, make_variants
from radstab.perturb import inscribed_ellipsoid


def single_voxel_mask(size=9):
    vox = np.zeros((size, size, size), dtype=bool)
    vox[size // 2, size // 2, size // 2] = True
    return BinaryMask(vox)


def test_ball_radius_1_has_7_offsets():
    # enumeration oracle: integer vectors with squared norm <= 1
    expected = {
        (dz, dy, dx)
        for dz in range(-1, 2)
        for dy in range(-1, 2)
        for dx in range(-1, 2)
        if dz * dz + dy * dy + dx * dx <= 1
    }
    se = ball(1)
    assert len(se.offsets) == 7
    assert {tuple(o) for o in se.offsets} == expected


def test_ball_radius_0_error():
    with pytest.raises(DataError):
        ball(0)


@pytest.mark.parametrize("radius", [1, 2, 3, 5])
def test_ball_negation_symmetric(radius):
    offsets = {tuple(o) for o in ball(radius).offsets}
    assert (0, 0, 0) in offsets
    assert offsets == {(-a, -b, -c) for a, b, c in offsets}


def test_single_voxel_dilation_is_cross():
    out = dilate(single_voxel_mask(), ball(1))
    assert out.n_foreground == 7
    center = np.array([4, 4, 4])
    got = {tuple(p - center) for p in np.argwhere(out.voxels)}
    assert got == {tuple(o) for o in ball(1).offsets}


def test_dilate_matches_generic_set_morphology(rng):
    # cross-check the EDT path against explicit offset union
    vox = rng.random((10, 11, 9)) < 0.1
    vox[5, 5, 5] = True
    mask = BinaryMask(vox)
    for radius in (1, 2, 3):
        got = dilate(mask, ball(radius))
        expected = np.zeros_like(vox)
        for dz, dy, dx in ball(radius).offsets:
            src = [slice(max(0, -d), min(n, n - d)) for d, n in zip((dz, dy, dx), vox.shape)]
            dst = [slice(max(0, d), min(n, n + d)) for d, n in zip((dz, dy, dx), vox.shape)]
            expected[tuple(dst)] |= vox[tuple(src)]
        np.testing.assert_array_equal(got.voxels, expected)


def test_erode_matches_generic_set_morphology(rng):
    vox = rng.random((10, 10, 10)) < 0.7
    vox[4:7, 4:7, 4:7] = True
    mask = BinaryMask(vox)
    for radius in (1, 2):
        got = erode(mask, ball(radius))
        expected = np.ones_like(vox)
        for dz, dy, dx in ball(radius).offsets:
            for (z, y, x) in np.argwhere(vox | ~vox):
                q = (z + dz, y + dy, x + dx)
                if all(0 <= c < n for c, n in zip(q, vox.shape)) and not vox[q]:
                    expected[z, y, x] = False
        expected &= vox
        np.testing.assert_array_equal(got.voxels, expected)


def test_closing_is_extensive(rng):
    for trial in range(5):
        vox = rng.random((14, 14, 14)) < 0.08
        vox[6:9, 6:9, 6:9] = True
        mask = BinaryMask(vox)
        for radius in (1, 2, 4):
            closed = erode(dilate(mask, ball(radius)), ball(radius))
            assert (closed.voxels | mask.voxels == closed.voxels).all()


def test_dilation_clamps_at_borders():
    vox = np.zeros((5, 5, 5), dtype=bool)
    vox[0, 0, 0] = True
    out = dilate(BinaryMask(vox), ball(2))
    assert out.voxels.shape == (5, 5, 5)
    assert out.voxels[0, 0, 0]


def test_dice_identity_and_disjoint():
    m = single_voxel_mask()
    assert dice(m, m) == 1.0
    other = np.zeros_like(m.voxels)
    other[0, 0, 0] = True
    assert dice(m, BinaryMask(other)) == 0.0


def test_dice_hand_count():
    a = np.zeros((4, 4, 4), dtype=bool)
    b = np.zeros((4, 4, 4), dtype=bool)
    a.ravel()[:4] = True
    b.ravel()[1:7] = True
    # |a| = 4, |b| = 6, |a & b| = 3 -> 2*3 / 10
    assert dice(BinaryMask(a), BinaryMask(b)) == pytest.approx(0.6)


def test_dice_symmetric(rng):
    for _ in range(10):
        a = BinaryMask(rng.random((6, 6, 6)) < 0.4)
        b = BinaryMask(rng.random((6, 6, 6)) < 0.4)
        if a.n_foreground + b.n_foreground == 0:
            continue
        assert dice(a, b) == dice(b, a)


def test_dice_both_empty_error():
    empty = BinaryMask(np.zeros((3, 3, 3), dtype=bool))
    with pytest.raises(DataError):
        dice(empty, empty)


def test_dice_dims_mismatch():
    with pytest.raises(DataError):
        dice(single_voxel_mask(9), single_voxel_mask(7))


def test_make_variants_extensive_and_deterministic(rng):
    vox = np.zeros((40, 40, 40), dtype=bool)
    zz, yy, xx = np.mgrid[0:40, 0:40, 0:40]
    vox |= (zz - 20) ** 2 + (yy - 20) ** 2 + (xx - 20) ** 2 <= 49
    vox |= (zz - 20) ** 2 + (yy - 28) ** 2 + (xx - 20) ** 2 <= 9
    mask = BinaryMask(vox)
    vs1 = make_variants(mask)
    vs2 = make_variants(mask)
    assert set(vs1.variants) == {"closing_08", "closing_07", "closing_06", "ellipsoid_04"}
    for name in ("closing_08", "closing_07", "closing_06"):
        v = vs1.variants[name]
        assert (v.voxels | mask.voxels == v.voxels).all(), name
        # extensivity pins the dice value to 2|ref| / (|ref| + |v|)
        expected = 2 * mask.n_foreground / (mask.n_foreground + v.n_foreground)
        assert vs1.dsc[name] == pytest.approx(expected)
        np.testing.assert_array_equal(v.voxels, vs2.variants[name].voxels)
    # closing_06 dilates more than it erodes, so it strictly grows
    assert vs1.variants["closing_06"].n_foreground > mask.n_foreground


def test_cube_inscribed_ellipsoid_dice():
    # Voxelized oracle for the continuum value 2*(pi/6) / (1 + pi/6) ~ 0.687:
    # the inscribed ellipsoid of a cube fills pi/6 of its volume.
    n = 40
    vox = np.zeros((n + 4, n + 4, n + 4), dtype=bool)
    vox[2:n + 2, 2:n + 2, 2:n + 2] = True
    cube = BinaryMask(vox)
    ell = inscribed_ellipsoid(cube)
    got = dice(ell, cube)
    continuum = 2 * (np.pi / 6) / (1 + np.pi / 6)
    assert abs(got - continuum) < 0.05


def test_variant_empty_dropped_with_warning():
    # degenerate 1-voxel reference: closing survives but stays tiny; a custom
    # recipe eroding more than it dilates produces an empty variant
    m = single_voxel_mask(13)
    with pytest.warns(UserWarning, match="dropped"):
        vs = make_variants(m, closing_recipes={"overkill": (1, 4)})
    assert "overkill" not in vs.variants
    assert any("overkill" in w for w in vs.warnings)
    assert "ellipsoid_04" in vs.variants
