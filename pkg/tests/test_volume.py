import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clickguide import Click, ClickSet, Mask, Volume, connected_components, make_phantom, phantom_batch
from clickguide.volume import ball_mask, linear_index, linear_indices


def test_volume_is_float32_and_read_only():
    v = Volume(np.zeros((2, 3, 4)))
    assert v.data.dtype == np.float32
    assert v.dims == (2, 3, 4)
    with pytest.raises(ValueError):
        v.data[0, 0, 0] = 1


def test_volume_rejects_non_finite_and_bad_spacing():
    with pytest.raises(ValueError):
        Volume(np.full((2, 2, 2), np.nan))
    with pytest.raises(ValueError):
        Volume(np.zeros((2, 2, 2)), (1.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        Volume(np.zeros((2, 2)))


def test_mask_accepts_bool_and_binary_only():
    assert Mask(np.ones((2, 2, 2), bool)).count() == 8
    assert Mask(np.zeros((2, 2, 2))).count() == 0
    with pytest.raises(ValueError):
        Mask(np.full((2, 2, 2), 2))


def test_linear_order_is_x_fastest():
    dims = (3, 4, 5)
    lin = linear_indices(dims)
    assert lin[1, 0, 0] == 1
    assert lin[0, 1, 0] == 3
    assert lin[0, 0, 1] == 12
    assert linear_index((2, 3, 4), dims) == lin[2, 3, 4] == 59


def test_click_set_rejects_duplicates_of_either_polarity():
    ClickSet((Click((1, 1, 1)), Click((1, 1, 2), "bg")))
    with pytest.raises(ValueError):
        ClickSet((Click((1, 1, 1)), Click((1, 1, 1))))
    with pytest.raises(ValueError):
        ClickSet((Click((1, 1, 1), "fg"), Click((1, 1, 1), "bg")))


def test_click_set_keeps_order_and_round_trips_json():
    cs = ClickSet((Click((3, 2, 1), "bg"), Click((0, 0, 0))))
    assert [c.pos for c in cs] == [(3, 2, 1), (0, 0, 0)]
    assert ClickSet.from_json(cs.to_json()) == cs
    assert len(cs.of("fg")) == 1


def test_sphere_phantom_matches_brute_force_count():
    img, gt = make_phantom("sphere", (16, 16, 16))
    r = round(16 * 5 / 16)
    count = sum(1 for x in range(16) for y in range(16) for z in range(16)
                if (x - 8) ** 2 + (y - 8) ** 2 + (z - 8) ** 2 <= r * r)
    assert gt.count() == count == 515
    assert set(np.unique(img.data)) == {np.float32(0.2), np.float32(0.8)}


def test_noisy_sphere_is_seeded_and_bounded():
    a, _ = make_phantom("noisy-sphere", (16, 16, 16), rng_seed=3)
    b, _ = make_phantom("noisy-sphere", (16, 16, 16), rng_seed=3)
    c, _ = make_phantom("noisy-sphere", (16, 16, 16), rng_seed=4)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)
    assert a.data.min() >= 0.1 - 1e-6 and a.data.max() <= 0.9 + 1e-6


def test_two_blobs_has_two_components():
    _, gt = make_phantom("two-blobs", (32, 16, 16))
    assert len(connected_components(gt)) == 2


def test_phantom_batch_dims_and_determinism():
    a = phantom_batch("sphere", 3, (16, 16, 16), rng_seed=5)
    b = phantom_batch("sphere", 3, (16, 16, 16), rng_seed=5)
    for (ia, ma), (ib, mb) in zip(a, b):
        assert ma.dims == ia.dims == (16, 16, 16)
        assert ma.equals(mb)


def test_connected_components_examples():
    m = np.zeros((4, 4, 4), bool)
    assert connected_components(Mask(m)) == []
    m[1, 1, 1] = True
    assert [c.size for c in connected_components(Mask(m))] == [1]
    m[2, 2, 2] = True
    assert len(connected_components(Mask(m), 26)) == 1
    assert len(connected_components(Mask(m), 6)) == 2


def test_component_tie_break_by_smallest_linear_index():
    m = np.zeros((6, 6, 6), bool)
    m[4, 0, 0] = True   # linear 4
    m[0, 1, 0] = True   # linear 6
    comps = connected_components(Mask(m), 6)
    assert tuple(comps[0].voxels[0]) == (4, 0, 0)
    assert [c.id for c in comps] == [1, 2]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([6, 26]))
def test_component_sizes_sum_to_mask_count(seed, conn):
    m = np.random.default_rng(seed).random((7, 6, 5)) < 0.3
    comps = connected_components(Mask(m), conn)
    assert sum(c.size for c in comps) == int(m.sum())
    sizes = [c.size for c in comps]
    assert sizes == sorted(sizes, reverse=True)


def test_ball_mask_radius_is_inclusive():
    assert ball_mask((5, 5, 5), (2, 2, 2), 1).sum() == 7
