import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import ndimage

from clickguide import GeodesicParams, SeedSet, Volume, dijkstra_oracle, dilate_seeds, edt, gdt
from clickguide.distance import edge_cost, neighbour_offsets

from conftest import clicks_at


def test_dilate_seed_sizes():
    assert len(dilate_seeds(clicks_at((5, 5, 5)), "fg", 0, (11, 11, 11))) == 1
    assert len(dilate_seeds(clicks_at((5, 5, 5)), "fg", 1, (11, 11, 11))) == 7
    full = len(dilate_seeds(clicks_at((10, 10, 10)), "fg", 5, (21, 21, 21)))
    corner = len(dilate_seeds(clicks_at((0, 0, 0)), "fg", 5, (21, 21, 21)))
    assert corner < full
    # brute-force count of lattice points with |d| <= 5
    assert full == sum(1 for d in itertools.product(range(-5, 6), repeat=3) if sum(v * v for v in d) <= 25)


def test_dilate_needs_clicks_of_polarity():
    with pytest.raises(ValueError):
        dilate_seeds(clicks_at((1, 1, 1)), "bg", 1, (4, 4, 4))


def test_edt_examples():
    d = edt(SeedSet.from_voxels([(0, 0, 0)], (8, 8, 8)))
    assert d.data[3, 4, 0] == pytest.approx(5.0, abs=1e-6)
    d = edt(SeedSet.from_voxels([(0, 0, 0)], (4, 4, 4)), spacing=(2, 1, 1))
    assert d.data[1, 0, 0] == pytest.approx(2.0, abs=1e-6)


def test_edt_single_seed_matches_closed_form_anisotropic():
    dims, c, sp = (13, 9, 7), (4, 2, 5), (0.7, 1.3, 2.1)
    d = edt(SeedSet.from_voxels([c], dims), sp).data
    g = np.indices(dims).astype(np.float64)
    ref = np.sqrt(sum(((g[i] - c[i]) * sp[i]) ** 2 for i in range(3)))
    assert np.max(np.abs(d - ref)) <= 1e-5


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_edt_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    dims = tuple(int(v) for v in rng.integers(1, 12, 3))
    seeds = rng.random(dims) < 0.05
    seeds.flat[rng.integers(seeds.size)] = True
    sp = tuple(float(v) for v in rng.uniform(0.5, 2.0, 3))
    ref = ndimage.distance_transform_edt(~seeds, sampling=sp)
    assert np.max(np.abs(edt(SeedSet(seeds), sp).data - ref)) <= 1e-4


def test_empty_seeds_rejected():
    with pytest.raises(ValueError):
        edt(SeedSet(np.zeros((3, 3, 3), bool)))
    with pytest.raises(ValueError):
        gdt(SeedSet(np.zeros((3, 3, 3), bool)), Volume(np.zeros((3, 3, 3))))


def test_gdt_checks_dims_and_range():
    s = SeedSet.from_voxels([(0, 0, 0)], (3, 3, 3))
    with pytest.raises(ValueError):
        gdt(s, Volume(np.zeros((4, 3, 3))))
    with pytest.raises(ValueError):
        gdt(s, Volume(np.full((3, 3, 3), 2.0)))


def test_edge_cost_example():
    assert edge_cost((1, 0, 0), (1, 1, 1), 1.0, 1.0, 0.2, 0.8) == pytest.approx(math.sqrt(1.36))


def test_dijkstra_two_voxels():
    img = Volume(np.array([0.2, 0.8]).reshape(2, 1, 1))
    d = dijkstra_oracle(SeedSet.from_voxels([(0, 0, 0)], img.dims), img)
    assert d.data[0, 0, 0] == 0
    assert d.data[1, 0, 0] == pytest.approx(math.sqrt(1.36), rel=1e-6)


def test_dijkstra_size_cap():
    img = Volume(np.zeros((65, 64, 64), np.float32))
    with pytest.raises(ValueError, match="cap"):
        dijkstra_oracle(SeedSet.from_voxels([(0, 0, 0)], img.dims), img)


@pytest.mark.parametrize("nb", [6, 26])
def test_constant_image_gives_chamfer_distance(nb):
    img = Volume(np.full((9, 8, 7), 0.4))
    s = SeedSet.from_voxels([(1, 2, 3), (7, 7, 0)], img.dims)
    p = GeodesicParams(gamma=5.0, passes="fixpoint", neighborhood=nb)
    assert np.max(np.abs(gdt(s, img, p).data - dijkstra_oracle(s, img, p).data)) <= 1e-5


def test_gamma_zero_ignores_image(rng):
    a = Volume(rng.random((8, 8, 8)))
    b = Volume(rng.random((8, 8, 8)))
    s = SeedSet.from_voxels([(4, 4, 4)], a.dims)
    p = GeodesicParams(gamma=0.0, passes="fixpoint")
    assert np.array_equal(gdt(s, a, p).data, gdt(s, b, p).data)


@pytest.mark.parametrize("gamma", [0.0, 0.5, 1.0, 4.0])
def test_fixpoint_matches_dijkstra_on_8cube(rng, gamma):
    img = Volume(rng.random((8, 8, 8)))
    s = SeedSet.from_voxels(rng.integers(0, 8, (3, 3)), img.dims)
    p = GeodesicParams(gamma=gamma, passes="fixpoint")
    assert np.max(np.abs(gdt(s, img, p).data - dijkstra_oracle(s, img, p).data)) <= 1e-5


def test_fixpoint_with_anisotropic_spacing(rng):
    img = Volume(rng.random((7, 8, 9)), spacing=(0.5, 1.0, 3.0))
    s = SeedSet.from_voxels([(3, 4, 4)], img.dims)
    p = GeodesicParams(gamma=1.0, passes="fixpoint", neighborhood=6)
    assert np.max(np.abs(gdt(s, img, p).data - dijkstra_oracle(s, img, p).data)) <= 1e-5


def test_more_sweeps_never_increase(rng):
    img = Volume(rng.random((10, 10, 10)))
    s = SeedSet.from_voxels([(0, 0, 0), (9, 5, 2)], img.dims)
    prev = None
    for passes in (1, 2, 4, 6, "fixpoint"):
        d = gdt(s, img, GeodesicParams(gamma=2.0, passes=passes)).data
        if prev is not None:
            assert (d <= prev + 1e-6).all()
        prev = d


def test_gdt_dominates_chamfer_and_zero_on_seeds(rng):
    img = Volume(rng.random((9, 9, 9)))
    s = SeedSet.from_voxels([(2, 2, 2), (6, 6, 6)], img.dims)
    geo = gdt(s, img, GeodesicParams(gamma=1.0, passes="fixpoint")).data
    flat = gdt(s, img, GeodesicParams(gamma=0.0, passes="fixpoint")).data
    assert (geo >= flat - 1e-6).all()
    assert (geo[s.mask] == 0).all()


def test_adding_seed_never_increases(rng):
    img = Volume(rng.random((9, 9, 9)))
    p = GeodesicParams(gamma=1.0, passes="fixpoint")
    a = gdt(SeedSet.from_voxels([(1, 1, 1)], img.dims), img, p).data
    b = gdt(SeedSet.from_voxels([(1, 1, 1), (7, 2, 5)], img.dims), img, p).data
    assert (b <= a + 1e-7).all()


def test_gdt_is_bit_stable(rng):
    img = Volume(rng.random((12, 12, 12)))
    s = SeedSet.from_voxels([(3, 3, 3)], img.dims)
    assert np.array_equal(gdt(s, img).data, gdt(s, img).data)


def test_neighbour_offsets():
    assert len(neighbour_offsets(6)) == 6 and len(neighbour_offsets(26)) == 26


def test_params_validation():
    with pytest.raises(ValueError):
        GeodesicParams(passes=0)
    with pytest.raises(ValueError):
        GeodesicParams(neighborhood=18)
    with pytest.raises(ValueError):
        GeodesicParams(gamma=-1)
