import json

import numpy as np
import pytest

from clickguide import Mask, aggregate, consistent_improvement, dice, efficiency, encode_disk, gt_overlap
from clickguide.simulation import SessionTrace
from clickguide.volume import Click, ClickSet

from conftest import clicks_at


def trace(traj, n=10, timings=None, overlap=None):
    k = len(traj) - 1
    clicks = ClickSet(tuple(Click((i, 0, 0)) for i in range(k)))
    return SessionTrace(clicks, list(traj), list(timings if timings is not None else [0.0] * k), n,
                        gt_overlap=overlap)


def masks_with_overlap(n_a, n_b, n_ab, dims=(10, 10, 10)):
    a = np.zeros(np.prod(dims), bool)
    b = np.zeros(np.prod(dims), bool)
    a[:n_a] = True
    b[n_a - n_ab: n_a - n_ab + n_b] = True
    return Mask(a.reshape(dims)), Mask(b.reshape(dims))


def test_dice_examples():
    a, b = masks_with_overlap(100, 100, 50)
    assert dice(a, b) == 0.5
    assert dice(a, a) == 1.0
    c, d = masks_with_overlap(10, 10, 0)
    assert dice(c, d) == 0.0
    e = Mask.empty((3, 3, 3))
    assert dice(e, e) == 1.0


def test_dice_symmetric_and_dims_checked(rng):
    a = Mask(rng.random((5, 5, 5)) < 0.4)
    b = Mask(rng.random((5, 5, 5)) < 0.4)
    assert dice(a, b) == dice(b, a)
    with pytest.raises(ValueError):
        dice(a, Mask.empty((5, 5, 4)))


def test_consistent_improvement_examples():
    up = [i / 10 for i in range(11)]
    assert consistent_improvement([trace(up)]) == 1.0
    assert consistent_improvement([trace(up[::-1])]) == 0.0
    t1 = trace([0, .1, .2, .3, .4, .5, .6, .7, .7, .7, .7])          # 7 improving
    t2 = trace([0, .1, .2, .3, .4, .5, .6, .5, .4, .3, .2])          # 6 improving
    assert consistent_improvement([t1, t2]) == 13 / 20 == 0.65
    assert consistent_improvement([t2, t1]) == 0.65


def test_consistent_improvement_counts_full_n_for_short_traces():
    assert consistent_improvement([trace([0, .5, 1.0])]) == 2 / 10
    with pytest.raises(ValueError):
        consistent_improvement([])


def test_gt_overlap_examples():
    dims = (4, 4, 4)
    disk = encode_disk(clicks_at((1, 1, 1)), 1, dims)
    gt = np.zeros(dims, bool)
    gt[:2, :2, :] = True  # drops (2,1,1) and (1,2,1) from the 7-voxel disk
    gt_mask = Mask(gt)
    inside = int(np.count_nonzero((disk.data > 0) & gt))
    assert inside == 5
    assert gt_overlap(disk, gt_mask) == 5 / 7
    assert gt_overlap(disk, Mask(np.ones(dims, bool))) == 1.0
    assert gt_overlap(disk, Mask.empty(dims)) == 0.0


def test_gt_overlap_empty_guidance_raises():
    disk = encode_disk(clicks_at((1, 1, 1)), 0, (4, 4, 4))
    with pytest.raises(ValueError):
        gt_overlap(disk, Mask.empty((4, 4, 4)), binarize_eps=1.0)


def test_efficiency_examples():
    assert efficiency([0, 0]) == 1.0
    assert efficiency([0.25]) == 0.75
    assert efficiency([3.0, 3.0]) == 0.0
    with pytest.raises(ValueError):
        efficiency([])
    with pytest.raises(ValueError):
        efficiency([-1.0])


def test_aggregate_examples():
    r = aggregate([trace([0.2, 0.9])])
    assert (r.initial_dice, r.final_dice) == (0.2, 0.9)
    r = aggregate([trace([0, 1]), trace([0.5, 0.5])])
    assert (r.final_dice, r.initial_dice) == (0.75, 0.25)
    r = aggregate([trace([0.3], timings=[]), trace([0.6], timings=[])])
    assert r.final_dice == r.initial_dice and r.efficiency is None and r.gt_overlap is None
    with pytest.raises(ValueError):
        aggregate([])


def test_report_serialization():
    r = aggregate([trace([0, .5, 1.0], timings=[0.1, 0.3], overlap=0.8)],
                  label={"kind": "disk", "sigma": 1.0, "theta": None, "p": 100.0})
    doc = json.loads(r.dumps())
    assert doc["efficiency"] == pytest.approx(0.8) and doc["gt_overlap"] == 0.8
    lines = r.to_csv().splitlines()
    assert lines[0] == "kind,sigma,theta,p,M1,M2,M3,M4,M5"
    assert lines[1].startswith("disk,1.0,,100.0,1.0,0.0,")
    for v in (r.final_dice, r.initial_dice, r.efficiency, r.consistent_improvement, r.gt_overlap):
        assert 0 <= v <= 1
