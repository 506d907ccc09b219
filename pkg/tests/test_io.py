import json

import numpy as np
import pytest

from clickguide import (GuidanceConfig, encode, load_mask, load_volume, make_phantom, save_mask,
                        save_volume)
from clickguide.distance import SeedSet, edt
from clickguide.io import FormatError, sidecar_path

from conftest import clicks_at


def test_volume_round_trip_is_bit_exact(tmp_path):
    img, gt = make_phantom("noisy-sphere", (9, 10, 11), spacing=(0.5, 1.0, 2.0), rng_seed=2)
    save_volume(img, tmp_path / "a.vol")
    save_mask(gt, tmp_path / "a.msk")
    img2, gt2 = load_volume(tmp_path / "a.vol"), load_mask(tmp_path / "a.msk")
    assert img2.data.tobytes() == img.data.tobytes()
    assert img2.spacing == img.spacing and img2.dims == img.dims
    assert gt2.equals(gt)
    save_volume(img2, tmp_path / "b.vol")
    assert (tmp_path / "a.vol").read_bytes() == (tmp_path / "b.vol").read_bytes()


def test_payload_is_little_endian_x_fastest(tmp_path):
    data = np.arange(24, dtype=np.float32).reshape((2, 3, 4))
    from clickguide import Volume
    save_volume(Volume(data), tmp_path / "v.vol")
    raw = np.frombuffer((tmp_path / "v.vol").read_bytes(), "<f4")
    assert raw[1] == data[1, 0, 0] and raw[2] == data[0, 1, 0] and raw[6] == data[0, 0, 1]
    meta = json.loads(sidecar_path(tmp_path / "v.vol").read_text())
    assert meta == {"dims": [2, 3, 4], "spacing": [1.0, 1.0, 1.0], "dtype": "f32"}


def test_short_payload_and_nan_are_rejected(tmp_path):
    img, _ = make_phantom("sphere", (8, 8, 8))
    p = tmp_path / "a.vol"
    save_volume(img, p)
    p.write_bytes(p.read_bytes()[:-4])
    with pytest.raises(FormatError, match="bytes"):
        load_volume(p)
    bad = np.zeros(512, "<f4")
    bad[7] = np.nan
    p.write_bytes(bad.tobytes())
    with pytest.raises(FormatError, match="non-finite"):
        load_volume(p)


def test_missing_or_corrupt_sidecar(tmp_path):
    p = tmp_path / "x.vol"
    p.write_bytes(b"\0" * 4)
    with pytest.raises(FormatError, match="missing"):
        load_volume(p)
    sidecar_path(p).write_text("{not json")
    with pytest.raises(FormatError, match="corrupt"):
        load_volume(p)
    sidecar_path(p).write_text(json.dumps({"dims": [1, 1, 1], "spacing": [1, 1, 1], "dtype": "u8"}))
    with pytest.raises(FormatError, match="dtype"):
        load_volume(p)


def test_mask_payload_must_be_binary(tmp_path):
    p = tmp_path / "m.msk"
    p.write_bytes(bytes([0, 1, 2, 0, 0, 0, 0, 0]))
    sidecar_path(p).write_text(json.dumps({"dims": [2, 2, 2], "spacing": [1, 1, 1], "dtype": "u8"}))
    with pytest.raises(FormatError):
        load_mask(p)


def test_distance_and_guidance_sidecars_round_trip(tmp_path):
    d = edt(SeedSet.from_voxels([(1, 1, 1)], (4, 4, 4)))
    save_volume(d, tmp_path / "d.vol")
    d2 = load_volume(tmp_path / "d.vol")
    assert d2.kind == d.kind and np.array_equal(d2.data, d.data)

    img, _ = make_phantom("sphere", (16, 16, 16))
    g = encode(clicks_at((8, 8, 8), (4, 8, 8)), GuidanceConfig(kind="adaptive"), img)
    save_volume(g, tmp_path / "g.vol")
    g2 = load_volume(tmp_path / "g.vol")
    assert g2.kind == g.kind and g2.per_click_sigmas == g.per_click_sigmas
    meta = json.loads(sidecar_path(tmp_path / "g.vol").read_text())
    assert {"kind", "sigma", "theta_percent", "per_click_sigmas"} <= set(meta)
