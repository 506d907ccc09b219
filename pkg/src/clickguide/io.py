"""Raw ``.vol`` / ``.msk`` files with a JSON sidecar.

``name.vol`` holds little-endian float32 values in x-fastest order and
``name.vol.json`` holds ``{"dims", "spacing", "dtype"}`` plus optional
map-specific fields (``kind``, ``sigma``, ...). Masks use ``.msk`` and
``"dtype": "u8"``.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .volume import Mask, Volume

_DTYPES = {"f32": np.dtype("<f4"), "u8": np.dtype("u1")}


class FormatError(ValueError):
    """Malformed payload or sidecar."""


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def _write(path, array: np.ndarray, meta: dict, dtype: str) -> None:
    path = Path(path)
    payload = np.asarray(array).astype(_DTYPES[dtype]).ravel(order="F").tobytes()
    path.write_bytes(payload)
    sidecar_path(path).write_text(json.dumps(meta, indent=2) + "\n")


def read_sidecar(path) -> dict:
    side = sidecar_path(path)
    try:
        meta = json.loads(side.read_text())
    except FileNotFoundError:
        raise FormatError(f"missing sidecar {side}") from None
    except json.JSONDecodeError as exc:
        raise FormatError(f"corrupt sidecar {side}: {exc}") from None
    if not isinstance(meta, dict):
        raise FormatError(f"corrupt sidecar {side}: expected an object")
    for key in ("dims", "spacing", "dtype"):
        if key not in meta:
            raise FormatError(f"sidecar {side} lacks {key!r}")
    if meta["dtype"] not in _DTYPES:
        raise FormatError(f"unsupported dtype {meta['dtype']!r} in {side}")
    dims = meta["dims"]
    if (not isinstance(dims, list) or len(dims) != 3
            or not all(isinstance(d, int) and d > 0 for d in dims)):
        raise FormatError(f"bad dims {dims!r} in {side}")
    return meta


def _read(path, expected_dtype: str) -> tuple[np.ndarray, dict]:
    meta = read_sidecar(path)
    if meta["dtype"] != expected_dtype:
        raise FormatError(f"{path}: expected dtype {expected_dtype!r}, sidecar says {meta['dtype']!r}")
    dims = tuple(meta["dims"])
    dt = _DTYPES[expected_dtype]
    raw = Path(path).read_bytes()
    expected = int(np.prod(dims)) * dt.itemsize
    if len(raw) != expected:
        raise FormatError(f"{path}: payload has {len(raw)} bytes, dims {dims} need {expected}")
    flat = np.frombuffer(raw, dtype=dt)
    return flat.reshape(dims, order="F"), meta


def save_volume(volume: Volume, path) -> None:
    """Write ``volume`` (or a DistanceMap / GuidanceVolume) to ``path``."""
    _write(path, volume.data, volume.sidecar(), "f32")


def load_volume(path) -> Volume:
    """Read a ``.vol`` file, rebuilding a DistanceMap or GuidanceVolume if the sidecar says so."""
    data, meta = _read(path, "f32")
    if not np.isfinite(data).all():
        raise FormatError(f"{path}: payload contains non-finite values")
    kind = meta.get("kind")
    try:
        if kind is None:
            return Volume(data, tuple(meta["spacing"]))
        from .distance import DistanceKind, DistanceMap
        from .encoders import GuidanceKind, GuidanceVolume
        if kind in {k.value for k in DistanceKind}:
            return DistanceMap(data, tuple(meta["spacing"]), kind=DistanceKind(kind))
        if kind in {k.value for k in GuidanceKind}:
            sig = meta.get("per_click_sigmas")
            return GuidanceVolume(
                data, tuple(meta["spacing"]), kind=GuidanceKind(kind),
                sigma=meta.get("sigma"), theta_percent=meta.get("theta_percent", 0.0),
                per_click_sigmas=None if sig is None else tuple(sig),
                click_value=meta.get("click_value", 1.0),
            )
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    raise FormatError(f"{path}: unknown kind {kind!r}")


def save_mask(mask: Mask, path) -> None:
    _write(path, mask.data, mask.sidecar(), "u8")


def load_mask(path) -> Mask:
    data, meta = _read(path, "u8")
    try:
        return Mask(data, tuple(meta["spacing"]))
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
