"""Core grid types, synthetic phantoms and connected components.

Arrays are indexed ``data[x, y, z]`` with shape ``(nx, ny, nz)``. The
x-fastest linear order ``x + nx * (y + ny * z)`` is used on disk and for
every "smallest linear index" tie-break.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy import ndimage

Dims = tuple[int, int, int]
Spacing = tuple[float, float, float]

INTERIOR_INTENSITY = 0.8
BACKGROUND_INTENSITY = 0.2
NOISE_AMPLITUDE = 0.1
MIN_PHANTOM_DIMS = (8, 8, 8)


def _as_dims(dims: Iterable[int]) -> Dims:
    out = tuple(int(d) for d in dims)
    if len(out) != 3 or any(d <= 0 for d in out):
        raise ValueError(f"dims must be three positive integers, got {dims!r}")
    return out  # type: ignore[return-value]


def _as_spacing(spacing: Iterable[float]) -> Spacing:
    out = tuple(float(s) for s in spacing)
    if len(out) != 3 or not all(np.isfinite(s) and s > 0 for s in out):
        raise ValueError(f"spacing must be three positive finite floats, got {spacing!r}")
    return out  # type: ignore[return-value]


def linear_index(pos: Sequence[int], dims: Sequence[int]) -> int:
    """x-fastest linear index of a voxel."""
    x, y, z = pos
    return int(x) + dims[0] * (int(y) + dims[1] * int(z))


def linear_indices(dims: Sequence[int]) -> np.ndarray:
    """Array of shape ``dims`` holding each voxel's x-fastest linear index."""
    n = int(np.prod(dims))
    return np.arange(n, dtype=np.int64).reshape(tuple(dims), order="F")


@dataclass(frozen=True, eq=False)
class Volume:
    """Scalar float32 grid with physical voxel spacing (mm)."""

    data: np.ndarray
    spacing: Spacing = (1.0, 1.0, 1.0)

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float32, copy=True)
        if data.ndim != 3 or min(data.shape) <= 0:
            raise ValueError(f"volume data must be a non-empty 3D array, got shape {data.shape}")
        if not np.isfinite(data).all():
            raise ValueError("volume contains non-finite values")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing", _as_spacing(self.spacing))

    @property
    def dims(self) -> Dims:
        return self.data.shape  # type: ignore[return-value]

    def sidecar(self) -> dict:
        return {"dims": list(self.dims), "spacing": list(self.spacing), "dtype": "f32"}


@dataclass(frozen=True, eq=False)
class Mask:
    """Binary uint8 grid (values exactly 0 or 1)."""

    data: np.ndarray
    spacing: Spacing = (1.0, 1.0, 1.0)

    def __post_init__(self):
        raw = np.asarray(self.data)
        if raw.dtype == bool:
            data = raw.astype(np.uint8)
        else:
            if not np.isin(raw, (0, 1)).all():
                raise ValueError("mask values must be exactly 0 or 1")
            data = np.array(raw, dtype=np.uint8, copy=True)
        if data.ndim != 3 or min(data.shape) <= 0:
            raise ValueError(f"mask data must be a non-empty 3D array, got shape {data.shape}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing", _as_spacing(self.spacing))

    @property
    def dims(self) -> Dims:
        return self.data.shape  # type: ignore[return-value]

    def to_bool(self) -> np.ndarray:
        return self.data.astype(bool)

    def count(self) -> int:
        return int(self.data.sum(dtype=np.int64))

    def equals(self, other: "Mask") -> bool:
        return self.dims == other.dims and bool(np.array_equal(self.data, other.data))

    @classmethod
    def empty(cls, dims: Sequence[int], spacing: Sequence[float] = (1.0, 1.0, 1.0)) -> "Mask":
        return cls(np.zeros(_as_dims(dims), dtype=np.uint8), tuple(spacing))

    def sidecar(self) -> dict:
        return {"dims": list(self.dims), "spacing": list(self.spacing), "dtype": "u8"}


class Polarity(str, enum.Enum):
    FOREGROUND = "fg"
    BACKGROUND = "bg"

    @classmethod
    def parse(cls, value: "str | Polarity") -> "Polarity":
        if isinstance(value, Polarity):
            return value
        aliases = {"fg": cls.FOREGROUND, "foreground": cls.FOREGROUND,
                   "bg": cls.BACKGROUND, "background": cls.BACKGROUND}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown polarity {value!r}") from None


@dataclass(frozen=True)
class Click:
    pos: tuple[int, int, int]
    polarity: Polarity = Polarity.FOREGROUND

    def __post_init__(self):
        pos = tuple(int(p) for p in self.pos)
        if len(pos) != 3:
            raise ValueError(f"click position must have 3 coordinates, got {self.pos!r}")
        object.__setattr__(self, "pos", pos)
        object.__setattr__(self, "polarity", Polarity.parse(self.polarity))

    def in_bounds(self, dims: Sequence[int]) -> bool:
        return all(0 <= p < d for p, d in zip(self.pos, dims))

    def to_json(self) -> dict:
        return {"pos": list(self.pos), "polarity": self.polarity.value}

    @classmethod
    def from_json(cls, obj: dict) -> "Click":
        return cls(tuple(obj["pos"]), Polarity.parse(obj.get("polarity", "fg")))


@dataclass(frozen=True)
class ClickSet:
    """Ordered clicks; position ``i`` is the i-th interaction.

    A voxel may be clicked at most once, which also rules out a foreground and
    a background click on the same voxel.
    """

    clicks: tuple[Click, ...] = ()

    def __post_init__(self):
        clicks = tuple(self.clicks)
        seen = set()
        for c in clicks:
            if not isinstance(c, Click):
                raise TypeError(f"expected Click, got {type(c).__name__}")
            if c.pos in seen:
                raise ValueError(f"duplicate click at {c.pos}")
            seen.add(c.pos)
        object.__setattr__(self, "clicks", clicks)

    def __len__(self) -> int:
        return len(self.clicks)

    def __iter__(self) -> Iterator[Click]:
        return iter(self.clicks)

    def __getitem__(self, i):
        return self.clicks[i]

    def add(self, click: Click) -> "ClickSet":
        return ClickSet(self.clicks + (click,))

    def of(self, polarity: "Polarity | str") -> "ClickSet":
        polarity = Polarity.parse(polarity)
        return ClickSet(tuple(c for c in self.clicks if c.polarity is polarity))

    def positions(self) -> np.ndarray:
        if not self.clicks:
            return np.zeros((0, 3), dtype=np.int64)
        return np.array([c.pos for c in self.clicks], dtype=np.int64)

    def check_bounds(self, dims: Sequence[int]) -> None:
        for c in self.clicks:
            if not c.in_bounds(dims):
                raise ValueError(f"click {c.pos} outside volume of dims {tuple(dims)}")

    def to_json(self) -> list[dict]:
        return [c.to_json() for c in self.clicks]

    @classmethod
    def from_json(cls, items: Iterable[dict]) -> "ClickSet":
        return cls(tuple(Click.from_json(o) for o in items))


# --- phantoms -------------------------------------------------------------


class PhantomKind(str, enum.Enum):
    SPHERE = "sphere"
    TWO_BLOBS = "two-blobs"
    NOISY_SPHERE = "noisy-sphere"


def ball_mask(dims: Sequence[int], center: Sequence[float], radius: float) -> np.ndarray:
    """Boolean ball ``||v - center||_2 <= radius`` in voxel units."""
    x, y, z = np.ogrid[: dims[0], : dims[1], : dims[2]]
    r2 = (x - center[0]) ** 2 + (y - center[1]) ** 2 + (z - center[2]) ** 2
    return r2 <= radius * radius


def make_phantom(
    kind: "PhantomKind | str",
    dims: Sequence[int],
    spacing: Sequence[float] = (1.0, 1.0, 1.0),
    rng_seed: int = 0,
    radius: float | None = None,
    center: Sequence[float] | None = None,
) -> tuple[Volume, Mask]:
    """Synthetic intensity volume in [0, 1] and its exact ground-truth mask.

    Objects have intensity 0.8 on a 0.2 background. ``NoisySphere`` adds
    uniform noise in [-0.1, 0.1] drawn from ``rng_seed``. Sphere radius
    defaults to ``round(5/16 * min(dims))`` and the centre to ``dims // 2``.
    """
    kind = PhantomKind(kind)
    dims = _as_dims(dims)
    if any(d < m for d, m in zip(dims, MIN_PHANTOM_DIMS)):
        raise ValueError(f"phantom dims must be at least {MIN_PHANTOM_DIMS}, got {dims}")
    spacing = _as_spacing(spacing)

    if kind is PhantomKind.TWO_BLOBS:
        r = radius if radius is not None else max(1, min(dims) // 5)
        cy, cz = dims[1] // 2, dims[2] // 2
        gt = ball_mask(dims, (dims[0] // 4, cy, cz), r) | ball_mask(dims, (3 * dims[0] // 4, cy, cz), r)
        if len(connected_components(Mask(gt), 26)) != 2:
            raise ValueError(f"blob radius {r} too large for dims {dims}")
    else:
        r = radius if radius is not None else round(min(dims) * 5 / 16)
        c = tuple(center) if center is not None else tuple(d // 2 for d in dims)
        gt = ball_mask(dims, c, r)

    img = np.where(gt, INTERIOR_INTENSITY, BACKGROUND_INTENSITY)
    if kind is PhantomKind.NOISY_SPHERE:
        rng = np.random.default_rng(rng_seed)
        img = img + rng.uniform(-NOISE_AMPLITUDE, NOISE_AMPLITUDE, size=dims)
    img = np.clip(img, 0.0, 1.0)
    return Volume(img, spacing), Mask(gt, spacing)


def phantom_batch(kind, n: int, dims: Sequence[int], rng_seed: int = 0,
                  spacing: Sequence[float] = (1.0, 1.0, 1.0)) -> list[tuple[Volume, Mask]]:
    """``n`` phantoms with seeded sphere centres/radii (two-blobs stay canonical)."""
    kind = PhantomKind(kind)
    dims = _as_dims(dims)
    rng = np.random.default_rng(rng_seed)
    out = []
    m = min(dims)
    for i in range(n):
        if kind is PhantomKind.TWO_BLOBS:
            out.append(make_phantom(kind, dims, spacing, rng_seed + i))
            continue
        r = int(rng.integers(round(0.22 * m), round(0.32 * m) + 1))
        jitter = max(1, m // 10)
        c = tuple(int(d // 2 + rng.integers(-jitter, jitter + 1)) for d in dims)
        out.append(make_phantom(kind, dims, spacing, rng_seed + i, radius=r, center=c))
    return out


# --- connected components -------------------------------------------------


@dataclass(frozen=True, eq=False)
class Component:
    id: int
    voxels: np.ndarray = field(repr=False)  # (k, 3), sorted by linear index
    size: int


def connected_components(mask: Mask, connectivity: int = 26) -> list[Component]:
    """Components of the 1-voxels, largest first; ties by smallest linear index."""
    if connectivity not in (6, 26):
        raise ValueError(f"connectivity must be 6 or 26, got {connectivity}")
    structure = ndimage.generate_binary_structure(3, 1 if connectivity == 6 else 3)
    labels, n = ndimage.label(mask.data, structure=structure)
    if n == 0:
        return []
    lin = linear_indices(mask.dims)
    where = np.flatnonzero(labels)
    labs = labels.ravel()[where]
    keys = lin.ravel()[where]
    order = np.lexsort((keys, labs))
    labs, keys, where = labs[order], keys[order], where[order]
    starts = np.searchsorted(labs, np.arange(1, n + 1))
    sizes = np.diff(np.append(starts, labs.size))
    first = keys[starts]
    rank = np.lexsort((first, -sizes))

    comps = []
    for new_id, l in enumerate(rank, start=1):
        flat = where[starts[l]: starts[l] + sizes[l]]
        vox = np.stack(np.unravel_index(flat, mask.dims), axis=1).astype(np.int64)
        comps.append(Component(new_id, vox, int(sizes[l])))
    return comps
