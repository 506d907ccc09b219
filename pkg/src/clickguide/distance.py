"""Euclidean and geodesic distance transforms from voxel seed sets.

Geodesic edge cost between lattice neighbours ``u, w``::

    sqrt(spatial_weight**2 * |(u - w) * spacing|**2 + gamma**2 * (I(u) - I(w))**2)

``gdt`` relaxes that graph with alternating forward/backward raster sweeps;
``dijkstra_oracle`` solves it exactly with a priority queue and exists to
check ``gdt``.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .volume import ClickSet, Polarity, Volume, _as_dims

FIXPOINT = "fixpoint"
MAX_FIXPOINT_SWEEPS = 100_000
ORACLE_MAX_VOXELS = 64 ** 3
# intensities may carry float32 rounding just outside [0, 1]
_RANGE_TOL = 1e-6


class DistanceKind(str, enum.Enum):
    EUCLIDEAN = "euclidean"
    GEODESIC = "geodesic"


@dataclass(frozen=True, eq=False)
class SeedSet:
    """Seed voxels as a boolean grid."""

    mask: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool, copy=True)
        if m.ndim != 3:
            raise ValueError("seed mask must be 3D")
        m.setflags(write=False)
        object.__setattr__(self, "mask", m)

    @classmethod
    def from_voxels(cls, voxels, dims: Sequence[int]) -> "SeedSet":
        dims = _as_dims(dims)
        m = np.zeros(dims, dtype=bool)
        vox = np.asarray(voxels, dtype=np.int64).reshape(-1, 3)
        if vox.size and ((vox < 0).any() or (vox >= np.array(dims)).any()):
            raise ValueError(f"seed voxel outside volume of dims {dims}")
        m[tuple(vox.T)] = True
        return cls(m)

    @property
    def dims(self):
        return self.mask.shape

    @property
    def voxels(self) -> np.ndarray:
        return np.argwhere(self.mask)

    def __len__(self) -> int:
        return int(self.mask.sum())


class DistanceMap(Volume):
    """Non-negative distance volume, zero on its seeds."""

    def __init__(self, data, spacing=(1.0, 1.0, 1.0), kind: DistanceKind = DistanceKind.EUCLIDEAN):
        super().__init__(data, spacing)
        if (self.data < 0).any():
            raise ValueError("distance map has negative values")
        object.__setattr__(self, "kind", DistanceKind(kind))

    def sidecar(self) -> dict:
        return {**super().sidecar(), "kind": self.kind.value}


@dataclass(frozen=True)
class GeodesicParams:
    gamma: float = 1.0
    passes: int | str = 4
    neighborhood: int = 26
    spatial_weight: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.gamma) and self.gamma >= 0):
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if not (np.isfinite(self.spatial_weight) and self.spatial_weight >= 0):
            raise ValueError(f"spatial_weight must be >= 0, got {self.spatial_weight}")
        if self.passes != FIXPOINT and (not isinstance(self.passes, (int, np.integer))
                                        or isinstance(self.passes, bool) or self.passes < 1):
            raise ValueError(f"passes must be a positive integer or {FIXPOINT!r}, got {self.passes!r}")
        if self.neighborhood not in (6, 26):
            raise ValueError(f"neighborhood must be 6 or 26, got {self.neighborhood}")

    @property
    def fixpoint(self) -> bool:
        return self.passes == FIXPOINT

    def to_json(self) -> dict:
        return {"gamma": self.gamma, "passes": self.passes,
                "neighborhood": self.neighborhood, "spatial_weight": self.spatial_weight}

    @classmethod
    def from_json(cls, obj: dict) -> "GeodesicParams":
        return cls(**obj)


def neighbour_offsets(neighborhood: int) -> np.ndarray:
    """All lattice offsets of the 6- or 26-neighbourhood, in lexicographic order."""
    offs = [o for o in itertools.product((-1, 0, 1), repeat=3) if o != (0, 0, 0)]
    if neighborhood == 6:
        offs = [o for o in offs if sum(map(abs, o)) == 1]
    return np.array(offs, dtype=np.int64)


def dilate_seeds(clicks: ClickSet, polarity, sigma: float, dims: Sequence[int]) -> SeedSet:
    """All voxels within ``sigma`` (voxel units, inclusive) of a click of ``polarity``."""
    dims = _as_dims(dims)
    if sigma < 0 or not np.isfinite(sigma):
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    sel = clicks.of(polarity)
    if not len(sel):
        raise ValueError(f"no {Polarity.parse(polarity).value} clicks to seed from")
    sel.check_bounds(dims)
    m = np.zeros(dims, dtype=bool)
    r = int(np.floor(sigma))
    ax = np.arange(-r, r + 1)
    ball = (ax[:, None, None] ** 2 + ax[None, :, None] ** 2 + ax[None, None, :] ** 2) <= sigma * sigma
    for c in sel:
        lo = [max(0, p - r) for p in c.pos]
        hi = [min(d, p + r + 1) for p, d in zip(c.pos, dims)]
        sub = tuple(slice(l - p + r, h - p + r) for l, h, p in zip(lo, hi, c.pos))
        m[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] |= ball[sub]
    return SeedSet(m)


def _check_seeds(seeds: SeedSet, dims=None) -> None:
    if not seeds.mask.any():
        raise ValueError("empty seed set")
    if dims is not None and tuple(seeds.dims) != tuple(dims):
        raise ValueError(f"seed dims {seeds.dims} do not match image dims {tuple(dims)}")


def _check_image(image: Volume) -> None:
    lo, hi = float(image.data.min()), float(image.data.max())
    if lo < -_RANGE_TOL or hi > 1 + _RANGE_TOL:
        raise ValueError(f"image intensities must be normalised to [0, 1], got [{lo}, {hi}]")


def edt(seeds: SeedSet, spacing: Sequence[float] = (1.0, 1.0, 1.0)) -> DistanceMap:
    """Exact multi-source Euclidean distance in physical units."""
    _check_seeds(seeds)
    sp = np.asarray(spacing, dtype=np.float64)
    d2 = _kernels.squared_edt(np.ascontiguousarray(seeds.mask), sp)
    return DistanceMap(np.sqrt(d2), tuple(spacing), DistanceKind.EUCLIDEAN)


def edge_cost(offset, spacing, gamma: float, spatial_weight: float, i_u: float, i_w: float) -> float:
    """Cost of one lattice edge; the scalar reference for both geodesic solvers."""
    spatial2 = sum((o * s) ** 2 for o, s in zip(offset, spacing))
    diff = float(i_u) - float(i_w)
    return float(np.sqrt(spatial_weight ** 2 * spatial2 + gamma ** 2 * diff * diff))


def _sweep_tables(neighborhood: int, spacing, spatial_weight: float, padded_shape):
    offs = neighbour_offsets(neighborhood)
    # offsets visited before a voxel in a forward C-order scan
    back = offs[[tuple(o) < (0, 0, 0) for o in offs]]
    strides = np.array([padded_shape[1] * padded_shape[2], padded_shape[2], 1], dtype=np.int64)
    flat = back @ strides
    cost2 = (spatial_weight ** 2) * ((back * np.asarray(spacing)) ** 2).sum(axis=1)
    inrow = int(np.flatnonzero(flat == -1)[0])
    return flat, cost2.astype(np.float32), inrow


def gdt(seeds: SeedSet, image: Volume, params: GeodesicParams = GeodesicParams()) -> DistanceMap:
    """Geodesic distance by raster scanning (exact shortest paths in fixpoint mode).

    Distances accumulate in float32, the storage type of every volume.
    """
    _check_seeds(seeds, image.dims)
    _check_image(image)
    shape = tuple(n + 2 for n in image.dims)
    d = np.full(shape, np.inf, dtype=np.float32)
    d[1:-1, 1:-1, 1:-1][seeds.mask] = 0.0
    img = np.zeros(shape, dtype=np.float32)
    img[1:-1, 1:-1, 1:-1] = image.data
    d = d.ravel()
    img = img.ravel()
    flat, cost2, inrow = _sweep_tables(params.neighborhood, image.spacing, params.spatial_weight, shape)
    g2 = np.float32(float(params.gamma) ** 2)

    def sweep(n):
        forward = n % 2 == 0
        return _kernels.raster_sweep(d, img, shape, flat if forward else -flat, cost2, g2, forward, inrow)

    if params.fixpoint:
        for n in range(MAX_FIXPOINT_SWEEPS):
            if not sweep(n) and n > 0:
                break
        else:
            raise RuntimeError("geodesic raster scan did not converge")
    else:
        for n in range(params.passes):
            sweep(n)

    out = d.reshape(shape)[1:-1, 1:-1, 1:-1]
    return DistanceMap(out, image.spacing, DistanceKind.GEODESIC)


def dijkstra_oracle(seeds: SeedSet, image: Volume, params: GeodesicParams = GeodesicParams()) -> DistanceMap:
    """Exact shortest paths on the same graph as :func:`gdt` (small volumes only)."""
    _check_seeds(seeds, image.dims)
    _check_image(image)
    dims = image.dims
    if np.prod(dims) > ORACLE_MAX_VOXELS:
        raise ValueError(f"volume {dims} exceeds the Dijkstra oracle cap of {ORACLE_MAX_VOXELS} voxels")
    img = image.data.astype(np.float64)
    offs = [tuple(int(v) for v in o) for o in neighbour_offsets(params.neighborhood)]
    dist = np.full(dims, np.inf)
    heap = []
    for v in map(tuple, seeds.voxels):
        dist[v] = 0.0
        heap.append((0.0, v))
    heapq.heapify(heap)
    done = np.zeros(dims, dtype=bool)
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for o in offs:
            w = (u[0] + o[0], u[1] + o[1], u[2] + o[2])
            if not (0 <= w[0] < dims[0] and 0 <= w[1] < dims[1] and 0 <= w[2] < dims[2]):
                continue
            if done[w]:
                continue
            nd = du + edge_cost(o, image.spacing, params.gamma, params.spatial_weight, img[u], img[w])
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return DistanceMap(dist, image.spacing, DistanceKind.GEODESIC)
