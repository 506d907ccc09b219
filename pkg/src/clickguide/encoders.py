"""Click encodings: disks, Gaussian heatmaps, distance maps and adaptive heatmaps.

Every encoder takes clicks of a single polarity and returns a
:class:`GuidanceVolume` with values in [0, 1]. Foreground and background
guidance are always encoded separately (see :func:`encode_pair`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .distance import DistanceMap, GeodesicParams, SeedSet, dilate_seeds, edt, gdt
from .volume import Click, ClickSet, Polarity, Volume, _as_dims


class GuidanceKind(str, enum.Enum):
    DISK = "disk"
    HEATMAP = "heatmap"
    EDT = "edt"
    GDT = "gdt"
    EXP_GDT = "exp-gdt"
    ADAPTIVE = "adaptive-heatmap"

    @classmethod
    def parse(cls, value) -> "GuidanceKind":
        if isinstance(value, GuidanceKind):
            return value
        v = str(value).lower().replace("_", "-")
        aliases = {"adaptive": cls.ADAPTIVE, "expgdt": cls.EXP_GDT, "disks": cls.DISK,
                   "heatmaps": cls.HEATMAP, "gaussian": cls.HEATMAP}
        if v in aliases:
            return aliases[v]
        return cls(v)

    @property
    def uses_sigma(self) -> bool:
        return self is not GuidanceKind.ADAPTIVE

    @property
    def uses_theta(self) -> bool:
        return self in (GuidanceKind.EDT, GuidanceKind.GDT, GuidanceKind.EXP_GDT)

    @property
    def needs_image(self) -> bool:
        return self in (GuidanceKind.GDT, GuidanceKind.EXP_GDT, GuidanceKind.ADAPTIVE)


@dataclass(frozen=True)
class GuidanceConfig:
    """Encoder choice and all of its knobs.

    ``sigma`` is the disk/heatmap radius and the seed dilation radius for the
    distance kinds, in voxel units. ``geodesic`` drives the GDT and exp-GDT
    kinds; ``adaptive_geodesic`` drives the edge sensing of the adaptive
    heatmap and by default ignores spatial length so that a homogeneous
    neighbourhood has zero mean distance.
    """

    kind: GuidanceKind = GuidanceKind.DISK
    sigma: float = 0.0
    theta_percent: float = 0.0
    a: float = 13.0
    b: float = 0.15
    geodesic: GeodesicParams = GeodesicParams()
    adaptive_geodesic: GeodesicParams = GeodesicParams(spatial_weight=0.0)
    neighborhood_size: int = 27
    squared_exponent: bool = False
    invert_exp_gdt: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", GuidanceKind.parse(self.kind))
        if not (math.isfinite(self.sigma) and self.sigma >= 0):
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not 0 <= self.theta_percent < 100:
            raise ValueError(f"theta_percent must be in [0, 100), got {self.theta_percent}")
        if not (self.a > 0 and self.b > 0):
            raise ValueError(f"a and b must be positive, got a={self.a}, b={self.b}")
        if self.neighborhood_size not in (9, 27):
            raise ValueError(f"neighborhood_size must be 9 or 27, got {self.neighborhood_size}")

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value, "sigma": self.sigma, "theta_percent": self.theta_percent,
            "a": self.a, "b": self.b, "geodesic": self.geodesic.to_json(),
            "adaptive_geodesic": self.adaptive_geodesic.to_json(),
            "neighborhood_size": self.neighborhood_size,
            "squared_exponent": self.squared_exponent, "invert_exp_gdt": self.invert_exp_gdt,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GuidanceConfig":
        obj = dict(obj)
        for key in ("geodesic", "adaptive_geodesic"):
            if key in obj:
                obj[key] = GeodesicParams.from_json(obj[key])
        return cls(**obj)


# Default (sigma, theta) per kind for benchmarks.
TUNED_SETTINGS = {
    GuidanceKind.DISK: (1.0, 0.0),
    GuidanceKind.HEATMAP: (1.0, 0.0),
    GuidanceKind.EDT: (1.0, 10.0),
    GuidanceKind.GDT: (5.0, 10.0),
    GuidanceKind.EXP_GDT: (5.0, 10.0),
    GuidanceKind.ADAPTIVE: (0.0, 0.0),
}


def tuned_config(kind, **overrides) -> GuidanceConfig:
    kind = GuidanceKind.parse(kind)
    sigma, theta = TUNED_SETTINGS[kind]
    return replace(GuidanceConfig(kind=kind, sigma=sigma, theta_percent=theta), **overrides)


class GuidanceVolume(Volume):
    """Encoded guidance in [0, 1].

    ``click_value`` is the value the signal takes on its seeds: 1 for every
    kind except the uninverted exp-GDT, which is 0 at clicks.
    """

    def __init__(self, data, spacing=(1.0, 1.0, 1.0), kind: GuidanceKind = GuidanceKind.DISK,
                 sigma: float | None = None, theta_percent: float = 0.0,
                 per_click_sigmas: Sequence[int] | None = None, click_value: float = 1.0):
        super().__init__(data, spacing)
        if self.data.min() < 0 or self.data.max() > 1:
            raise ValueError("guidance values must lie in [0, 1]")
        object.__setattr__(self, "kind", GuidanceKind.parse(kind))
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "theta_percent", float(theta_percent))
        object.__setattr__(self, "per_click_sigmas",
                           None if per_click_sigmas is None else tuple(int(s) for s in per_click_sigmas))
        object.__setattr__(self, "click_value", float(click_value))

    def sidecar(self) -> dict:
        return {**super().sidecar(), "kind": self.kind.value, "sigma": self.sigma,
                "theta_percent": self.theta_percent,
                "per_click_sigmas": None if self.per_click_sigmas is None else list(self.per_click_sigmas),
                "click_value": self.click_value}

    def seed_mask(self, tol: float = 1e-6) -> np.ndarray:
        """Voxels where the signal sits at its click value."""
        return np.abs(self.data - self.click_value) <= tol


def _single_polarity(clicks) -> ClickSet:
    if not isinstance(clicks, ClickSet):
        clicks = ClickSet(tuple(clicks))
    if not len(clicks):
        raise ValueError("no clicks to encode")
    if len({c.polarity for c in clicks}) > 1:
        raise ValueError("encoders take clicks of one polarity; split with ClickSet.of()")
    return clicks


def encode_disk(clicks, sigma: float, dims, spacing=(1.0, 1.0, 1.0)) -> GuidanceVolume:
    """1 inside any ball ``||v - c_i|| <= sigma``, else 0."""
    clicks = _single_polarity(clicks)
    seeds = dilate_seeds(clicks, clicks[0].polarity, sigma, dims)
    return GuidanceVolume(seeds.mask, spacing, GuidanceKind.DISK, sigma=float(sigma))


def _stamp_heatmaps(clicks: ClickSet, sigmas: Sequence[float], dims, squared: bool) -> np.ndarray:
    pos = clicks.positions()
    sig = np.asarray(sigmas, dtype=np.float64)
    soft = sig > 0
    if soft.any():
        weights = 1.0 / (2.0 * sig[soft] ** 2)
        out = _kernels.heatmap_max(tuple(dims), np.ascontiguousarray(pos[soft]), weights, squared)
    else:
        out = np.zeros(dims, dtype=np.float32)
    # sigma 0: unit impulse at the click
    out[tuple(pos[~soft].T)] = 1.0
    return out


def encode_heatmap(clicks, sigma: float, dims, spacing=(1.0, 1.0, 1.0),
                   squared_exponent: bool = False) -> GuidanceVolume:
    """``max_i exp(-||v - c_i|| / (2 sigma^2))``; sigma 0 gives unit impulses.

    The distance is not squared unless ``squared_exponent`` is set.
    """
    clicks = _single_polarity(clicks)
    dims = _as_dims(dims)
    clicks.check_bounds(dims)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    data = _stamp_heatmaps(clicks, [sigma] * len(clicks), dims, squared_exponent)
    return GuidanceVolume(data, spacing, GuidanceKind.HEATMAP, sigma=float(sigma))


def truncation_threshold(d: np.ndarray, theta_percent: float) -> float:
    """The ``(100 - theta)`` percentile over every voxel of ``d`` (the maximum when theta is 0)."""
    if theta_percent > 0:
        return float(np.percentile(d, 100.0 - theta_percent))
    return float(np.max(d))


def truncate_and_scale(d: np.ndarray, theta_percent: float) -> np.ndarray:
    """Clamp distances above the truncation threshold and divide by it.

    Returns float32 values in [0, 1] with exactly 1 on clamped voxels; a zero
    threshold maps seeds to 0 and everything else to 1.
    """
    d = np.asarray(d, dtype=np.float32)
    t = truncation_threshold(d, theta_percent)
    if t <= 0:
        return (d > 0).astype(np.float32)
    out = np.minimum(d, np.float32(t))
    out /= np.float32(t)
    return out


def encode_distance_guidance(clicks, config: GuidanceConfig, image: Volume | None = None,
                             dims=None, spacing=None) -> GuidanceVolume:
    """EDT, GDT or exp-GDT guidance with sigma seed dilation and theta truncation.

    EDT/GDT are returned inverted (1 at seeds, 0 at truncated voxels).
    exp-GDT is ``1 - exp(-d)`` rescaled to [0, 1]: 0 at seeds, 1 far away,
    unless ``config.invert_exp_gdt``.
    """
    clicks = _single_polarity(clicks)
    kind = config.kind
    if kind not in (GuidanceKind.EDT, GuidanceKind.GDT, GuidanceKind.EXP_GDT):
        raise ValueError(f"{kind.value} is not a distance-based guidance")
    if kind.needs_image and image is None:
        raise ValueError(f"{kind.value} guidance needs an image")
    if image is not None:
        dims, spacing = image.dims, image.spacing
    if dims is None:
        raise ValueError("dims are required without an image")
    spacing = spacing or (1.0, 1.0, 1.0)
    seeds = dilate_seeds(clicks, clicks[0].polarity, config.sigma, dims)

    if kind is GuidanceKind.EDT:
        d = edt(seeds, spacing).data
    else:
        d = gdt(seeds, image, config.geodesic).data

    if kind is GuidanceKind.EXP_GDT:
        e = np.minimum(d, np.float32(truncation_threshold(d, config.theta_percent)))
        np.negative(e, out=e)
        np.expm1(e, out=e)
        np.negative(e, out=e)   # 1 - exp(-d)
        top = e.max()
        if top > 0:
            e /= top
        if config.invert_exp_gdt:
            return GuidanceVolume(1.0 - e, spacing, kind, sigma=config.sigma,
                                  theta_percent=config.theta_percent, click_value=1.0)
        return GuidanceVolume(e, spacing, kind, sigma=config.sigma,
                              theta_percent=config.theta_percent, click_value=0.0)

    scaled = truncate_and_scale(d, config.theta_percent)
    np.subtract(np.float32(1.0), scaled, out=scaled)
    return GuidanceVolume(scaled, spacing, kind, sigma=config.sigma,
                          theta_percent=config.theta_percent)


def adaptive_sigma(click: Click, gdt_map: DistanceMap, a: float = 13.0, b: float = 0.15,
                   neighborhood_size: int = 27) -> int:
    """``floor(a * exp(-b * x))`` with x the mean GDT around the click.

    The neighbourhood is the 3x3x3 block (27) or the in-plane 3x3 block at the
    click's z (9), clipped at the volume border.
    """
    x0, y0, z0 = click.pos
    d = gdt_map.data
    if not click.in_bounds(d.shape):
        raise ValueError(f"click {click.pos} outside volume of dims {d.shape}")
    sl = [slice(max(0, p - 1), p + 2) for p in (x0, y0)]
    zs = slice(max(0, z0 - 1), z0 + 2) if neighborhood_size == 27 else slice(z0, z0 + 1)
    x = float(np.mean(d[sl[0], sl[1], zs], dtype=np.float64))
    return sigma_from_mean_distance(x, a, b)


def sigma_from_mean_distance(x: float, a: float = 13.0, b: float = 0.15) -> int:
    return max(0, int(math.floor(a * math.exp(-b * x))))


def encode_adaptive_heatmap(clicks, image: Volume, config: GuidanceConfig = GuidanceConfig(
        kind=GuidanceKind.ADAPTIVE)) -> GuidanceVolume:
    """Heatmaps whose per-click radius shrinks with the local geodesic distance."""
    clicks = _single_polarity(clicks)
    if image is None:
        raise ValueError("adaptive heatmap guidance needs an image")
    clicks.check_bounds(image.dims)
    seeds = SeedSet.from_voxels(clicks.positions(), image.dims)
    gmap = gdt(seeds, image, config.adaptive_geodesic)
    sigmas = [adaptive_sigma(c, gmap, config.a, config.b, config.neighborhood_size) for c in clicks]
    data = _stamp_heatmaps(clicks, sigmas, image.dims, config.squared_exponent)
    return GuidanceVolume(data, image.spacing, GuidanceKind.ADAPTIVE, per_click_sigmas=sigmas)


def encode(clicks, config: GuidanceConfig, image: Volume | None = None, dims=None,
           spacing=None) -> GuidanceVolume:
    """Dispatch on ``config.kind``. ``clicks`` must share one polarity."""
    kind = config.kind
    if image is not None:
        dims, spacing = image.dims, image.spacing
    spacing = spacing or (1.0, 1.0, 1.0)
    if kind is GuidanceKind.DISK:
        return encode_disk(clicks, config.sigma, dims, spacing)
    if kind is GuidanceKind.HEATMAP:
        return encode_heatmap(clicks, config.sigma, dims, spacing, config.squared_exponent)
    if kind is GuidanceKind.ADAPTIVE:
        return encode_adaptive_heatmap(clicks, image, config)
    return encode_distance_guidance(clicks, config, image, dims, spacing)


def encode_pair(clicks: ClickSet, config: GuidanceConfig, image: Volume | None = None, dims=None
                ) -> tuple[GuidanceVolume | None, GuidanceVolume | None]:
    """Separate foreground and background guidance; ``None`` where a polarity has no clicks."""
    out = []
    for pol in (Polarity.FOREGROUND, Polarity.BACKGROUND):
        sub = clicks.of(pol)
        out.append(encode(sub, config, image, dims) if len(sub) else None)
    return out[0], out[1]
