"""Simulated click-refinement sessions.

Each round compares the current prediction with the ground truth, places a
corrective click in the largest error component, re-encodes the foreground
and background guidance and asks the segmenter for a new prediction.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol

import numpy as np
from scipy import ndimage

from . import _kernels
from .distance import GeodesicParams, SeedSet, gdt
from .encoders import GuidanceConfig, GuidanceKind, GuidanceVolume, encode_pair
from .metrics import dice, gt_overlap
from .volume import Click, ClickSet, Mask, Polarity, Volume, connected_components, linear_indices


class ClickPlacement(str, enum.Enum):
    ERROR_CENTER = "error-center"
    UNIFORM_IN_ERROR = "uniform-in-error"


class NoErrorToCorrect(ValueError):
    """Prediction already matches the ground truth (or every error voxel was clicked)."""


class Segmenter(Protocol):
    def __call__(self, image: Volume, fg_guidance: GuidanceVolume | None,
                 bg_guidance: GuidanceVolume | None) -> Mask: ...


@dataclass(frozen=True)
class OracleParams:
    """Knobs of the non-learned geodesic segmenter.

    A large ``gamma`` makes object edges expensive to cross, so a seed's
    geodesic ball stops at the boundary. The image is Gaussian-smoothed with
    ``smoothing`` (voxels, 0 = off) first so that voxel noise does not swamp
    the edge term. ``tau`` thresholds the foreground distance while no
    background seed exists.
    """

    gamma: float = 100.0
    tau: float = 30.0
    smoothing: float = 1.0
    cap_with_tau: bool = True
    spatial_weight: float = 0.2
    neighborhood: int = 26
    passes: int | str = 4
    seed_tolerance: float = 1e-6

    def geodesic(self) -> GeodesicParams:
        return GeodesicParams(gamma=self.gamma, passes=self.passes,
                              neighborhood=self.neighborhood, spatial_weight=self.spatial_weight)

    def to_json(self) -> dict:
        return {"gamma": self.gamma, "tau": self.tau, "smoothing": self.smoothing,
                "cap_with_tau": self.cap_with_tau,
                "spatial_weight": self.spatial_weight,
                "neighborhood": self.neighborhood, "passes": self.passes,
                "seed_tolerance": self.seed_tolerance}


def geodesic_oracle_segment(image: Volume, fg_guidance: GuidanceVolume | None,
                            bg_guidance: GuidanceVolume | None,
                            params: OracleParams = OracleParams()) -> Mask:
    """Label a voxel foreground iff it is geodesically closer to the foreground seeds.

    Seeds are the voxels where each guidance sits at its click value. Without
    background seeds the rule is ``GDT_fg <= tau``; with them it is
    ``GDT_fg <= GDT_bg`` and, when ``params.cap_with_tau`` is set, also
    ``GDT_fg <= tau``.
    """
    if fg_guidance is None:
        raise ValueError("oracle segmentation needs foreground guidance")
    fg = fg_guidance.seed_mask(params.seed_tolerance)
    if not fg.any():
        raise ValueError("foreground guidance has no seed voxels")
    geo = params.geodesic()
    if params.smoothing > 0:
        smooth = ndimage.gaussian_filter(image.data.astype(np.float64), params.smoothing)
        image = Volume(np.clip(smooth, 0.0, 1.0), image.spacing)
    d_fg = gdt(SeedSet(fg), image, geo).data
    bg = None if bg_guidance is None else bg_guidance.seed_mask(params.seed_tolerance)
    if bg is None or not bg.any():
        return Mask(d_fg <= params.tau, image.spacing)
    d_bg = gdt(SeedSet(bg), image, geo).data
    fg_mask = d_fg <= d_bg
    if params.cap_with_tau:
        fg_mask &= d_fg <= params.tau
    return Mask(fg_mask, image.spacing)


class GeodesicOracle:
    """Segmenter stand-in: empty mask before any click, geodesic labelling after."""

    def __init__(self, params: OracleParams = OracleParams()):
        self.params = params

    def __call__(self, image, fg_guidance, bg_guidance) -> Mask:
        if fg_guidance is None:
            return Mask.empty(image.dims, image.spacing)
        return geodesic_oracle_segment(image, fg_guidance, bg_guidance, self.params)


def sample_click(prediction: Mask, ground_truth: Mask,
                 placement: ClickPlacement | str = ClickPlacement.ERROR_CENTER,
                 rng: np.random.Generator | None = None, exclude=()) -> Click:
    """Corrective click inside the largest 26-connected component of the larger error map.

    Undersegmentation (missed ground truth) yields a foreground click and wins
    ties; oversegmentation yields a background click. ``exclude`` lists voxel
    positions that must not be clicked again.
    """
    placement = ClickPlacement(placement)
    if prediction.dims != ground_truth.dims:
        raise ValueError(f"prediction dims {prediction.dims} != ground truth dims {ground_truth.dims}")
    pred, gt = prediction.to_bool(), ground_truth.to_bool()
    under = gt & ~pred
    over = pred & ~gt
    for pos in exclude:
        under[tuple(pos)] = False
        over[tuple(pos)] = False
    n_under, n_over = int(under.sum()), int(over.sum())
    if n_under == 0 and n_over == 0:
        raise NoErrorToCorrect("prediction equals ground truth; no error to correct")
    if n_under >= n_over:
        err, polarity = under, Polarity.FOREGROUND
    else:
        err, polarity = over, Polarity.BACKGROUND

    comp = connected_components(Mask(err), 26)[0]
    if placement is ClickPlacement.UNIFORM_IN_ERROR:
        if rng is None:
            raise ValueError("uniform placement needs an rng")
        pos = comp.voxels[int(rng.integers(comp.size))]
        return Click(tuple(pos), polarity)

    region = np.zeros(prediction.dims, dtype=bool)
    region[tuple(comp.voxels.T)] = True
    # pad so the outside of the volume counts as complement
    outside = ~np.pad(region, 1)
    inner = np.sqrt(_kernels.squared_edt(outside, np.ones(3)))[1:-1, 1:-1, 1:-1]
    inner = np.where(region, inner, -1.0)
    cand = np.flatnonzero(inner == inner.max())
    lin = linear_indices(prediction.dims).ravel()[cand]
    best = cand[np.argmin(lin)]
    return Click(tuple(int(v) for v in np.unravel_index(best, prediction.dims)), polarity)


@dataclass(frozen=True)
class SimulationConfig:
    n_clicks: int = 10
    p_interaction: float = 1.0
    rng_seed: int = 0
    click_placement: ClickPlacement = ClickPlacement.ERROR_CENTER
    guidance: GuidanceConfig = GuidanceConfig(kind=GuidanceKind.ADAPTIVE)
    oracle: OracleParams = OracleParams()
    binarize_eps: float = 0.0

    def __post_init__(self):
        if self.n_clicks < 1:
            raise ValueError(f"n_clicks must be >= 1, got {self.n_clicks}")
        if not 0 <= self.p_interaction <= 1:
            raise ValueError(f"p_interaction must be in [0, 1], got {self.p_interaction}")
        object.__setattr__(self, "click_placement", ClickPlacement(self.click_placement))

    def to_json(self) -> dict:
        return {"n_clicks": self.n_clicks, "p_interaction": self.p_interaction,
                "rng_seed": self.rng_seed, "click_placement": self.click_placement.value,
                "guidance": self.guidance.to_json(), "oracle": self.oracle.to_json(),
                "binarize_eps": self.binarize_eps}


@dataclass
class SessionTrace:
    clicks: ClickSet
    dice_trajectory: list[float]
    guidance_timings: list[float]
    n_clicks: int
    interacted: bool = True
    early_stop: bool = False
    gt_overlap: float | None = None
    config: dict = field(default_factory=dict)
    final_prediction: Mask | None = field(default=None, repr=False)
    final_fg_guidance: GuidanceVolume | None = field(default=None, repr=False)

    @property
    def initial_dice(self) -> float:
        return self.dice_trajectory[0]

    @property
    def final_dice(self) -> float:
        return self.dice_trajectory[-1]

    def to_json(self) -> dict:
        return {
            "clicks": [{**c.to_json(), "order": i} for i, c in enumerate(self.clicks)],
            "dice_trajectory": self.dice_trajectory,
            "guidance_timings_seconds": self.guidance_timings,
            "n_clicks": self.n_clicks,
            "interacted": self.interacted,
            "early_stop": self.early_stop,
            "gt_overlap": self.gt_overlap,
            "config": self.config,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, obj: dict) -> "SessionTrace":
        clicks = sorted(obj["clicks"], key=lambda c: c.get("order", 0))
        return cls(
            clicks=ClickSet.from_json(clicks),
            dice_trajectory=[float(v) for v in obj["dice_trajectory"]],
            guidance_timings=[float(v) for v in obj["guidance_timings_seconds"]],
            n_clicks=int(obj.get("n_clicks", obj.get("config", {}).get("n_clicks", 10))),
            interacted=bool(obj.get("interacted", True)),
            early_stop=bool(obj.get("early_stop", False)),
            gt_overlap=obj.get("gt_overlap"),
            config=obj.get("config", {}),
        )


def run_session(image: Volume, ground_truth: Mask, segmenter: Segmenter | None = None,
                config: SimulationConfig = SimulationConfig(),
                clock: Callable[[], float] = time.perf_counter) -> SessionTrace:
    """Run one simulated annotation session.

    Whether the volume gets clicks at all is drawn once from ``rng_seed`` with
    probability ``p_interaction``. ``clock`` times guidance encoding only; pass
    a constant function to get reproducible (zero) timings.
    """
    if image.dims != ground_truth.dims:
        raise ValueError(f"image dims {image.dims} != ground truth dims {ground_truth.dims}")
    segmenter = segmenter if segmenter is not None else GeodesicOracle(config.oracle)
    rng = np.random.default_rng(config.rng_seed)
    interacted = bool(rng.random() < config.p_interaction)

    pred = segmenter(image, None, None)
    trace = SessionTrace(ClickSet(), [dice(pred, ground_truth)], [], config.n_clicks,
                         interacted=interacted, config=config.to_json())
    fg = None
    if interacted:
        clicks = ClickSet()
        for _ in range(config.n_clicks):
            try:
                click = sample_click(pred, ground_truth, config.click_placement, rng,
                                     exclude=[c.pos for c in clicks])
            except NoErrorToCorrect:
                trace.early_stop = True
                break
            clicks = clicks.add(click)
            t0 = clock()
            fg, bg = encode_pair(clicks, config.guidance, image)
            trace.guidance_timings.append(max(0.0, clock() - t0))
            pred = segmenter(image, fg, bg)
            trace.dice_trajectory.append(dice(pred, ground_truth))
        trace.clicks = clicks
    trace.final_prediction = pred
    trace.final_fg_guidance = fg
    if fg is not None:
        try:
            trace.gt_overlap = gt_overlap(fg, ground_truth, config.binarize_eps)
        except ValueError:
            trace.gt_overlap = None
    return trace
