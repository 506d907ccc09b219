"""Hyperparameter sweeps and guidance timing benchmarks."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .encoders import GuidanceConfig, GuidanceKind, encode, tuned_config
from .metrics import CSV_COLUMNS, MetricsReport, aggregate
from .simulation import ClickPlacement, OracleParams, SimulationConfig, run_session
from .volume import Click, ClickSet, Mask, Volume, make_phantom, phantom_batch

log = logging.getLogger(__name__)

DEFAULT_SIGMAS = (0.0, 1.0, 5.0, 9.0, 13.0)
DEFAULT_THETAS = (0.0, 10.0, 30.0, 50.0)
DEFAULT_P_PERCENT = (50.0, 75.0, 100.0)


def _frozen_clock() -> float:
    return 0.0


@dataclass
class SweepSpec:
    kinds: Sequence[GuidanceKind | str] = tuple(GuidanceKind)
    sigmas: Sequence[float] = DEFAULT_SIGMAS
    thetas: Sequence[float] = DEFAULT_THETAS
    p_values: Sequence[float] = DEFAULT_P_PERCENT  # percent
    n_clicks: int = 10
    rng_seed: int = 0
    phantoms: Sequence[str] = ("sphere", "noisy-sphere")
    n_volumes: int = 2
    dims: tuple[int, int, int] = (32, 32, 32)
    volumes: list[tuple[Volume, Mask]] | None = None
    placement: ClickPlacement = ClickPlacement.ERROR_CENTER
    oracle: OracleParams = field(default_factory=OracleParams)
    record_timings: bool = True

    def __post_init__(self):
        self.kinds = [GuidanceKind.parse(k) for k in self.kinds]
        for name in ("kinds", "sigmas", "thetas", "p_values"):
            if not len(getattr(self, name)):
                raise ValueError(f"sweep list {name!r} is empty")
        if any(s < 0 for s in self.sigmas):
            raise ValueError("sigmas must be >= 0")
        if any(not 0 <= t < 100 for t in self.thetas):
            raise ValueError("thetas must lie in [0, 100)")
        if any(not 0 <= p <= 100 for p in self.p_values):
            raise ValueError("p values are percentages in [0, 100]")
        if self.n_clicks < 1:
            raise ValueError("n_clicks must be >= 1")

    def grid(self) -> list[tuple[GuidanceKind, float | None, float | None, float]]:
        """Deterministic (kind, sigma, theta, p) cells; inapplicable axes collapse to None."""
        cells = []
        for kind in self.kinds:
            sigmas = list(self.sigmas) if kind.uses_sigma else [None]
            thetas = list(self.thetas) if kind.uses_theta else [None]
            if not kind.uses_sigma and len(self.sigmas) > 1:
                log.info("sigma axis collapsed for %s", kind.value)
            if not kind.uses_theta and len(self.thetas) > 1:
                log.info("theta axis collapsed for %s", kind.value)
            for s in sigmas:
                for t in thetas:
                    for p in self.p_values:
                        cells.append((kind, s, t, p))
        if not cells:
            raise ValueError("empty sweep grid")
        return cells

    def load_volumes(self) -> list[tuple[Volume, Mask]]:
        if self.volumes is not None:
            return list(self.volumes)
        out = []
        for i, kind in enumerate(self.phantoms):
            out.extend(phantom_batch(kind, self.n_volumes, self.dims, self.rng_seed + 1000 * i))
        return out


def run_cell(volumes, guidance: GuidanceConfig, p_percent: float, n_clicks: int, rng_seed: int,
             placement=ClickPlacement.ERROR_CENTER, oracle: OracleParams = OracleParams(),
             clock: Callable[[], float] = time.perf_counter, label: dict | None = None) -> MetricsReport:
    """Simulate one session per volume with a shared guidance config and aggregate."""
    traces = []
    for i, (img, gt) in enumerate(volumes):
        cfg = SimulationConfig(n_clicks=n_clicks, p_interaction=p_percent / 100.0,
                               rng_seed=rng_seed + i, click_placement=placement,
                               guidance=guidance, oracle=oracle)
        traces.append(run_session(img, gt, config=cfg, clock=clock))
    return aggregate(traces, label=label)


def run_sweep(spec: SweepSpec) -> list[MetricsReport]:
    volumes = spec.load_volumes()
    clock = time.perf_counter if spec.record_timings else _frozen_clock
    reports = []
    for kind, sigma, theta, p in spec.grid():
        guidance = GuidanceConfig(kind=kind, sigma=sigma or 0.0, theta_percent=theta or 0.0)
        label = {"kind": kind.value, "sigma": sigma, "theta": theta, "p": p}
        log.info("sweep cell %s", label)
        reports.append(run_cell(volumes, guidance, p, spec.n_clicks, spec.rng_seed,
                                spec.placement, spec.oracle, clock, label))
    return reports


def sweep_csv(reports: Sequence[MetricsReport]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()


# --- benchmark --------------------------------------------------------------


@dataclass
class BenchResult:
    kind: str
    size: int
    runs: list[float]

    @property
    def median(self) -> float:
        return float(np.median(self.runs))

    @property
    def p95(self) -> float:
        return float(np.percentile(self.runs, 95))

    def to_json(self) -> dict:
        return {"kind": self.kind, "size": self.size, "repetitions": len(self.runs),
                "median_seconds": self.median, "p95_seconds": self.p95, "runs_seconds": self.runs}


def bench_clicks(gt: Mask, n_clicks: int, rng_seed: int) -> ClickSet:
    """``n_clicks`` distinct foreground clicks drawn uniformly from the object."""
    vox = np.argwhere(gt.data)
    rng = np.random.default_rng(rng_seed)
    pick = rng.choice(len(vox), size=min(n_clicks, len(vox)), replace=False)
    return ClickSet(tuple(Click(tuple(vox[i])) for i in sorted(pick)))


def run_bench(sizes: Sequence[int] = (64, 128, 256), kinds: Sequence = tuple(GuidanceKind),
              repetitions: int = 5, n_clicks: int = 10, rng_seed: int = 0,
              configs: dict | None = None) -> list[BenchResult]:
    """Wall time of encoding ``n_clicks`` foreground clicks on Sphere phantoms."""
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    kinds = [GuidanceKind.parse(k) for k in kinds]
    configs = configs or {}
    warm_img, warm_gt = make_phantom("sphere", (8, 8, 8))
    warm_clicks = bench_clicks(warm_gt, 2, rng_seed)
    results = []
    for n in sizes:
        img, gt = make_phantom("sphere", (n, n, n), rng_seed=rng_seed)
        clicks = bench_clicks(gt, n_clicks, rng_seed)
        for kind in kinds:
            cfg = configs.get(kind, tuned_config(kind))
            encode(warm_clicks, cfg, warm_img)  # compile outside the timed region
            runs = []
            for _ in range(repetitions):
                t0 = time.perf_counter()
                encode(clicks, cfg, img)
                runs.append(time.perf_counter() - t0)
            log.info("bench %s %d^3 median %.4fs", kind.value, n, float(np.median(runs)))
            results.append(BenchResult(kind.value, int(n), runs))
    return results


def over_budget(results: Sequence[BenchResult], budget_seconds: float) -> list[BenchResult]:
    return [r for r in results if r.median > budget_seconds]


def bench_table(results: Sequence[BenchResult]) -> str:
    lines = [f"{'kind':<18}{'size':>6}{'median[s]':>12}{'p95[s]':>10}{'reps':>6}"]
    for r in results:
        lines.append(f"{r.kind:<18}{r.size:>6}{r.median:>12.4f}{r.p95:>10.4f}{len(r.runs):>6}")
    return "\n".join(lines)
