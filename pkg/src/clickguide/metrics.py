"""Guidance evaluation metrics.

M1 final Dice, M2 initial Dice, M3 efficiency ``1 - T``, M4 consistent
improvement and M5 ground-truth overlap of the foreground guidance.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .volume import Mask

if TYPE_CHECKING:
    from .encoders import GuidanceVolume
    from .simulation import SessionTrace

CSV_COLUMNS = ("kind", "sigma", "theta", "p", "M1", "M2", "M3", "M4", "M5")


def dice(a: Mask, b: Mask) -> float:
    """``2|A & B| / (|A| + |B|)``; two empty masks score 1."""
    if a.dims != b.dims:
        raise ValueError(f"dims mismatch: {a.dims} vs {b.dims}")
    sa, sb = a.count(), b.count()
    if sa + sb == 0:
        return 1.0
    inter = int(np.count_nonzero(a.data & b.data))
    return 2.0 * inter / (sa + sb)


def consistent_improvement(traces: Sequence["SessionTrace"]) -> float:
    """Strictly improving clicks over ``N * len(traces)``.

    Early-stopped or non-interactive sessions still count their full ``N``.
    """
    if not traces:
        raise ValueError("no traces")
    improving = sum(_improving_steps(t.dice_trajectory) for t in traces)
    total = sum(t.n_clicks for t in traces)
    return improving / total


def _improving_steps(traj: Sequence[float]) -> int:
    return sum(1 for before, after in zip(traj, traj[1:]) if after > before)


def gt_overlap(guidance: "GuidanceVolume", gt: Mask, binarize_eps: float = 0.0) -> float:
    """``|M & G| / |G|`` with ``G = {v : guidance(v) > binarize_eps}``."""
    if guidance.dims != gt.dims:
        raise ValueError(f"dims mismatch: {guidance.dims} vs {gt.dims}")
    g = guidance.data > binarize_eps
    n = int(np.count_nonzero(g))
    if n == 0:
        raise ValueError("binarized guidance is empty")
    return int(np.count_nonzero(g & gt.to_bool())) / n


def efficiency(timings: Sequence[float]) -> float:
    """``1 - T`` with ``T`` the mean guidance time, clamped to [0, 1] seconds."""
    if len(timings) == 0:
        raise ValueError("no timings")
    t = np.asarray(timings, dtype=np.float64)
    if (t < 0).any():
        raise ValueError("timings must be non-negative")
    return 1.0 - float(np.clip(t.mean(), 0.0, 1.0))


@dataclass
class MetricsReport:
    final_dice: float
    initial_dice: float
    efficiency: float | None
    consistent_improvement: float
    gt_overlap: float | None
    n_sessions: int
    per_session: list[dict] = field(default_factory=list)
    label: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    def csv_row(self) -> dict:
        row = {k: self.label.get(k, "") for k in ("kind", "sigma", "theta", "p")}
        row.update(M1=self.final_dice, M2=self.initial_dice,
                   M3="" if self.efficiency is None else self.efficiency,
                   M4=self.consistent_improvement,
                   M5="" if self.gt_overlap is None else self.gt_overlap)
        return {k: ("" if v is None else v) for k, v in row.items()}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerow(self.csv_row())
        return buf.getvalue()


def aggregate(traces: Sequence["SessionTrace"], guidances=None, gts=None,
              label: dict | None = None, binarize_eps: float = 0.0) -> MetricsReport:
    """Combine sessions into M1-M5.

    M5 is computed from ``guidances``/``gts`` (final foreground guidance and
    ground truth per session, ``None`` entries skipped) when given, otherwise
    from each trace's stored ``gt_overlap``. M3 and M5 are ``None`` when no
    session produced timings or guidance.
    """
    if not traces:
        raise ValueError("no traces")
    if guidances is not None:
        if gts is None or not (len(guidances) == len(gts) == len(traces)):
            raise ValueError("guidances, gts and traces must have equal length")
        overlaps = [None if g is None else gt_overlap(g, m, binarize_eps) for g, m in zip(guidances, gts)]
    else:
        overlaps = [t.gt_overlap for t in traces]

    per_session = []
    for t, ov in zip(traces, overlaps):
        per_session.append({
            "initial_dice": t.initial_dice, "final_dice": t.final_dice,
            "clicks": len(t.clicks), "improving_clicks": _improving_steps(t.dice_trajectory),
            "mean_guidance_seconds": float(np.mean(t.guidance_timings)) if t.guidance_timings else None,
            "gt_overlap": ov, "early_stop": t.early_stop,
        })
    timings = [x for t in traces for x in t.guidance_timings]
    valid_ov = [o for o in overlaps if o is not None]
    return MetricsReport(
        final_dice=float(np.mean([t.final_dice for t in traces])),
        initial_dice=float(np.mean([t.initial_dice for t in traces])),
        efficiency=efficiency(timings) if timings else None,
        consistent_improvement=consistent_improvement(traces),
        gt_overlap=float(np.mean(valid_ov)) if valid_ov else None,
        n_sessions=len(traces),
        per_session=per_session,
        label=dict(label or {}),
    )
