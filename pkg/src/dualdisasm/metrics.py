"""Object pose deviation, timeline normalisation and success rates."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import numpy as np

from . import rotation as rot

NORMALIZED_DURATION = 16.0
RESAMPLE_STEP = 0.1


@dataclass(frozen=True)
class PoseSample:
    t: float
    position: np.ndarray
    orientation: np.ndarray


def quaternion_angle(q_t, q_0) -> float:
    """Rotation angle between two unit quaternions; ``q`` and ``-q`` count as equal."""
    return rot.angle_between(rot.check_unit(q_t), rot.check_unit(q_0))


def deviation_terms(sample: PoseSample, initial: PoseSample):
    dp = float(np.linalg.norm(np.asarray(sample.position, dtype=float) - np.asarray(initial.position, dtype=float)))
    return dp, quaternion_angle(sample.orientation, initial.orientation)


def pose_deviation(sample: PoseSample, initial: PoseSample) -> float:
    """Position offset (m) plus rotation angle (rad), summed as-is."""
    dp, ang = deviation_terms(sample, initial)
    return dp + ang


def normalize_timeline(series: Sequence[PoseSample], target_duration: float = NORMALIZED_DURATION,
                       step: float = RESAMPLE_STEP) -> List[PoseSample]:
    """Stretch a series onto ``[0, target_duration]`` and resample at a fixed step.

    Positions are interpolated linearly and orientations by slerp. The first
    and last samples are carried over unchanged.
    """
    if len(series) < 2:
        raise ValueError("need at least two samples to normalise a timeline")
    t = np.array([s.t for s in series], dtype=float)
    span = t[-1] - t[0]
    if span <= 0:
        raise ValueError("series must span a positive duration")
    tau = (t - t[0]) * (target_duration / span)
    n = int(round(target_duration / step))
    out = []
    for i in range(n + 1):
        ti = i * step if i < n else target_duration
        if i == 0:
            src = series[0]
        elif i == n:
            src = series[-1]
        else:
            k = int(np.searchsorted(tau, ti, side="right")) - 1
            k = min(max(k, 0), len(series) - 2)
            u = (ti - tau[k]) / (tau[k + 1] - tau[k])
            if u == 0.0:
                src = series[k]
            else:
                a, b = series[k], series[k + 1]
                pos = (1.0 - u) * np.asarray(a.position, dtype=float) + u * np.asarray(b.position, dtype=float)
                src = PoseSample(ti, pos, rot.slerp(a.orientation, b.orientation, u))
        out.append(PoseSample(ti, np.asarray(src.position, dtype=float), np.asarray(src.orientation, dtype=float)))
    return out


def deviation_series(series: Sequence[PoseSample]) -> np.ndarray:
    """``(N, 4)`` rows of ``(t, deviation, position term, angle term)`` relative to the first sample."""
    rows = []
    for s in series:
        dp, ang = deviation_terms(s, series[0])
        rows.append((s.t, dp + ang, dp, ang))
    return np.array(rows, dtype=float).reshape(-1, 4)


def write_deviation_csv(series: Sequence[PoseSample], path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "deviation", "pos_term", "ang_term"])
        for row in deviation_series(series):
            w.writerow([f"{v:.10g}" for v in row])


def success_rate(results) -> float:
    results = list(results)
    if not results:
        raise ValueError("no trial results to aggregate")
    return sum(1 for r in results if r.success) / len(results)
