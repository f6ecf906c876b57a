"""Freezing-vs-scrambling classification and 2-D phase-diagram assembly.

A learned sequence model is deliberately not used here: three deterministic,
scale-free features of the OTOC series feed a fixed logistic score, giving a
reproducible rho in [0, 1] with documented calibration anchors (exact
saturation -> rho < 0.05, exact linear growth -> rho > 0.95). The classifier
is a plain function, so a trained model can replace `classify` later without
touching the sweep machinery.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, NamedTuple

import numpy as np

from .observables import OtocSeries, _linear_fit, record_series
from .propagator import SimConfig

MIN_SERIES_LENGTH = 200
MIN_PHASE_KICKS = 500

# Sweep axes set these scalar parameters on the kick schedule.
AXIS_FIELDS = {"eta": "eta", "lambda": "lam", "K": "K"}


class Features(NamedTuple):
    """Scale-free summary of one OTOC series."""

    late_slope_normalized: float
    doubling_ratio: float
    saturation_r2: float


class AxisSpec(NamedTuple):
    """A named parameter grid for one sweep axis."""

    name: str
    values: np.ndarray


@dataclass(frozen=True)
class PhasePoint:
    params: tuple[float, float]
    rho: float
    features: Features


@dataclass
class PhaseDiagram:
    """Complete row-major grid of classifier outputs over a parameter plane.

    points[i][j] belongs to axis1.values[i], axis2.values[j]. boundary holds,
    per axis2 column, the interpolated axis1 value where rho crosses 0.5
    (None where a column never crosses).
    """

    axis1: AxisSpec
    axis2: AxisSpec
    points: list[list[PhasePoint]]
    boundary: list[tuple[float, float | None]]


def extract_features(series: OtocSeries) -> Features:
    """Late-window slope, window-mean doubling ratio, and saturation quality.

    Windows are inclusive in kick time: the slope and saturation use
    t in [T/2, T]; the doubling ratio compares mean C over [3T/4, T] against
    [T/4, T/2] (1 for saturation, exactly 7/3 for linear growth through the
    window centers). An all-zero series maps to (0, 1, 1) by convention.
    """
    if len(series) < MIN_SERIES_LENGTH:
        raise ValueError(
            f"series has {len(series)} kicks; need at least {MIN_SERIES_LENGTH}"
        )
    c = series.c_exact
    t = series.t.astype(float)
    if not np.any(c > 0.0):
        return Features(0.0, 1.0, 1.0)

    t_max = t[-1]
    late = c[(t >= t_max / 2.0) & (t <= t_max)]
    t_late = t[(t >= t_max / 2.0) & (t <= t_max)]
    slope, _, _ = _linear_fit(t_late, late)
    mean_late = float(late.mean())
    slope_norm = slope / mean_late if mean_late > 0.0 else 0.0

    early_mean = float(c[(t >= t_max / 4.0) & (t <= t_max / 2.0)].mean())
    last_mean = float(c[t >= 3.0 * t_max / 4.0].mean())
    ratio = last_mean / max(early_mean, 1e-300)
    ratio = float(np.clip(ratio, 0.0, 1e6))

    mean_sq = float(np.mean(late**2))
    sat = 1.0 - float(late.var()) / mean_sq if mean_sq > 0.0 else 1.0
    return Features(slope_norm, ratio, sat)


def classify(features: Features) -> float:
    """Logistic score over the features; monotone in each of them.

    Calibration: doubling ratio 1 with saturated companions gives rho < 0.05,
    ratio >= 2 gives rho > 0.9 even with neutral companions.
    """
    slope_norm, ratio, sat = features
    for value in (slope_norm, ratio, sat):
        if not math.isfinite(value):
            raise ValueError(f"non-finite feature in {features}")
    score = 6.0 * (ratio - 1.5) + 100.0 * slope_norm - (sat - 0.5)
    return 1.0 / (1.0 + math.exp(-score))


def _config_at(
    base: SimConfig, axis1: AxisSpec, axis2: AxisSpec, v1: float, v2: float, kicks: int
) -> SimConfig:
    schedule = base.schedule
    schedule = replace(schedule, **{AXIS_FIELDS[axis1.name]: float(v1)})
    schedule = replace(schedule, **{AXIS_FIELDS[axis2.name]: float(v2)})
    return replace(base, schedule=schedule, kick_count=kicks)


def _evaluate_point(args) -> tuple[int, int, float, Features]:
    i, j, config, v1, v2 = args
    record = record_series(config)
    features = extract_features(record.series)
    return i, j, classify(features), features


def phase_diagram(
    axis1: AxisSpec,
    axis2: AxisSpec,
    base_config: SimConfig,
    kicks: int,
    jobs: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> PhaseDiagram:
    """One simulation per grid point, classified and assembled row-major.

    Points are independent work items; results land in the pre-sized grid by
    index, so the outcome does not depend on evaluation order or worker count.
    """
    for axis in (axis1, axis2):
        if axis.name not in AXIS_FIELDS:
            raise ValueError(f"unknown sweep axis {axis.name!r}")
        if len(axis.values) < 2:
            raise ValueError(f"axis {axis.name} needs at least 2 values")
    if kicks < MIN_PHASE_KICKS:
        raise ValueError(f"phase diagrams need at least {MIN_PHASE_KICKS} kicks")

    tasks = [
        (i, j, _config_at(base_config, axis1, axis2, v1, v2, kicks), float(v1), float(v2))
        for i, v1 in enumerate(axis1.values)
        for j, v2 in enumerate(axis2.values)
    ]
    grid: list[list[PhasePoint | None]] = [
        [None] * len(axis2.values) for _ in axis1.values
    ]
    done = 0
    if jobs <= 1:
        results = map(_evaluate_point, tasks)
        for i, j, rho, features in results:
            grid[i][j] = PhasePoint((float(axis1.values[i]), float(axis2.values[j])), rho, features)
            done += 1
            if progress is not None:
                progress(done, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, j, rho, features in pool.map(_evaluate_point, tasks):
                grid[i][j] = PhasePoint(
                    (float(axis1.values[i]), float(axis2.values[j])), rho, features
                )
                done += 1
                if progress is not None:
                    progress(done, len(tasks))

    points = [[pt for pt in row] for row in grid]
    boundary = _boundary_per_column(axis1, axis2, points)
    return PhaseDiagram(axis1, axis2, points, boundary)


def _boundary_per_column(
    axis1: AxisSpec, axis2: AxisSpec, points: list[list[PhasePoint]]
) -> list[tuple[float, float | None]]:
    """First rho = 0.5 crossing along axis1, linearly interpolated, per column."""
    boundary: list[tuple[float, float | None]] = []
    for j, v2 in enumerate(axis2.values):
        rhos = np.array([points[i][j].rho for i in range(len(axis1.values))])
        crossing = None
        for i in range(len(rhos) - 1):
            lo, hi = rhos[i] - 0.5, rhos[i + 1] - 0.5
            if lo == 0.0:
                crossing = float(axis1.values[i])
                break
            if lo * hi < 0.0:
                frac = lo / (lo - hi)
                crossing = float(
                    axis1.values[i] + frac * (axis1.values[i + 1] - axis1.values[i])
                )
                break
        boundary.append((float(v2), crossing))
    return boundary


def default_jobs() -> int:
    """Worker count: NQKR_JOBS environment override, else the CPU count."""
    env = os.environ.get("NQKR_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1
