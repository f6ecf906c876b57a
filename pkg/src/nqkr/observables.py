"""OTOC time series, momentum-profile fits, and growth-rate extraction.

The rescaled OTOC is recorded from the renormalized state. That is exact, not
an approximation: with A = e^(-i*eps*p) diagonal in the momentum basis,
C(t) = 1 - |<psi|A|psi>|^2 / N^2 and both the overlap and N carry the same
exp(log_norm) factor, which cancels. So C(t) = 1 - |sum_n e^(-i*eps*p_n)
|psi_n|^2|^2 on unit-norm amplitudes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .lattice import (
    MomentumDistribution,
    WaveFunction,
    _check_norm,
    expectation_p,
    expectation_p2,
)
from .propagator import SimConfig, evolve

PROBABILITY_FLOOR = 1e-30
FIT_WINDOW_PROB = 1e-25


class FitError(ValueError):
    """A least-squares fit could not be performed or is meaningless."""


@dataclass
class OtocSeries:
    """Per-kick records of the scrambling and norm observables."""

    t: np.ndarray
    c_exact: np.ndarray
    c_approx: np.ndarray
    norm_log: np.ndarray
    mean_p: np.ndarray
    mean_p2: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.int64)
        for name in ("c_exact", "c_approx", "norm_log", "mean_p", "mean_p2"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            if arr.shape != self.t.shape:
                raise ValueError(f"{name} length does not match t")
            setattr(self, name, arr)
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("records must be strictly ordered in t")

    def __len__(self) -> int:
        return len(self.t)


@dataclass(frozen=True)
class ProfileFit:
    """Log-linear fit of a momentum profile against one model class."""

    kind: str  # "exponential" or "gaussian"
    xi_or_sigma: float
    r_squared: float
    fit_window: tuple[float, float]


@dataclass(frozen=True)
class NormGrowthFit:
    """Linear fit of log-norm versus kick time."""

    mu: float
    intercept: float
    fit_window: tuple[float, float]
    r_squared: float


def otoc_exact(psi: WaveFunction, epsilon_shift: float) -> float:
    """Rescaled OTOC 1 - |<e^(-i*eps*p)>|^2 of the normalized state."""
    prob = np.abs(psi.amps) ** 2
    s = _check_norm(float(prob.sum()))
    if epsilon_shift == 0.0:
        return 0.0  # identity operator, exactly
    overlap = np.sum(np.exp(-1j * epsilon_shift * psi.lattice.momenta) * prob) / s
    # |overlap| <= 1 exactly; the max() only absorbs float roundoff.
    return max(0.0, 1.0 - float(np.abs(overlap) ** 2))


def otoc_approx(psi: WaveFunction, epsilon_shift: float) -> float:
    """Small-shift approximation eps^2 * (<p^2> - <p>^2)."""
    mp = expectation_p(psi)
    mp2 = expectation_p2(psi)
    return epsilon_shift**2 * (mp2 - mp * mp)


@dataclass
class EvolutionRecord:
    """A full run: the per-kick series, the final state, and any snapshots."""

    series: OtocSeries
    final: WaveFunction
    snapshots: dict[int, MomentumDistribution]


def record_series(
    config: SimConfig,
    snapshot_times: tuple[int, ...] = (),
) -> EvolutionRecord:
    """Evolve config from the ground state, recording observables each kick.

    snapshot_times lists kick times at which the momentum distribution is
    captured (useful for profile fits and file output).
    """
    eps = config.epsilon_shift
    snap_at = set(snapshot_times)
    snapshots: dict[int, MomentumDistribution] = {}
    rows: list[tuple[int, float, float, float, float, float]] = []

    def observer(t: int, psi: WaveFunction) -> None:
        prob = np.abs(psi.amps) ** 2
        s = _check_norm(float(prob.sum()))
        prob /= s
        p = psi.lattice.momenta
        overlap = np.sum(np.exp(-1j * eps * p) * prob)
        c_exact = max(0.0, 1.0 - float(np.abs(overlap) ** 2))
        mp = float(np.dot(p, prob))
        mp2 = float(np.dot(p * p, prob))
        rows.append((t, c_exact, eps**2 * (mp2 - mp * mp), psi.log_norm, mp, mp2))
        if t in snap_at:
            snapshots[t] = MomentumDistribution(p.copy(), prob.copy())

    final = evolve(config, observers=[observer])
    cols = list(zip(*rows)) if rows else [[]] * 6
    series = OtocSeries(*[np.asarray(c) for c in cols])
    return EvolutionRecord(series, final, snapshots)


def _window_mask(x: np.ndarray, window: tuple[float, float]) -> np.ndarray:
    lo, hi = window
    return (x >= lo) & (x <= hi)


def _linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares slope, intercept and r^2. Constant data fits exactly."""
    design = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return float(coef[0]), float(coef[1]), r2


def _default_window(dist: MomentumDistribution) -> tuple[float, float]:
    """Contiguous region around the peak where prob > 1e-25.

    Walking outward from the peak tolerates short sub-threshold dips (noise)
    but stops once the profile has genuinely fallen off. Isolated far-out
    noise excursions (e.g. roundoff amplified near the truncation seam of a
    long non-Hermitian run) therefore cannot stretch the window.
    """
    above = dist.prob > FIT_WINDOW_PROB
    if not np.any(above):
        raise FitError("no probabilities above the fit-window threshold")
    peak = int(np.argmax(dist.prob))
    max_gap = 8
    edge = 0.0
    for direction in (1, -1):
        gap = 0
        i = peak
        while 0 <= i < len(dist.prob) and gap <= max_gap:
            if above[i]:
                gap = 0
                edge = max(edge, abs(float(dist.p[i])))
            else:
                gap += 1
            i += direction
    return (0.0, edge)


def _profile_points(
    dist: MomentumDistribution,
    window: tuple[float, float] | None,
    exclude_core: float,
) -> tuple[np.ndarray, np.ndarray, tuple[float, float]]:
    """Select |p|, log(prob) pairs for a profile fit.

    The default window is the contiguous region around the peak where
    prob > 1e-25; probabilities at or below the 1e-30 floor are always
    dropped so logs stay finite. A central core |p| < exclude_core is
    removed, where the profile's cusp (or the initial-state remnant)
    distorts log-linear fits.
    """
    p_abs = np.abs(dist.p)
    keep = dist.prob > PROBABILITY_FLOOR
    if window is None:
        window = _default_window(dist)
    keep &= _window_mask(p_abs, window)
    keep &= p_abs >= exclude_core
    if np.count_nonzero(keep) < 10:
        raise FitError(
            f"only {np.count_nonzero(keep)} usable points in window {window}; "
            "need at least 10"
        )
    return p_abs[keep], np.log(dist.prob[keep]), window


def _decay_slope(x: np.ndarray, logp: np.ndarray, kind: str) -> tuple[float, float]:
    slope, _, r2 = _linear_fit(x, logp)
    # a slope this small is flat data up to rounding, not an actual decay
    floor = 1e-12 * (np.abs(logp).max() + 1.0) / (x.max() - x.min())
    if slope >= -floor:
        raise FitError(f"{kind} fit failed: non-decaying slope {slope:.3e}")
    return slope, r2


def fit_exponential_profile(
    dist: MomentumDistribution,
    window: tuple[float, float] | None = None,
    exclude_core: float | None = None,
) -> ProfileFit:
    """Fit prob ~ exp(-|p|/xi); returns xi and the log-space r^2.

    exclude_core defaults to 2*hbar inferred from the momentum grid spacing.
    """
    if exclude_core is None:
        exclude_core = 2.0 * _grid_spacing(dist)
    x, logp, window = _profile_points(dist, window, exclude_core)
    slope, r2 = _decay_slope(x, logp, "exponential")
    return ProfileFit("exponential", -1.0 / slope, r2, window)


def fit_gaussian_profile(
    dist: MomentumDistribution,
    window: tuple[float, float] | None = None,
    exclude_core: float | None = None,
) -> ProfileFit:
    """Fit prob ~ exp(-p^2/sigma); returns sigma and the log-space r^2."""
    if exclude_core is None:
        exclude_core = 2.0 * _grid_spacing(dist)
    x, logp, window = _profile_points(dist, window, exclude_core)
    slope, r2 = _decay_slope(x**2, logp, "gaussian")
    return ProfileFit("gaussian", -1.0 / slope, r2, window)


def compare_profiles(
    dist: MomentumDistribution,
    window: tuple[float, float] | None = None,
) -> tuple[ProfileFit, ProfileFit, str]:
    """Fit both model classes on identical points; winner is the higher r^2."""
    exp_fit = fit_exponential_profile(dist, window)
    gauss_fit = fit_gaussian_profile(dist, exp_fit.fit_window)
    winner = "exponential" if exp_fit.r_squared >= gauss_fit.r_squared else "gaussian"
    return exp_fit, gauss_fit, winner


def _grid_spacing(dist: MomentumDistribution) -> float:
    if len(dist.p) < 2:
        raise FitError("distribution has fewer than 2 momentum sites")
    return float(dist.p[1] - dist.p[0])


def fit_norm_growth(
    series: OtocSeries,
    window: tuple[float, float] | None = None,
) -> NormGrowthFit:
    """Fit norm_log = mu*t + b over a kick-time window (default second half)."""
    if window is None:
        window = (float(series.t[-1]) / 2.0, float(series.t[-1])) if len(series) else (0.0, 0.0)
    mask = _window_mask(series.t.astype(float), window)
    if np.count_nonzero(mask) < 10:
        raise FitError(f"norm-growth window {window} holds fewer than 10 kicks")
    mu, intercept, r2 = _linear_fit(series.t[mask].astype(float), series.norm_log[mask])
    return NormGrowthFit(mu, intercept, window, r2)


def scrambling_rate(
    series: OtocSeries,
    window: tuple[float, float] | None = None,
) -> float:
    """Late-time slope D of c_approx versus t (default window: second half)."""
    if window is None:
        window = (float(series.t[-1]) / 2.0, float(series.t[-1])) if len(series) else (0.0, 0.0)
    mask = _window_mask(series.t.astype(float), window)
    if np.count_nonzero(mask) < 10:
        raise FitError(f"scrambling-rate window {window} holds fewer than 10 kicks")
    slope, _, _ = _linear_fit(series.t[mask].astype(float), series.c_approx[mask])
    return slope


def log_mean_norm(series: OtocSeries) -> float:
    """ln of the time-averaged true norm, computed in log space.

    Above threshold the norm reaches e.g. e^4000, so the mean must never be
    formed by exponentiating the raw log-norms.
    """
    logs = series.norm_log
    if len(logs) == 0:
        return 0.0
    peak = float(logs.max())
    return peak + float(np.log(np.mean(np.exp(logs - peak))))


@dataclass(frozen=True)
class NormScanRow:
    hbar: float
    lam: float
    fit: NormGrowthFit
    log_mean_norm: float


@dataclass
class NormScanResult:
    """Growth-rate fits and time-averaged norms over a (hbar, lambda) grid.

    lambda_c maps each hbar to the first scanned lambda whose time-averaged
    norm exceeds 1 + tolerance (None if none does).
    """

    rows: list[NormScanRow]
    lambda_c: dict[float, float | None]
    tolerance: float


def norm_scan(
    base_config: SimConfig,
    lambdas: Sequence[float],
    hbars: Sequence[float] | None = None,
    tolerance: float = 0.05,
) -> NormScanResult:
    """Per-(hbar, lambda) norm-growth fits plus a threshold estimate.

    lambdas are scanned in ascending order per hbar; the threshold estimate
    is the first value whose long-time mean norm exceeds 1 + tolerance.
    """
    if hbars is None:
        hbars = [base_config.lattice.hbar_eff]
    rows: list[NormScanRow] = []
    lambda_c: dict[float, float | None] = {}
    for hbar in hbars:
        lattice = replace(base_config.lattice, hbar_eff=float(hbar))
        crossing = None
        for lam in sorted(float(v) for v in lambdas):
            schedule = replace(base_config.schedule, lam=lam)
            config = replace(base_config, lattice=lattice, schedule=schedule)
            series = record_series(config).series
            fit = fit_norm_growth(series)
            lmn = log_mean_norm(series)
            rows.append(NormScanRow(float(hbar), lam, fit, lmn))
            if crossing is None and lmn > math.log1p(tolerance):
                crossing = lam
        lambda_c[float(hbar)] = crossing
    return NormScanResult(rows, lambda_c, tolerance)
