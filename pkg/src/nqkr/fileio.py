"""CSV/JSON serialization for all result types.

All CSVs are UTF-8, comma-separated with a header row and 15-significant-digit
floats, so files parse back to within one unit in the last printed digit.
"""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .lattice import MomentumDistribution
from .observables import NormGrowthFit, OtocSeries, ProfileFit
from .phases import PhaseDiagram
from .spectrum import FidelityRecord, QuasiSpectrum


def _fmt(x: float) -> str:
    return f"{x:.15g}"


def _write_table(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    rows = len(columns[0]) if columns else 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(rows):
            fh.write(",".join(_fmt(float(col[i])) for col in columns) + "\n")


def write_distribution_csv(path: str | Path, dist: MomentumDistribution) -> None:
    _write_table(Path(path), ["p", "prob"], [dist.p, dist.prob])


def read_distribution_csv(path: str | Path) -> MomentumDistribution:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return MomentumDistribution(data[:, 0], data[:, 1])


def write_series_csv(path: str | Path, series: OtocSeries) -> None:
    _write_table(
        Path(path),
        ["t", "c_exact", "c_approx", "log_norm", "mean_p", "mean_p2"],
        [series.t, series.c_exact, series.c_approx, series.norm_log,
         series.mean_p, series.mean_p2],
    )


def read_series_csv(path: str | Path) -> OtocSeries:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        data = data.reshape(0, 6)
    return OtocSeries(
        data[:, 0].astype(np.int64), data[:, 1], data[:, 2], data[:, 3],
        data[:, 4], data[:, 5],
    )


def write_spectrum_csv(path: str | Path, spec: QuasiSpectrum) -> None:
    _write_table(
        Path(path),
        ["eps_r", "eps_i", "residual"],
        [spec.eps_r, spec.eps_i, spec.residuals],
    )


def write_fidelity_json(path: str | Path, record: FidelityRecord) -> None:
    best_eps, best_f = record.best
    payload = {
        "t": record.t,
        "best_index": record.best_index,
        "best": {"eps_i": best_eps, "fidelity": best_f},
        "overlaps": [
            {"eps_i": float(e), "fidelity": float(f)}
            for e, f in zip(record.eps_i, record.fidelity)
        ],
    }
    write_json(path, payload)


def profile_fit_dict(fit: ProfileFit) -> dict:
    return asdict(fit)


def norm_growth_fit_dict(fit: NormGrowthFit) -> dict:
    return asdict(fit)


def write_diagram_csv(path: str | Path, diagram: PhaseDiagram) -> None:
    a1 = np.repeat(diagram.axis1.values, len(diagram.axis2.values))
    a2 = np.tile(diagram.axis2.values, len(diagram.axis1.values))
    rho = np.array([pt.rho for row in diagram.points for pt in row])
    _write_table(Path(path), ["axis1", "axis2", "rho"], [a1, a2, rho])


def write_diagram_json(path: str | Path, diagram: PhaseDiagram) -> None:
    payload = {
        "axis1": {"name": diagram.axis1.name,
                  "values": [float(v) for v in diagram.axis1.values]},
        "axis2": {"name": diagram.axis2.name,
                  "values": [float(v) for v in diagram.axis2.values]},
        "points": [
            [
                {
                    "params": list(pt.params),
                    "rho": pt.rho,
                    "features": {
                        "late_slope_normalized": pt.features.late_slope_normalized,
                        "doubling_ratio": pt.features.doubling_ratio,
                        "saturation_r2": pt.features.saturation_r2,
                    },
                }
                for pt in row
            ]
            for row in diagram.points
        ],
        "boundary": [
            {"axis2": v2, "axis1_crossing": crossing}
            for v2, crossing in diagram.boundary
        ],
    }
    write_json(path, payload)


def write_diagram_gnuplot(path: str | Path, diagram: PhaseDiagram) -> None:
    """gnuplot nonuniform-matrix format: `plot ... matrix nonuniform`."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        header = [str(len(diagram.axis2.values))] + [
            _fmt(float(v)) for v in diagram.axis2.values
        ]
        fh.write(" ".join(header) + "\n")
        for i, v1 in enumerate(diagram.axis1.values):
            row = [_fmt(float(v1))] + [
                _fmt(diagram.points[i][j].rho)
                for j in range(len(diagram.axis2.values))
            ]
            fh.write(" ".join(row) + "\n")


def write_json(path: str | Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")


def read_json(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
