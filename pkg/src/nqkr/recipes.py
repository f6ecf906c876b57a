"""Canned runs that regenerate the headline data sets with pinned parameters.

Every recipe writes plain CSV data plus a small matplotlib script (data and
script, never rendered images) and returns a list of threshold checks with
pass/fail verdicts. Physical defaults: eta=0.75, epsilon=1e-5, hbar=2.89,
kick divisor 1, lattice 4096.

The diffusion-law fits use the early window t in [1, 75]: that window lies
inside the normal-diffusion epoch for every K scanned here, whereas by the
second half of a 1000-kick run the smaller K have already dynamically
localized and their late-time slope measures saturation instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .constants import (
    EPSILON_DEFAULT,
    HBAR_DEFAULT,
    LATTICE_DEFAULT,
    SPECTRUM_DIM_DEFAULT,
)
from .fileio import (
    write_distribution_csv,
    write_fidelity_json,
    write_json,
    write_series_csv,
    write_spectrum_csv,
)
from .lattice import MomentumLattice, WaveFunction, momentum_distribution
from .observables import (
    compare_profiles,
    fit_exponential_profile,
    fit_norm_growth,
    norm_scan,
    record_series,
    scrambling_rate,
)
from .propagator import KickSchedule, SimConfig
from .spectrum import fidelity_profile, spectrum_at

DIFFUSION_WINDOW = (1.0, 75.0)
QUASIENERGY_TARGET = 2.454
XI_TARGET_OVERLAP = 3.4

FIGURE_IDS = (
    "fig1a", "fig1b", "fig1d", "fig2a", "fig2b",
    "fig3a", "fig3c", "fig4a", "fig4b",
)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def base_config(
    K: float,
    lam: float,
    kicks: int,
    eta: float = 0.75,
    hbar: float = HBAR_DEFAULT,
    lattice_size: int = LATTICE_DEFAULT,
    epsilon: float = EPSILON_DEFAULT,
    divisor: float = 1.0,
) -> SimConfig:
    return SimConfig(
        lattice=MomentumLattice(lattice_size, hbar),
        schedule=KickSchedule(K=K, lam=lam, eta=eta),
        kick_count=kicks,
        kick_phase_divisor=divisor,
        epsilon_shift=epsilon,
    )


def _within(value: float, target: float, rel: float) -> bool:
    return abs(value - target) <= rel * abs(target)


def _doubling_ratio(series) -> float:
    t = series.t.astype(float)
    t_max = t[-1]
    early = series.c_exact[(t >= t_max / 4) & (t <= t_max / 2)].mean()
    late = series.c_exact[t >= 3 * t_max / 4].mean()
    return float(late / max(early, 1e-300))


def _emit_plot_script(path: Path, body: str) -> None:
    script = (
        "#!/usr/bin/env python3\n"
        '"""Generated plotting script; run next to the data files."""\n'
        "import numpy as np\n"
        "import matplotlib.pyplot as plt\n\n"
        + body
        + "\nplt.tight_layout()\nplt.savefig(__file__.replace('.py', '.png'), dpi=200)\n"
    )
    path.write_text(script, encoding="utf-8")


def recipe_fig1a(outdir: Path) -> list[Check]:
    """OTOC growth curves across kick strengths in the Hermitian case."""
    checks = []
    theory = {}
    series_by_k = {}
    for K in (1, 4, 5, 7, 10):
        cfg = base_config(K, 0.0, 1000)
        series_by_k[K] = record_series(cfg).series
        write_series_csv(outdir / f"otoc_K{K}.csv", series_by_k[K])
        theory[K] = (cfg.epsilon_shift * K) ** 2 / 2.0
    d10 = scrambling_rate(series_by_k[10], DIFFUSION_WINDOW)
    checks.append(
        Check(
            "K=10 scrambling rate within 30% of (eps*K)^2/2",
            _within(d10, theory[10], 0.30),
            f"D={d10:.3e}, theory={theory[10]:.3e}",
        )
    )
    _emit_plot_script(
        outdir / "plot_fig1a.py",
        "for K in (1, 4, 5, 7, 10):\n"
        "    d = np.loadtxt(f'otoc_K{K}.csv', delimiter=',', skiprows=1)\n"
        "    plt.plot(d[:, 0], d[:, 1], label=f'K={K}')\n"
        "t = np.arange(1, 1001)\n"
        "plt.plot(t, (1e-5 * 10)**2 * t / 2, 'r--', label='(eps K)^2 t / 2')\n"
        "plt.xlabel('t'); plt.ylabel('C(t)'); plt.legend(); plt.loglog()\n",
    )
    return checks


def recipe_fig1b(outdir: Path) -> list[Check]:
    """Momentum profiles at t=1000: localized (K=4) vs diffusive (K=10)."""
    checks = []
    for K, expect in ((4, "exponential"), (10, "gaussian")):
        record = record_series(base_config(K, 0.0, 1000), snapshot_times=(1000,))
        dist = record.snapshots[1000]
        write_distribution_csv(outdir / f"profile_K{K}_t1000.csv", dist)
        exp_fit, gauss_fit, winner = compare_profiles(dist)
        checks.append(
            Check(
                f"K={K} profile best fit is {expect}",
                winner == expect,
                f"r2_exp={exp_fit.r_squared:.4f}, r2_gauss={gauss_fit.r_squared:.4f}",
            )
        )
    _emit_plot_script(
        outdir / "plot_fig1b.py",
        "for K in (4, 10):\n"
        "    d = np.loadtxt(f'profile_K{K}_t1000.csv', delimiter=',', skiprows=1)\n"
        "    plt.semilogy(d[:, 0], d[:, 1], '.', ms=2, label=f'K={K}')\n"
        "plt.xlabel('p'); plt.ylabel('|psi(p)|^2'); plt.legend()\n",
    )
    return checks


def recipe_fig1d(outdir: Path) -> list[Check]:
    """Scrambling rate versus kick strength against the (eps*K)^2/2 law."""
    checks = []
    rows = []
    for K in (5, 6, 7, 8, 9, 10):
        series = record_series(base_config(K, 0.0, 1000)).series
        d = scrambling_rate(series, DIFFUSION_WINDOW)
        theory = (EPSILON_DEFAULT * K) ** 2 / 2.0
        rows.append((K, d, theory))
        checks.append(
            Check(
                f"D(K={K}) within 30% of theory",
                _within(d, theory, 0.30),
                f"D={d:.3e}, theory={theory:.3e}, ratio={d / theory:.3f}",
            )
        )
    with open(outdir / "d_vs_k.csv", "w", encoding="utf-8") as fh:
        fh.write("K,D,theory\n")
        for K, d, theory in rows:
            fh.write(f"{K:.15g},{d:.15g},{theory:.15g}\n")
    _emit_plot_script(
        outdir / "plot_fig1d.py",
        "d = np.loadtxt('d_vs_k.csv', delimiter=',', skiprows=1)\n"
        "plt.plot(d[:, 0], d[:, 1], 'o', label='fitted D')\n"
        "plt.plot(d[:, 0], d[:, 2], '-', label='(eps K)^2 / 2')\n"
        "plt.xlabel('K'); plt.ylabel('D'); plt.legend()\n",
    )
    return checks


def recipe_fig2a(outdir: Path) -> list[Check]:
    """OTOC curves versus non-Hermiticity: growth shuts down at large lambda."""
    checks = []
    ratios = {}
    for lam in (0.0, 1.5, 2.0, 5.0):
        series = record_series(base_config(10, lam, 1000)).series
        write_series_csv(outdir / f"otoc_lam{lam:g}.csv", series)
        ratios[lam] = _doubling_ratio(series)
    checks.append(
        Check(
            "lambda=0 series keeps growing (doubling ratio > 1.8)",
            ratios[0.0] > 1.8,
            f"R={ratios[0.0]:.3f}",
        )
    )
    checks.append(
        Check(
            "lambda=5 series saturates (doubling ratio < 1.2)",
            ratios[5.0] < 1.2,
            f"R={ratios[5.0]:.3f}",
        )
    )
    _emit_plot_script(
        outdir / "plot_fig2a.py",
        "for lam in (0, 1.5, 2, 5):\n"
        "    d = np.loadtxt(f'otoc_lam{lam:g}.csv', delimiter=',', skiprows=1)\n"
        "    plt.plot(d[:, 0], d[:, 1], label=f'lambda={lam}')\n"
        "plt.xlabel('t'); plt.ylabel('C(t)'); plt.legend(); plt.loglog()\n",
    )
    return checks


def recipe_fig2b(outdir: Path) -> list[Check]:
    """Exponential localization lengths in the frozen phase."""
    checks = []
    for lam, target in ((2.0, 14.0), (5.0, 4.5)):
        record = record_series(base_config(10, lam, 1000), snapshot_times=(1000,))
        dist = record.snapshots[1000]
        write_distribution_csv(outdir / f"profile_lam{lam:g}_t1000.csv", dist)
        fit = fit_exponential_profile(dist)
        checks.append(
            Check(
                f"xi(lambda={lam:g}) within 30% of {target}",
                _within(fit.xi_or_sigma, target, 0.30),
                f"xi={fit.xi_or_sigma:.2f}, r2={fit.r_squared:.4f}",
            )
        )
    _emit_plot_script(
        outdir / "plot_fig2b.py",
        "for lam in (2, 5):\n"
        "    d = np.loadtxt(f'profile_lam{lam:g}_t1000.csv', delimiter=',', skiprows=1)\n"
        "    plt.semilogy(d[:, 0], d[:, 1], '.', ms=2, label=f'lambda={lam}')\n"
        "plt.xlabel('p'); plt.ylabel('|psi(p)|^2'); plt.legend()\n",
    )
    return checks


def recipe_fig3a(outdir: Path) -> list[Check]:
    """Norm growth versus time for a ladder of lambda values.

    The flatness check below 0.5 is reported for completeness; the kick
    operator's angular gain profile makes the norm grow (slowly) at any
    nonzero lambda, so expect it to read FAIL while the monotonicity and
    linearity of the growing branch hold.
    """
    checks = []
    mus = {}
    for lam in (0.0, 0.3, 0.5, 1.0, 1.5, 2.0):
        series = record_series(base_config(10, lam, 1000)).series
        write_series_csv(outdir / f"norm_lam{lam:g}.csv", series)
        mus[lam] = fit_norm_growth(series).mu
    with open(outdir / "mu_vs_lambda.csv", "w", encoding="utf-8") as fh:
        fh.write("lambda,mu\n")
        for lam, mu in sorted(mus.items()):
            fh.write(f"{lam:.15g},{mu:.15g}\n")
    checks.append(
        Check(
            "mu < 1e-4 for lambda <= 0.5",
            all(mus[lam] < 1e-4 for lam in (0.0, 0.3, 0.5)),
            f"mu(0)={mus[0.0]:.2e}, mu(0.3)={mus[0.3]:.2e}, mu(0.5)={mus[0.5]:.2e}",
        )
    )
    growing = [mus[lam] for lam in (1.0, 1.5, 2.0)]
    checks.append(
        Check(
            "mu strictly increasing over lambda in {1, 1.5, 2}",
            growing[0] < growing[1] < growing[2],
            f"mu={growing}",
        )
    )
    lam_arr = np.array([1.0, 1.5, 2.0])
    mu_arr = np.array(growing)
    design = np.column_stack([lam_arr, np.ones(3)])
    coef, *_ = np.linalg.lstsq(design, mu_arr, rcond=None)
    resid = mu_arr - design @ coef
    r2 = 1.0 - float(np.sum(resid**2) / np.sum((mu_arr - mu_arr.mean()) ** 2))
    checks.append(
        Check("mu vs lambda linear on the growing branch (r^2 > 0.9)",
              r2 > 0.9, f"r2={r2:.4f}")
    )
    _emit_plot_script(
        outdir / "plot_fig3a.py",
        "for lam in (0, 0.3, 0.5, 1, 1.5, 2):\n"
        "    d = np.loadtxt(f'norm_lam{lam:g}.csv', delimiter=',', skiprows=1)\n"
        "    plt.semilogy(d[:, 0], np.exp(d[:, 3]), label=f'lambda={lam}')\n"
        "plt.xlabel('t'); plt.ylabel('N(t)'); plt.legend()\n",
    )
    return checks


def recipe_fig3c(outdir: Path) -> list[Check]:
    """Threshold estimate lambda_c versus hbar via the mean-norm criterion."""
    hbars = (0.5, 1.5, 2.89)
    lambdas = np.linspace(0.0, 0.15, 16)
    result = norm_scan(base_config(10, 0.0, 500), lambdas, hbars)
    with open(outdir / "nbar_vs_lambda.csv", "w", encoding="utf-8") as fh:
        fh.write("hbar,lambda,mu,log_mean_norm\n")
        for row in result.rows:
            fh.write(
                f"{row.hbar:.15g},{row.lam:.15g},{row.fit.mu:.15g},"
                f"{row.log_mean_norm:.15g}\n"
            )
    write_json(
        outdir / "lambda_c.json",
        {"tolerance": result.tolerance,
         "lambda_c": {str(h): result.lambda_c[h] for h in hbars}},
    )
    lc = [result.lambda_c[h] for h in hbars]
    ordered = all(a is not None for a in lc) and lc[0] < lc[2] and lc[0] <= lc[1] <= lc[2]
    checks = [
        Check(
            "lambda_c non-decreasing in hbar (strict between 0.5 and 2.89)",
            ordered,
            f"lambda_c(0.5)={lc[0]}, lambda_c(1.5)={lc[1]}, lambda_c(2.89)={lc[2]}",
        )
    ]
    _emit_plot_script(
        outdir / "plot_fig3c.py",
        "d = np.loadtxt('nbar_vs_lambda.csv', delimiter=',', skiprows=1)\n"
        "for h in (0.5, 1.5, 2.89):\n"
        "    sel = d[:, 0] == h\n"
        "    plt.semilogy(d[sel, 1], np.exp(d[sel, 3]), 'o-', label=f'hbar={h}')\n"
        "plt.axhline(1.05, color='k', ls=':')\n"
        "plt.xlabel('lambda'); plt.ylabel('mean N'); plt.legend()\n",
    )
    return checks


def _fidelity_run(outdir: Path) -> tuple[list[Check], WaveFunction]:
    """Shared fig4 computation: evolve 200 kicks, diagonalize U(200)."""
    cfg = base_config(10, 5.0, 200, lattice_size=SPECTRUM_DIM_DEFAULT)
    record = record_series(cfg)
    spec = spectrum_at(cfg, 200, SPECTRUM_DIM_DEFAULT)
    write_spectrum_csv(outdir / "spectrum_t200.csv", spec)
    fid = fidelity_profile(record.final, spec)
    write_fidelity_json(outdir / "fidelity_t200.json", fid)
    top_valid = spec.top_valid_index()
    best_eps, best_f = fid.best
    checks = [
        Check("best fidelity exceeds 0.99", best_f > 0.99, f"F={best_f:.5f}"),
        Check(
            "best-fidelity state lies in the top tail-safe quasienergy multiplet",
            best_eps >= spec.eps_i[top_valid] - 1e-3,
            f"eps_i(best)={best_eps:.6f}, max valid eps_i={spec.eps_i[top_valid]:.6f}, "
            f"literal max eps_i={spec.eps_i.max():.6f} "
            f"(tail weight {spec.tail_weights[np.argmax(spec.eps_i)]:.2e})",
        ),
        Check(
            f"top tail-safe eps_i within 10% of {QUASIENERGY_TARGET}",
            _within(float(spec.eps_i[top_valid]), QUASIENERGY_TARGET, 0.10),
            f"eps_i={spec.eps_i[top_valid]:.6f}",
        ),
    ]
    evolved = record.final
    best_state = spec.state(fid.best_index)
    write_distribution_csv(
        outdir / "state_t200.csv", momentum_distribution(evolved)
    )
    write_distribution_csv(
        outdir / "eigenstate_t200.csv", momentum_distribution(best_state)
    )
    xi_state = fit_exponential_profile(momentum_distribution(evolved)).xi_or_sigma
    xi_eig = fit_exponential_profile(momentum_distribution(best_state)).xi_or_sigma
    checks.append(
        Check(
            "evolved and quasi-eigenstate localization lengths agree within 20%",
            abs(xi_state - xi_eig) <= 0.20 * max(xi_state, xi_eig),
            f"xi_state={xi_state:.3f}, xi_eig={xi_eig:.3f}",
        )
    )
    checks.append(
        Check(
            f"both localization lengths within 30% of {XI_TARGET_OVERLAP}",
            _within(xi_state, XI_TARGET_OVERLAP, 0.30)
            and _within(xi_eig, XI_TARGET_OVERLAP, 0.30),
            f"xi_state={xi_state:.3f}, xi_eig={xi_eig:.3f}",
        )
    )
    return checks, evolved


def recipe_fig4a(outdir: Path) -> list[Check]:
    """Fidelity against every quasi-eigenstate at t=200, K=10, lambda=5."""
    checks, _ = _fidelity_run(outdir)
    _emit_plot_script(
        outdir / "plot_fig4a.py",
        "import json\n"
        "rec = json.load(open('fidelity_t200.json'))\n"
        "eps = [o['eps_i'] for o in rec['overlaps']]\n"
        "f = [o['fidelity'] for o in rec['overlaps']]\n"
        "plt.plot(eps, f, '.', ms=3)\n"
        "plt.xlabel('eps_i'); plt.ylabel('F')\n",
    )
    return checks[:3]


def recipe_fig4b(outdir: Path) -> list[Check]:
    """Profile overlap of the evolved state and the best quasi-eigenstate."""
    checks, _ = _fidelity_run(outdir)
    _emit_plot_script(
        outdir / "plot_fig4b.py",
        "for name in ('state_t200', 'eigenstate_t200'):\n"
        "    d = np.loadtxt(f'{name}.csv', delimiter=',', skiprows=1)\n"
        "    plt.semilogy(d[:, 0], d[:, 1], '.', ms=2, label=name)\n"
        "plt.xlabel('p'); plt.ylabel('prob'); plt.legend()\n",
    )
    return checks[3:]


RECIPES: dict[str, Callable[[Path], list[Check]]] = {
    "fig1a": recipe_fig1a,
    "fig1b": recipe_fig1b,
    "fig1d": recipe_fig1d,
    "fig2a": recipe_fig2a,
    "fig2b": recipe_fig2b,
    "fig3a": recipe_fig3a,
    "fig3c": recipe_fig3c,
    "fig4a": recipe_fig4a,
    "fig4b": recipe_fig4b,
}


def run_recipe(figure_id: str, outdir: Path) -> list[Check]:
    if figure_id not in RECIPES:
        raise KeyError(figure_id)
    return RECIPES[figure_id](outdir)
