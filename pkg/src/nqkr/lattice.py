"""Momentum-lattice state representation and basic expectation values.

Amplitudes are stored in increasing momentum-index order n = -M/2 .. M/2-1,
with site momentum p_n = n*hbar. Any FFT-layout reshuffling is the
propagator's business; nothing in this module depends on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Below this total probability the state is numerically gone.
NORM_COLLAPSE_FLOOR = 1e-300


class NormCollapseError(ArithmeticError):
    """State norm fell below double-precision viability."""


@dataclass(frozen=True)
class MomentumLattice:
    """Truncated momentum lattice with M sites and effective Planck constant."""

    size: int
    hbar_eff: float

    def __post_init__(self):
        if self.size < 2 or self.size % 2 != 0:
            raise ValueError(f"lattice size must be even and >= 2, got {self.size}")
        if not self.hbar_eff > 0:
            raise ValueError(f"hbar_eff must be positive, got {self.hbar_eff}")

    @property
    def indices(self) -> np.ndarray:
        """Momentum indices n = -M/2 .. M/2-1 in storage order."""
        return np.arange(-self.size // 2, self.size // 2)

    @property
    def momenta(self) -> np.ndarray:
        """Site momenta p_n = n*hbar in storage order."""
        return self.indices * self.hbar_eff


@dataclass
class WaveFunction:
    """Complex amplitudes over a momentum lattice plus an accumulated log-norm.

    The true squared norm is exp(log_norm) * sum(|amps|^2); after each
    renormalization step in the propagator the stored amplitudes are unit
    norm and all growth lives in log_norm. This keeps non-Hermitian runs,
    whose norm grows like e^(mu*t), inside double range indefinitely.
    """

    lattice: MomentumLattice
    amps: np.ndarray
    log_norm: float = 0.0

    def __post_init__(self):
        self.amps = np.asarray(self.amps, dtype=np.complex128)
        if self.amps.shape != (self.lattice.size,):
            raise ValueError(
                f"amps must have shape ({self.lattice.size},), got {self.amps.shape}"
            )

    def stored_norm_sq(self) -> float:
        """Sum of |amps|^2 (without the log_norm factor)."""
        return float(np.vdot(self.amps, self.amps).real)

    def true_log_norm_sq(self) -> float:
        """Natural log of the true squared norm exp(log_norm)*sum|amps|^2."""
        s = self.stored_norm_sq()
        _check_norm(s)
        return self.log_norm + float(np.log(s))

    def copy(self) -> "WaveFunction":
        return WaveFunction(self.lattice, self.amps.copy(), self.log_norm)


class MomentumDistribution(NamedTuple):
    """Normalized momentum-space probabilities paired with their momenta."""

    p: np.ndarray
    prob: np.ndarray


def _check_norm(norm_sq: float) -> float:
    if not norm_sq > NORM_COLLAPSE_FLOOR:
        raise NormCollapseError(
            f"state norm collapsed (sum|amps|^2 = {norm_sq:.3e}); "
            "the simulation is no longer numerically meaningful"
        )
    return norm_sq


def ground_state(lattice: MomentumLattice) -> WaveFunction:
    """Zero-momentum eigenstate: amplitude 1 at n=0, the flat state in angle."""
    amps = np.zeros(lattice.size, dtype=np.complex128)
    amps[lattice.size // 2] = 1.0
    return WaveFunction(lattice, amps, 0.0)


def expectation_p(psi: WaveFunction) -> float:
    """Normalized <p>; insensitive to log_norm and any global rescaling."""
    prob = np.abs(psi.amps) ** 2
    s = _check_norm(float(prob.sum()))
    return float(np.dot(psi.lattice.momenta, prob) / s)


def expectation_p2(psi: WaveFunction) -> float:
    """Normalized <p^2>."""
    prob = np.abs(psi.amps) ** 2
    s = _check_norm(float(prob.sum()))
    return float(np.dot(psi.lattice.momenta**2, prob) / s)


def momentum_distribution(psi: WaveFunction) -> MomentumDistribution:
    """Normalized |psi_n|^2 paired with p_n, ready for fitting or file output."""
    prob = np.abs(psi.amps) ** 2
    s = _check_norm(float(prob.sum()))
    return MomentumDistribution(psi.lattice.momenta.copy(), prob / s)
