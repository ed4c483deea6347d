"""Harmonic trap configuration, collision momentum and validity diagnostics."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import LongRange

__all__ = [
    "TrapConfig",
    "ValidityReport",
    "relative_energy",
    "collision_momentum",
    "multipolar_radius",
    "validity_report",
]


@dataclass(frozen=True)
class TrapConfig:
    """Trap frequencies and the relative-motion oscillator quantum numbers."""

    omega_x: float = 1.0
    omega_y: float = 1.0
    omega_z: float = 1.0
    n_x: int = 0
    n_y: int = 0
    n_z: int = 0

    def __post_init__(self):
        for w in self.omegas:
            if not (w > 0 and math.isfinite(w)):
                raise ValueError(f"trap frequencies must be positive, got {self.omegas}")
        for n in self.quanta:
            if n < 0 or int(n) != n:
                raise ValueError(f"quantum numbers must be non-negative ints, got {self.quanta}")

    @property
    def omegas(self):
        return (self.omega_x, self.omega_y, self.omega_z)

    @property
    def quanta(self):
        return (self.n_x, self.n_y, self.n_z)

    @property
    def omega_bar(self):
        return sum(self.omegas) / 3.0

    def oscillator_lengths(self):
        """Single-particle lengths sqrt(hbar / (M omega_i))."""
        return tuple(1.0 / math.sqrt(w) for w in self.omegas)


def relative_energy(trap):
    return sum(w * (n + 0.5) for w, n in zip(trap.omegas, trap.quanta))


def collision_momentum(trap):
    """k_c from hbar^2 k_c^2 / (2 mu) = E_r with mu = M/2, i.e. k_c = sqrt(E_r)."""
    return math.sqrt(relative_energy(trap))


def multipolar_radius(C, s):
    """(M |C| / hbar^2)^(1/(s-2)) for a C / r^s tail."""
    if not s > 2:
        raise LongRange(f"1/r^{s} tail with s <= 2 has no finite multipolar radius")
    return abs(C) ** (1.0 / (s - 2.0))


@dataclass(frozen=True)
class ValidityReport:
    oscillator_lengths: tuple
    radius: float
    ratio: float
    verdict: str
    thresholds: tuple = field(default=(0.1, 1.0))

    def to_text(self):
        lx, ly, lz = self.oscillator_lengths
        return "\n".join([
            f"L_x = {lx!r}",
            f"L_y = {ly!r}",
            f"L_z = {lz!r}",
            f"R_bar = {self.radius!r}",
            f"ratio = {self.ratio!r}",
            f"verdict = {self.verdict}",
        ]) + "\n"

    def to_record(self):
        return {
            "oscillator_lengths": list(self.oscillator_lengths),
            "radius": self.radius,
            "ratio": self.ratio,
            "verdict": self.verdict,
            "thresholds": list(self.thresholds),
        }


def _tail_fit(V):
    r = np.asarray(V.r[-3:])
    v = np.abs(np.asarray(V.values[-3:]))
    if np.any(v == 0):
        raise LongRange("cannot fit a power-law tail through zero table values")
    slope, intercept = np.polyfit(np.log(r), np.log(v), 1)
    return math.exp(intercept), -slope


def validity_report(trap, V, ok_below=0.1, invalid_at=1.0):
    """Compare the multipolar radius of ``V`` with the smallest oscillator length."""
    if V.is_tabulated:
        C, s = _tail_fit(V)
    else:
        C, s = V.coefficient, V.exponent
    radius = multipolar_radius(C, s)
    lengths = trap.oscillator_lengths()
    ratio = radius / min(lengths)
    if ratio < ok_below:
        verdict = "ok"
    elif ratio < invalid_at:
        verdict = "marginal"
    else:
        verdict = "invalid"
    return ValidityReport(lengths, radius, ratio, verdict, (ok_below, invalid_at))
