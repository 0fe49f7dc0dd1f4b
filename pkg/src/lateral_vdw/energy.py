"""First-order corrugation energy in units of its natural scale.

The quantum (fluctuation-induced) correction is U / U_scale = -Tr(K M) with
M = R Pi R^T and U_scale = hbar gamma_iso a / (64 pi^2 eps0 z0^4).
A permanent dipole gives the same form with Pi(1, 0) and
U_scale = a p^2 / (192 pi eps0 z0^4).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .response import CLASSICAL_GAMMAS, Orientation, response_matrix

__all__ = [
    "PhysicalSetup",
    "energy_ratio",
    "energy_ratio_pfa",
    "classical_ratio",
    "energy_scale",
    "dimensional_energy",
    "MODES",
]

MODES = ("quantum", "classical")


@dataclass(frozen=True)
class PhysicalSetup:
    """Dimensional constants, SI units. Only the fields a mode needs must be positive."""

    z0: float
    amplitude_a: float
    hbar: float = 1.0
    epsilon0: float = 1.0
    gamma_iso: float = 1.0
    dipole_p: float = 1.0
    mass: float = 1.0
    omega_trap: float = 1.0

    def __post_init__(self):
        for name in ("z0", "hbar", "epsilon0", "gamma_iso", "dipole_p", "mass", "omega_trap"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be finite and > 0, got {value}")
        if not (math.isfinite(self.amplitude_a) and self.amplitude_a >= 0.0):
            raise DomainError(f"amplitude_a must be finite and >= 0, got {self.amplitude_a}")
        if self.amplitude_a > 0.2 * self.z0:
            warnings.warn(
                f"a/z0 = {self.amplitude_a / self.z0:.3g} exceeds 0.2; first-order theory assumes a << z0",
                RuntimeWarning,
                stacklevel=2,
            )


def energy_ratio(k: np.ndarray, m: np.ndarray) -> float:
    """-Tr(K M)."""
    return -float(np.trace(np.asarray(k) @ np.asarray(m)))


def energy_ratio_pfa(h_over_a, m: np.ndarray):
    """Proximity-force limit -3 (h/a) Tr(diag(1, 1, 2) M) = -3 (h/a) (3 + M_zz)."""
    m = np.asarray(m)
    weight = float(m[0, 0] + m[1, 1] + 2.0 * m[2, 2])
    out = -3.0 * np.asarray(h_over_a, dtype=float) * weight
    return float(out) if out.ndim == 0 else out


def classical_ratio(k: np.ndarray, o: Orientation) -> float:
    """Permanent-dipole ratio; identical to :func:`energy_ratio` with gamma_s = 1, gamma_a = 0."""
    return energy_ratio(k, response_matrix(o, CLASSICAL_GAMMAS))


def energy_scale(s: PhysicalSetup, mode: str = "quantum") -> float:
    """U_scale(z0) in joules for the given mode."""
    if s.amplitude_a <= 0.0:
        raise DomainError("amplitude_a must be > 0 to form an energy scale")
    if mode == "quantum":
        return s.hbar * s.gamma_iso * s.amplitude_a / (64.0 * math.pi ** 2 * s.epsilon0 * s.z0 ** 4)
    if mode == "classical":
        return s.amplitude_a * s.dipole_p ** 2 / (192.0 * math.pi * s.epsilon0 * s.z0 ** 4)
    raise DomainError(f"mode must be one of {MODES}, got {mode!r}")


def dimensional_energy(ratio: float, s: PhysicalSetup, mode: str = "quantum") -> float:
    """Convert a dimensionless ratio to joules."""
    return float(ratio) * energy_scale(s, mode)
