"""Particle anisotropy and orientation.

The integrated polarizability A = int_0^inf dxi diag(alpha_1, alpha_2, alpha_3)(i xi)
is written as gamma_iso * Pi(gamma_s, gamma_a) with

    Pi = I + gamma_s diag(-1, -1, 2) + gamma_a diag(-3, 3, 0),

and enters the energy rotated into the laboratory frame as R Pi R^T.
R is the active z-y-z Euler rotation R_z(phi) R_y(theta) R_z(psi); the particle
axis e3' is mapped to (sin theta cos phi, sin theta sin phi, cos theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateParticleError, DomainError, OrderingError

__all__ = [
    "Orientation",
    "GammaParams",
    "gamma_from_polarizability",
    "pi_matrix",
    "euler_rotation",
    "response_matrix",
    "CLASSICAL_GAMMAS",
]

_TWO_PI = 2.0 * math.pi


def _wrap(angle: float) -> float:
    angle = math.fmod(angle, _TWO_PI) % _TWO_PI
    return 0.0 if angle >= _TWO_PI else angle


@dataclass(frozen=True)
class Orientation:
    """Euler angles in radians, canonicalised to phi, psi in [0, 2pi), theta in [0, pi]."""

    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0

    def __post_init__(self):
        angles = (self.phi, self.theta, self.psi)
        if not all(math.isfinite(a) for a in angles):
            raise DomainError("Euler angles must be finite")
        phi, theta, psi = (float(a) for a in angles)
        theta = math.fmod(theta, _TWO_PI)
        if theta < 0.0:
            theta += _TWO_PI
        if theta > math.pi:
            # R_y(theta) = R_z(pi) R_y(2pi - theta) R_z(pi)
            theta = _TWO_PI - theta
            phi += math.pi
            psi += math.pi
        object.__setattr__(self, "phi", _wrap(phi))
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "psi", _wrap(psi))

    @classmethod
    def from_degrees(cls, phi: float = 0.0, theta: float = 0.0, psi: float = 0.0) -> "Orientation":
        return cls(math.radians(phi), math.radians(theta), math.radians(psi))


@dataclass(frozen=True)
class GammaParams:
    """Trace and anisotropy measures of the integrated polarizability.

    With ``strict=True`` (default) the physical domain
    0 <= gamma_s < 1, 0 <= gamma_a <= min(gamma_s, 1 - gamma_s) is enforced.
    ``strict=False`` lets exploratory sweeps leave it (and is how the permanent
    dipole limit gamma_s = 1 is represented).
    """

    gamma_iso: float = 1.0
    gamma_s: float = 0.0
    gamma_a: float = 0.0
    strict: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        values = (self.gamma_iso, self.gamma_s, self.gamma_a)
        if not all(math.isfinite(v) for v in values):
            raise DomainError("gamma parameters must be finite")
        if self.gamma_iso <= 0.0:
            raise DomainError(f"gamma_iso must be > 0, got {self.gamma_iso}")
        if not self.strict:
            return
        gs, ga = self.gamma_s, self.gamma_a
        if not 0.0 <= gs < 1.0:
            raise DomainError(f"gamma_s must satisfy 0 <= gamma_s < 1, got {gs}")
        # small slack so that values produced by gamma_from_polarizability pass
        if not -1e-15 <= ga <= min(gs, 1.0 - gs) + 1e-15:
            raise DomainError(
                f"gamma_a must satisfy 0 <= gamma_a <= min(gamma_s, 1 - gamma_s), got {ga}"
            )


# permanent-dipole counterpart: Pi(1, 0) = diag(0, 0, 3)
CLASSICAL_GAMMAS = GammaParams(1.0, 1.0, 0.0, strict=False)


def gamma_from_polarizability(a11: float, a22: float, a33: float) -> GammaParams:
    """Gamma parameters from the diagonal of A, given in ascending order."""
    a11, a22, a33 = float(a11), float(a22), float(a33)
    if not all(math.isfinite(v) for v in (a11, a22, a33)):
        raise DomainError("polarizabilities must be finite")
    if a11 < 0.0:
        raise DomainError("polarizabilities must be >= 0")
    if not a11 <= a22 <= a33:
        raise OrderingError(f"expected a11 <= a22 <= a33, got ({a11}, {a22}, {a33})")
    trace = a11 + a22 + a33
    if trace <= 0.0:
        raise DegenerateParticleError("integrated polarizability is identically zero")
    g_iso = trace / 3.0
    g_s = (a33 - 0.5 * (a22 + a11)) / (3.0 * g_iso)
    g_a = 0.5 * (a22 - a11) / (3.0 * g_iso)
    # a single non-zero axis gives gamma_s = 1, outside the strict domain
    return GammaParams(g_iso, g_s, g_a, strict=g_s < 1.0)


def pi_matrix(gammas: GammaParams) -> np.ndarray:
    gs, ga = gammas.gamma_s, gammas.gamma_a
    return np.diag([1.0 - gs - 3.0 * ga, 1.0 - gs + 3.0 * ga, 1.0 + 2.0 * gs])


def _rz(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ry(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def euler_rotation(o: Orientation) -> np.ndarray:
    """Active z-y-z rotation matrix R_z(phi) R_y(theta) R_z(psi)."""
    return _rz(o.phi) @ _ry(o.theta) @ _rz(o.psi)


def response_matrix(o: Orientation, gammas: GammaParams) -> np.ndarray:
    """Laboratory-frame response R Pi R^T (trace 3, symmetric)."""
    r = euler_rotation(o)
    m = r @ pi_matrix(gammas) @ r.T
    return 0.5 * (m + m.T)
