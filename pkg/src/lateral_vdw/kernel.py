"""Dimensionless Bessel kernel J_ij(u) weighting the corrugation spectrum.

For a planar wavevector u = z0 q with modulus s = |u|,

    J_kl = delta_kl (3/8) s^3 K_3(s) - (3/8) u_k u_l s^2 K_2(s)        (k, l in x, y)
    J_zz = (2 + 3 s^2/8) s^2 K_2(s) + (1/4) s^3 K_3(s)
    J_kz = i u_k s^2 K_2(s) - (3i/8) u_k s^3 K_3(s)

The in-plane block and J_zz are real and even in u; J_xz, J_yz are purely
imaginary and odd, so J(-u) = conj(J(u)).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DomainError
from .special import bessel_k01

__all__ = ["PlanarVector", "radial_products", "j_matrix", "j_parts", "j_entries_1d", "SMALL_U"]

# below this modulus the analytic limit diag(3, 3, 6) is used
SMALL_U = 1e-6


class PlanarVector(NamedTuple):
    u_x: float
    u_y: float


def radial_products(s):
    """Return ``(s^3 K_3(s), s^2 K_2(s))`` for ``s >= 0``.

    Built from K_0, K_1 so that no negative powers of ``s`` appear:
    s^2 K_2 = s^2 K_0 + 2 s K_1 and s^3 K_3 = s^3 K_1 + 4 s^2 K_2.
    Entries with ``s < SMALL_U`` take the limits 8 and 2.
    """
    s = np.asarray(s, dtype=float)
    a = np.full(s.shape, 8.0)
    b = np.full(s.shape, 2.0)
    big = s >= SMALL_U
    if np.any(big):
        sb = s[big]
        k0, k1 = bessel_k01(sb)
        b_big = sb * sb * k0 + 2.0 * sb * k1
        a[big] = sb ** 3 * k1 + 4.0 * b_big
        b[big] = b_big
    return a, b


def _check_vector(u) -> tuple[float, float]:
    ux, uy = (float(c) for c in u)
    if not (np.isfinite(ux) and np.isfinite(uy)):
        raise DomainError("planar vector must be finite")
    return ux, uy


def j_parts(u) -> tuple[np.ndarray, np.ndarray]:
    """Split J(u) = E + i O into real 3x3 matrices.

    ``E`` holds the even real entries (xx, yy, zz, xy); ``O`` holds the odd
    entries (xz, yz) divided by i. Both are symmetric.
    """
    ux, uy = _check_vector(u)
    s = float(np.hypot(ux, uy))
    a, b = (float(v) for v in radial_products(s))
    even = np.zeros((3, 3))
    odd = np.zeros((3, 3))
    even[0, 0] = 0.375 * a - 0.375 * ux * ux * b
    even[1, 1] = 0.375 * a - 0.375 * uy * uy * b
    even[0, 1] = even[1, 0] = -0.375 * ux * uy * b
    even[2, 2] = (2.0 + 0.375 * s * s) * b + 0.25 * a
    g = b - 0.375 * a
    odd[0, 2] = odd[2, 0] = ux * g
    odd[1, 2] = odd[2, 1] = uy * g
    return even, odd


def j_matrix(u) -> np.ndarray:
    """Complex 3x3 kernel J(u) for a planar vector ``u = (u_x, u_y)``."""
    even, odd = j_parts(u)
    return even + 1j * odd


def j_entries_1d(u):
    """Kernel entries on the line u = (u, 0), vectorised over ``u``.

    Returns ``(J_xx, J_yy, J_zz, J_xz / i)`` as real arrays; J_xy = J_yz = 0 there.
    """
    u = np.asarray(u, dtype=float)
    s = np.abs(u)
    a, b = radial_products(s)
    jxx = 0.375 * a - 0.375 * u * u * b
    jyy = 0.375 * a
    jzz = (2.0 + 0.375 * s * s) * b + 0.25 * a
    jxz = u * (b - 0.375 * a)
    return jxx, jyy, jzz, jxz
