"""Corrugation profiles and their kernel matrices K_ij.

For a profile h(r) of maximum height a, the dimensionless kernel is

    K_ij(r0) = (1/a) int d^2q/(2pi)^2 h~(q) exp(i q.r0) J_ij(z0 q),

so every routine here works in units of z0 (positions x0/z0, widths d/z0,
wavevectors u = z0 q). Holes and trenches are the same profiles with
``sign = -1``; ``sign = 0`` is the flat-plane limit (zero kernel).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from numpy.polynomial import Polynomial

from .errors import DomainError
from .kernel import j_entries_1d, radial_products
from .quadrature import QuadratureSpec, integrate_adaptive

__all__ = [
    "Gaussian",
    "Strip",
    "Grating",
    "Tabulated1D",
    "Profile",
    "QuadratureSpec",
    "DEFAULT_QUAD",
    "MIN_GAUSSIAN_WIDTH",
    "kernel_gaussian",
    "kernel_strip",
    "kernel_grating",
    "kernel_general_1d",
    "strip_spectrum",
    "tabulated_spectrum",
    "apply_sign",
    "kernel",
    "kernel_x_derivative",
    "height",
    "load_table",
    "grating_centres",
    "is_one_dimensional",
]

DEFAULT_QUAD = QuadratureSpec()
MIN_GAUSSIAN_WIDTH = 1e-4


def _check_sign(sign) -> int:
    if sign not in (-1, 0, 1):
        raise DomainError(f"profile sign must be -1, 0 or +1, got {sign!r}")
    return int(sign)


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise DomainError(f"{name} must be finite and > 0, got {value}")
    return value


def _check_finite(*values: float) -> None:
    if not all(math.isfinite(float(v)) for v in values):
        raise DomainError("positions must be finite")


@dataclass(frozen=True)
class Gaussian:
    """h = sign * a * exp(-(|r|/d)^2)."""

    d_over_z0: float
    sign: int = 1

    def __post_init__(self):
        d = _check_positive("d_over_z0", self.d_over_z0)
        if d < MIN_GAUSSIAN_WIDTH:
            raise DomainError(f"Gaussian d_over_z0 must be >= {MIN_GAUSSIAN_WIDTH}")
        _check_sign(self.sign)


@dataclass(frozen=True)
class Strip:
    """Rectangular strip of width d centred on x = 0."""

    d_over_z0: float
    sign: int = 1

    def __post_init__(self):
        _check_positive("d_over_z0", self.d_over_z0)
        _check_sign(self.sign)


@dataclass(frozen=True)
class Grating:
    """``n_strips`` strips of width d separated by gaps L, centred on x = 0."""

    d_over_z0: float
    L_over_z0: float
    n_strips: int
    sign: int = 1

    def __post_init__(self):
        _check_positive("d_over_z0", self.d_over_z0)
        _check_positive("L_over_z0", self.L_over_z0)
        if isinstance(self.n_strips, bool) or int(self.n_strips) != self.n_strips or self.n_strips < 1:
            raise DomainError(f"n_strips must be a positive integer, got {self.n_strips!r}")
        _check_sign(self.sign)


@dataclass(frozen=True, eq=False)
class Tabulated1D:
    """Sampled profile h(x)/a on increasing abscissae x/z0.

    The outer ``taper`` fraction of the span is multiplied by a raised-cosine
    ramp so that the profile reaches exactly zero at both edges.
    """

    x: np.ndarray
    h: np.ndarray
    sign: int = 1
    taper: float = 0.05
    _tapered: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        h = np.asarray(self.h, dtype=float)
        if x.ndim != 1 or x.shape != h.shape or x.size < 3:
            raise DomainError("tabulated profile needs matching 1-D x and h with >= 3 samples")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(h))):
            raise DomainError("tabulated profile contains non-finite values")
        if np.any(np.diff(x) <= 0.0):
            raise DomainError("tabulated abscissae must be strictly increasing")
        if np.max(np.abs(h)) > 1.0 + 1e-12:
            raise DomainError("tabulated |h|/a must not exceed 1")
        if not 0.0 <= self.taper < 0.5:
            raise DomainError("taper fraction must lie in [0, 0.5)")
        peak = float(np.max(np.abs(h)))
        if peak > 0.0 and max(abs(h[0]), abs(h[-1])) > 0.05 * peak:
            raise DomainError("tabulated profile must decay to zero at the table edges")
        _check_sign(self.sign)
        span = x[-1] - x[0]
        w = np.ones_like(x)
        if self.taper > 0.0:
            ramp = self.taper * span
            dist = np.minimum(x - x[0], x[-1] - x)
            inside = dist < ramp
            w[inside] = 0.5 * (1.0 - np.cos(np.pi * dist[inside] / ramp))
        else:
            w[0] = w[-1] = 0.0
        x.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "_tapered", h * w)

    @property
    def tapered(self) -> np.ndarray:
        return self._tapered


Profile = Union[Gaussian, Strip, Grating, Tabulated1D]


def load_table(path, sign: int = 1, taper: float = 0.05) -> Tabulated1D:
    """Read a two-column whitespace table ``x/z0  h/a``; '#' starts a comment."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise DomainError(f"{path}: expected two columns, found {data.shape[1]}")
    return Tabulated1D(data[:, 0], data[:, 1], sign=sign, taper=taper)


def apply_sign(k: np.ndarray, sign: int) -> np.ndarray:
    """Kernel of the sign-flipped profile; the kernel is linear in h."""
    return _check_sign(sign) * np.asarray(k)


def is_one_dimensional(profile: Profile) -> bool:
    return not isinstance(profile, Gaussian)


# ---------------------------------------------------------------- Gaussian


def _angular_count(z: float) -> int:
    # trapezoid aliasing error ~ J_N(z), negligible for N > z + 12 z^(1/3) + 24
    n = z + 12.0 * z ** (1.0 / 3.0) + 24.0
    return 4 * int(math.ceil(n / 4.0))


def kernel_gaussian(r0, d_over_z0: float, q: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Kernel of a unit Gaussian bump at planar position ``r0 = (x0/z0, y0/z0)``.

    Polar coordinates in u: the angular integral uses an equally spaced
    trapezoidal rule (spectrally accurate for the periodic integrand), the
    radial one adaptive Gauss-Kronrod panels on [0, min(u_max, 14 z0/d)].
    """
    x0, y0 = (float(c) for c in r0)
    _check_finite(x0, y0)
    width = _check_positive("d_over_z0", d_over_z0)
    if width < MIN_GAUSSIAN_WIDTH:
        raise DomainError(f"Gaussian d_over_z0 must be >= {MIN_GAUSSIAN_WIDTH}")

    # exp(-d^2 u^2 / 4) < e^-49 beyond 14/d
    rho_max = min(q.u_max, 14.0 / width)
    r = math.hypot(x0, y0)
    prefactor = 0.5 * width * width

    if r == 0.0:
        means = np.array([1.0, 0.5, 0.5, 0.0, 0.0, 0.0])
        direction = None
    else:
        n_ang = _angular_count(rho_max * r)
        alpha = 2.0 * np.pi * np.arange(n_ang) / n_ang
        c, s = np.cos(alpha), np.sin(alpha)
        direction = x0 * c + y0 * s
        basis = np.stack([np.ones_like(c), c * c, s * s, c * s, c, s], axis=1) / n_ang

    def integrand(rho):
        if direction is None:
            m = np.broadcast_to(means, (rho.size, 6))
        else:
            m = np.exp(1j * rho[:, None] * direction[None, :]) @ basis
        a, b = radial_products(rho)
        weight = rho * np.exp(-0.25 * width * width * rho * rho)
        rb = rho * rho * b
        g = rho * (b - 0.375 * a)
        out = np.empty((rho.size, 6), dtype=complex)
        out[:, 0] = 0.375 * a * m[:, 0] - 0.375 * rb * m[:, 1]
        out[:, 1] = 0.375 * a * m[:, 0] - 0.375 * rb * m[:, 2]
        out[:, 2] = ((2.0 + 0.375 * rho * rho) * b + 0.25 * a) * m[:, 0]
        out[:, 3] = -0.375 * rb * m[:, 3]
        out[:, 4] = 1j * g * m[:, 4]
        out[:, 5] = 1j * g * m[:, 5]
        return out * weight[:, None]

    edges = np.linspace(0.0, rho_max, 9)
    value, _ = integrate_adaptive(
        integrand,
        edges,
        rel_tol=q.rel_tol,
        abs_tol=q.abs_tol / prefactor,
        max_refinements=q.max_refinements,
    )
    value = value * prefactor
    return _assemble_checked(value, q)


def _assemble_checked(value: np.ndarray, q: QuadratureSpec) -> np.ndarray:
    # order: xx, yy, zz, xy, xz, yz
    real = value.real
    residue = float(np.max(np.abs(value.imag)))
    allowed = max(q.abs_tol, q.rel_tol * float(np.max(np.abs(real))))
    if residue > allowed:
        raise DomainError(
            f"kernel has an imaginary residue {residue:.3g} above tolerance {allowed:.3g}; "
            "is the spectrum Hermitian?"
        )
    xx, yy, zz, xy, xz, yz = real
    return np.array([[xx, xy, xz], [xy, yy, yz], [xz, yz, zz]])


# -------------------------------------------------------------- strip family


class _RootRational:
    """P(u) * (1 + u^2)^(-power) with exact derivatives of any order."""

    def __init__(self, numerator: Polynomial, power: float):
        self.numerator = numerator
        self.power = power

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return self.numerator(u) * (1.0 + u * u) ** (-self.power)

    def derivative(self) -> "_RootRational":
        p = self.numerator
        one_plus = Polynomial([1.0, 0.0, 1.0])
        u = Polynomial([0.0, 1.0])
        return _RootRational(p.deriv() * one_plus - 2.0 * self.power * u * p, self.power + 1.0)


# f_ij with numerators in ascending powers of u
_F_BASE = {
    "xx": _RootRational(Polynomial([0, 0, 0, 35, 0, 28, 0, 8]), 3.5),
    "yy": _RootRational(Polynomial([0, 15, 0, 20, 0, 8]), 2.5),
    "zz": _RootRational(Polynomial([0, 41, 0, 66, 0, 56, 0, 16]), 3.5),
    "xz": _RootRational(Polynomial([-7, 0, 8]), 3.5),
}
_F_DERIVS: list[dict[str, _RootRational]] = [_F_BASE]
for _ in range(4):
    _F_DERIVS.append({k: v.derivative() for k, v in _F_DERIVS[-1].items()})


def strip_primitive(entry: str, u, order: int = 0):
    """The closed-form strip primitive f_ij(u) (or its ``order``-th derivative)."""
    return _F_DERIVS[order][entry](u)


def kernel_strip(x0_over_z0: float, d_over_z0: float, order: int = 0) -> np.ndarray:
    """Closed-form kernel of a unit strip, K = (3/16)[f(x0 + d/2) - f(x0 - d/2)].

    ``order`` > 0 returns the ``order``-th derivative with respect to x0/z0.
    """
    _check_finite(x0_over_z0)
    width = _check_positive("d_over_z0", d_over_z0)
    if not 0 <= order < len(_F_DERIVS):
        raise DomainError(f"derivative order must be in [0, {len(_F_DERIVS) - 1}]")
    fs = _F_DERIVS[order]
    up = float(x0_over_z0) + 0.5 * width
    dn = float(x0_over_z0) - 0.5 * width
    xx, yy, zz, xz = (0.1875 * (fs[k](up) - fs[k](dn)) for k in ("xx", "yy", "zz", "xz"))
    return np.array([[xx, 0.0, xz], [0.0, yy, 0.0], [xz, 0.0, zz]])


def grating_centres(d_over_z0: float, L_over_z0: float, n: int) -> np.ndarray:
    """Strip centres of an n-strip grating, ascending."""
    k = np.arange(1, n + 1)
    return np.sort(-((n + 1) / 2.0 - k) * (L_over_z0 + d_over_z0))


def kernel_grating(
    x0_over_z0: float, d_over_z0: float, L_over_z0: float, n: int, order: int = 0
) -> np.ndarray:
    """Sum of ``n`` strip kernels shifted by ((n+1)/2 - k)(L + d)/z0, k = 1..n."""
    _check_positive("L_over_z0", L_over_z0)
    if int(n) != n or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    period = float(L_over_z0) + float(d_over_z0)
    total = np.zeros((3, 3))
    for k in range(1, int(n) + 1):
        total = total + kernel_strip(x0_over_z0 + ((n + 1) / 2.0 - k) * period, d_over_z0, order)
    return total


# ----------------------------------------------------------- generic 1-D path


def strip_spectrum(d_over_z0: float) -> Callable[[np.ndarray], np.ndarray]:
    """Reduced spectrum 2 sin(u d/2z0)/u of a unit strip."""
    width = _check_positive("d_over_z0", d_over_z0)
    return lambda u: width * np.sinc(np.asarray(u) * width / (2.0 * np.pi))


def _phi12(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # phi1 = (e^z - 1)/z, phi2 = (e^z - 1 - z)/z^2, series below |z| = 0.5
    small = np.abs(z) < 0.5
    zs = np.where(small, z, 0.0)
    phi1_s = np.zeros_like(z)
    phi2_s = np.zeros_like(z)
    term1 = np.ones_like(z)
    term2 = np.full_like(z, 0.5)
    for k in range(1, 22):
        phi1_s = phi1_s + term1
        phi2_s = phi2_s + term2
        term1 = term1 * zs / (k + 1)
        term2 = term2 * zs / (k + 2)
    zl = np.where(small, 1.0, z)
    ez = np.exp(zl)
    phi1_l = (ez - 1.0) / zl
    phi2_l = (ez - 1.0 - zl) / (zl * zl)
    return np.where(small, phi1_s, phi1_l), np.where(small, phi2_s, phi2_l)


def tabulated_spectrum(x, h) -> Callable[[np.ndarray], np.ndarray]:
    """Exact Fourier transform int h(x) e^{-iux} dx of the piecewise-linear interpolant."""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    start = x[:-1]
    step = np.diff(x)
    level = h[:-1]
    slope = np.diff(h) / step

    def spectrum(u):
        u = np.asarray(u, dtype=float)
        flat = u.ravel()
        z = -1j * flat[:, None] * step[None, :]
        phi1, phi2 = _phi12(z)
        # int_0^1 e^{z t} dt = phi1, int_0^1 t e^{z t} dt = phi1 - phi2
        seg = np.exp(-1j * flat[:, None] * start[None, :]) * (
            level * step * phi1 + slope * step * step * (phi1 - phi2)
        )
        return seg.sum(axis=1).reshape(u.shape)

    return spectrum


def kernel_general_1d(
    x0_over_z0: float,
    spectrum: Callable[[np.ndarray], np.ndarray],
    q: QuadratureSpec = DEFAULT_QUAD,
) -> np.ndarray:
    """Kernel of an x-only profile from its reduced spectrum h~1(q z0)/(a z0).

    The u-integral over [-u_max, u_max] is folded onto [0, u_max]; for a real
    profile the folded integrand is real and any imaginary remainder is a
    residue checked against the tolerance and discarded.
    """
    _check_finite(x0_over_z0)
    x0 = float(x0_over_z0)

    def integrand(u):
        jxx, jyy, jzz, jxz = j_entries_1d(u)
        phase = np.exp(1j * u * x0)
        plus = np.asarray(spectrum(u), dtype=complex) * phase
        minus = np.asarray(spectrum(-u), dtype=complex) * np.conj(phase)
        even = plus + minus
        out = np.empty((u.size, 6), dtype=complex)
        out[:, 0] = even * jxx
        out[:, 1] = even * jyy
        out[:, 2] = even * jzz
        out[:, 3] = 0.0
        out[:, 4] = 1j * jxz * (plus - minus)
        out[:, 5] = 0.0
        return out

    edges = np.linspace(0.0, q.u_max, 17)
    value, _ = integrate_adaptive(
        integrand,
        edges,
        rel_tol=q.rel_tol,
        abs_tol=q.abs_tol * 2.0 * np.pi,
        max_refinements=q.max_refinements,
    )
    return _assemble_checked(value / (2.0 * np.pi), q)


# ---------------------------------------------------------------- dispatch


def kernel(profile: Profile, x0_over_z0: float, y0_over_z0: float = 0.0,
           q: QuadratureSpec = DEFAULT_QUAD) -> np.ndarray:
    """Signed kernel matrix of ``profile`` at the particle position (x0, y0)/z0."""
    _check_finite(x0_over_z0, y0_over_z0)
    if profile.sign == 0:
        return np.zeros((3, 3))
    if isinstance(profile, Gaussian):
        k = kernel_gaussian((x0_over_z0, y0_over_z0), profile.d_over_z0, q)
    elif isinstance(profile, Strip):
        k = kernel_strip(x0_over_z0, profile.d_over_z0)
    elif isinstance(profile, Grating):
        k = kernel_grating(x0_over_z0, profile.d_over_z0, profile.L_over_z0, profile.n_strips)
    elif isinstance(profile, Tabulated1D):
        k = kernel_general_1d(x0_over_z0, tabulated_spectrum(profile.x, profile.tapered), q)
    else:
        raise DomainError(f"unsupported profile type {type(profile).__name__}")
    return apply_sign(k, profile.sign)


def kernel_x_derivative(profile: Profile, x0_over_z0: float, order: int = 1) -> np.ndarray:
    """Analytic x0-derivatives of the kernel; strip and grating profiles only."""
    if isinstance(profile, Strip):
        k = kernel_strip(x0_over_z0, profile.d_over_z0, order)
    elif isinstance(profile, Grating):
        k = kernel_grating(x0_over_z0, profile.d_over_z0, profile.L_over_z0, profile.n_strips, order)
    else:
        raise DomainError("analytic derivatives exist only for strip and grating profiles")
    return apply_sign(k, profile.sign)


def height(profile: Profile, x0_over_z0, y0_over_z0=0.0):
    """Signed profile height h/a at planar position(s)."""
    x = np.asarray(x0_over_z0, dtype=float)
    y = np.asarray(y0_over_z0, dtype=float)
    if isinstance(profile, Gaussian):
        h = np.exp(-(x * x + y * y) / profile.d_over_z0 ** 2)
    elif isinstance(profile, (Strip, Grating)):
        if isinstance(profile, Strip):
            centres = np.array([0.0])
        else:
            centres = grating_centres(profile.d_over_z0, profile.L_over_z0, profile.n_strips)
        half = 0.5 * profile.d_over_z0
        h = np.zeros(np.broadcast(x, y).shape)
        for c in centres:
            h = h + np.where(np.abs(x - c) < half, 1.0, np.where(np.abs(x - c) == half, 0.5, 0.0))
    elif isinstance(profile, Tabulated1D):
        h = np.interp(x, profile.x, profile.tapered, left=0.0, right=0.0) + 0.0 * y
    else:
        raise DomainError(f"unsupported profile type {type(profile).__name__}")
    h = profile.sign * h
    return float(h) if np.ndim(h) == 0 else h
