"""Lateral force, extremum classification and sweeps built on the energy ratio.

All positions and widths are in units of z0; forces and curvatures are
derivatives of U/U_scale with respect to x0/z0.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .energy import PhysicalSetup, energy_ratio, energy_ratio_pfa, energy_scale
from .errors import ConvergenceError, DomainError, NoSignChangeError, TrapDestabilizedError
from .profile import (
    DEFAULT_QUAD,
    Gaussian,
    Grating,
    Profile,
    QuadratureSpec,
    Strip,
    grating_centres,
    height,
    kernel,
    kernel_x_derivative,
)
from .response import CLASSICAL_GAMMAS, GammaParams, Orientation, response_matrix

__all__ = [
    "Scenario",
    "Derivative",
    "ExtremumReport",
    "TrapShift",
    "EnergyMap",
    "ratio_at",
    "lateral_force_ratio",
    "ratio_curvature",
    "classify_origin",
    "family_scenario",
    "critical_width",
    "threshold_gamma",
    "phase_boundary",
    "find_minima_1d",
    "boundary_minima_1d",
    "regime_classify",
    "trap_response",
    "trap_shift",
    "scan_1d",
    "energy_map_2d",
    "FORCE_STEP",
    "CURVATURE_STEP",
]

FORCE_STEP = 1e-3
CURVATURE_STEP = 0.04
DEGENERACY_BAND = 1e-6
FAMILIES = ("gaussian", "strip")
WIDTH_BRACKET = (1e-3, 20.0)
THRESHOLD_WIDTHS = (4e-3, 2e-3, 1e-3)


@dataclass(frozen=True)
class Scenario:
    profile: Profile
    gammas: GammaParams = field(default_factory=GammaParams)
    orientation: Orientation = field(default_factory=Orientation)
    mode: str = "quantum"
    quad: QuadratureSpec = DEFAULT_QUAD
    approximation: str = "exact"

    def __post_init__(self):
        if self.mode not in ("quantum", "classical"):
            raise DomainError(f"mode must be 'quantum' or 'classical', got {self.mode!r}")
        if self.approximation not in ("exact", "pfa"):
            raise DomainError(f"approximation must be 'exact' or 'pfa', got {self.approximation!r}")

    def response(self) -> np.ndarray:
        gammas = CLASSICAL_GAMMAS if self.mode == "classical" else self.gammas
        return response_matrix(self.orientation, gammas)


@dataclass(frozen=True)
class Derivative:
    value: float
    error: float


@dataclass(frozen=True)
class ExtremumReport:
    location: tuple[float, float]
    value: float
    kind: str
    curvature: float
    is_global: bool = False


@dataclass(frozen=True)
class TrapShift:
    curvature: float
    stiffness: float
    omega_prime: float
    delta_omega: float


@dataclass
class EnergyMap:
    x: np.ndarray
    y: np.ndarray
    values: np.ndarray
    failed: np.ndarray


def ratio_at(s: Scenario, x0_over_z0: float, y0_over_z0: float = 0.0) -> float:
    """U/U_scale at the particle position (x0, y0)/z0."""
    m = s.response()
    if s.approximation == "pfa":
        return energy_ratio_pfa(height(s.profile, x0_over_z0, y0_over_z0), m)
    return energy_ratio(kernel(s.profile, x0_over_z0, y0_over_z0, s.quad), m)


def _has_closed_form(s: Scenario) -> bool:
    return s.approximation == "exact" and isinstance(s.profile, (Strip, Grating))


def lateral_force_ratio(
    s: Scenario, x0_over_z0: float, y0_over_z0: float = 0.0, step: float = FORCE_STEP
) -> Derivative:
    """-d(U/U_scale)/d(x0/z0) with an error estimate.

    Strips and gratings use the analytic derivative of the closed form; other
    profiles a central difference with one Richardson halving of ``step``.
    """
    if _has_closed_form(s):
        if s.profile.sign == 0:
            return Derivative(0.0, 0.0)
        dk = kernel_x_derivative(s.profile, x0_over_z0, 1)
        return Derivative(-energy_ratio(dk, s.response()), 0.0)

    def f(x):
        return ratio_at(s, x, y0_over_z0)

    x = float(x0_over_z0)
    h = float(step)
    outer = (f(x + h), f(x - h))
    inner = (f(x + 0.5 * h), f(x - 0.5 * h))
    d_h = (outer[0] - outer[1]) / (2.0 * h)
    d_h2 = (inner[0] - inner[1]) / h
    value = -(4.0 * d_h2 - d_h) / 3.0
    error = abs(d_h2 - d_h) / 3.0
    scale = max(abs(v) for v in outer + inner)
    if error > 1e-5 * max(scale, 1e-300):
        raise ConvergenceError(
            f"Richardson force estimate at x0/z0={x} disagrees by {error:.3g}", estimate=error
        )
    return Derivative(value, error)


def _second_derivative(f: Callable[[float], np.ndarray], x: float, h0: float, rel_target: float):
    """Five-point second difference with Richardson halving until two levels agree.

    Returns ``(value, error, scale)``; ``scale`` is the largest |f| sampled.
    """
    cache: dict[float, np.ndarray] = {}

    def g(t):
        if t not in cache:
            cache[t] = np.asarray(f(t), dtype=float)
        return cache[t]

    def stencil(h):
        return (-g(x + 2 * h) + 16.0 * g(x + h) - 30.0 * g(x) + 16.0 * g(x - h) - g(x - 2 * h)) / (
            12.0 * h * h
        )

    h = h0
    prev = stencil(h)
    best, err = prev, math.inf
    for _ in range(5):
        h *= 0.5
        cur = stencil(h)
        best = (16.0 * cur - prev) / 15.0
        err = float(np.max(np.abs(cur - prev))) / 15.0
        scale = max(float(np.max(np.abs(v))) for v in cache.values())
        if err <= rel_target * max(scale, 1e-300):
            break
        prev = cur
    scale = max(float(np.max(np.abs(v))) for v in cache.values())
    return best, err, scale


def ratio_curvature(s: Scenario, x0_over_z0: float = 0.0, y0_over_z0: float = 0.0,
                    step: float = CURVATURE_STEP) -> tuple[float, float, float]:
    """d^2(U/U_scale)/d(x0/z0)^2 by adaptive five-point stencil: ``(value, error, scale)``."""
    value, err, scale = _second_derivative(
        lambda t: ratio_at(s, t, y0_over_z0), float(x0_over_z0), step, 0.1 * DEGENERACY_BAND
    )
    return float(value), err, scale


def _kind(curvature: float, scale: float) -> str:
    band = DEGENERACY_BAND * scale
    if curvature > band:
        return "minimum"
    if curvature < -band:
        return "maximum"
    return "degenerate"


def classify_origin(s: Scenario) -> ExtremumReport:
    """Is the profile centre a minimum or a maximum of the energy along x?"""
    curvature, _, scale = ratio_curvature(s, 0.0)
    return ExtremumReport((0.0, 0.0), ratio_at(s, 0.0), _kind(curvature, scale), curvature)


# --------------------------------------------------------------- phase diagram


def family_scenario(family: str, gamma_s: float, d_over_z0: float,
                    quad: QuadratureSpec = DEFAULT_QUAD) -> Scenario:
    """Axis along x (theta = pi/2, phi = psi = 0), gamma_a = 0, single bump of the family."""
    if family == "gaussian":
        profile: Profile = Gaussian(d_over_z0)
    elif family == "strip":
        profile = Strip(d_over_z0)
    else:
        raise DomainError(f"family must be one of {FAMILIES}, got {family!r}")
    return Scenario(profile, GammaParams(1.0, gamma_s, 0.0), Orientation(0.0, math.pi / 2, 0.0), quad=quad)


def critical_width(gamma_s: float, family: str, tol: float = 1e-4,
                   quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Width d/z0 at which the centre switches between minimum and maximum.

    Geometric bisection of the sign of the origin curvature on [1e-3, 20].
    """
    if not tol > 0:
        raise DomainError("tol must be > 0")

    def curvature(d):
        return ratio_curvature(family_scenario(family, gamma_s, d, quad))[0]

    lo, hi = WIDTH_BRACKET
    c_lo, c_hi = curvature(lo), curvature(hi)
    if np.sign(c_lo) == np.sign(c_hi):
        raise NoSignChangeError(
            f"origin curvature has the same sign at d/z0 = {lo} and {hi} for gamma_s = {gamma_s}"
        )
    while hi - lo > tol:
        mid = math.sqrt(lo * hi)
        c_mid = curvature(mid)
        if np.sign(c_mid) == np.sign(c_lo):
            lo, c_lo = mid, c_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _kernel_curvature(family: str, d_over_z0: float, quad: QuadratureSpec) -> np.ndarray:
    profile = family_scenario(family, 0.0, d_over_z0, quad).profile
    value, _, _ = _second_derivative(
        lambda t: kernel(profile, t, 0.0, quad), 0.0, CURVATURE_STEP, 1e-9
    )
    return value


def _curvature_root(c: np.ndarray, orientation: Orientation) -> float:
    # the ratio curvature is -Tr(K'' M), linear in gamma_s
    def curvature(g):
        m = response_matrix(orientation, GammaParams(1.0, g, 0.0, strict=False))
        return energy_ratio(c, m)

    grid = np.linspace(0.0, 0.99, 100)
    values = np.array([curvature(g) for g in grid])
    flips = np.nonzero(np.sign(values[:-1]) != np.sign(values[1:]))[0]
    if flips.size != 1:
        raise NoSignChangeError(f"expected one curvature sign change in gamma_s, found {flips.size}")
    i = int(flips[0])
    return brentq(curvature, grid[i], grid[i + 1], xtol=1e-14, rtol=1e-14)


def threshold_gamma(family: str, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Smallest gamma_s allowing a sign inversion, extrapolated to d/z0 -> 0.

    Roots of the origin curvature in gamma_s at d/z0 = 4e-3, 2e-3, 1e-3 are
    fitted linearly in (d/z0)^2.
    """
    orientation = Orientation(0.0, math.pi / 2, 0.0)
    widths = np.array(THRESHOLD_WIDTHS)
    roots = np.array([_curvature_root(_kernel_curvature(family, d, quad), orientation) for d in widths])
    x = widths ** 2
    slope, intercept = np.polyfit(x, roots, 1)
    pair_a = roots[1] - (roots[0] - roots[1]) / (x[0] - x[1]) * x[1]
    pair_b = roots[2] - (roots[1] - roots[2]) / (x[1] - x[2]) * x[2]
    if abs(pair_a - pair_b) > 1e-3:
        raise ConvergenceError(
            f"threshold extrapolations disagree: {pair_a:.6g} vs {pair_b:.6g}",
            estimate=abs(pair_a - pair_b),
        )
    return float(intercept)


def phase_boundary(family: str, gamma_values: Sequence[float], tol: float = 1e-4,
                   quad: QuadratureSpec = DEFAULT_QUAD) -> list[tuple[float, float | None]]:
    """``(gamma_s, critical d/z0 or None)`` for each gamma_s."""
    rows = []
    for g in gamma_values:
        try:
            rows.append((float(g), critical_width(g, family, tol, quad)))
        except NoSignChangeError:
            rows.append((float(g), None))
    return rows


# ------------------------------------------------------------------- minima


def find_minima_1d(s: Scenario, x_lo: float, x_hi: float, grid_n: int = 64,
                   y0_over_z0: float = 0.0) -> list[ExtremumReport]:
    """Interior local minima of the ratio along x on [x_lo, x_hi].

    A coarse grid locates + to - sign changes of the lateral force, which are
    then refined with Brent's method. Window endpoints are never reported here
    (see :func:`boundary_minima_1d`). The deepest minimum, and any degenerate
    with it, is flagged global.
    """
    if grid_n < 16:
        raise DomainError("grid_n must be >= 16")
    if not x_lo < x_hi:
        raise DomainError("need x_lo < x_hi")

    def force(x):
        return lateral_force_ratio(s, x, y0_over_z0).value

    xs = np.linspace(x_lo, x_hi, int(grid_n))
    fs = np.array([force(x) for x in xs])
    zero = 1e-10 * float(np.max(np.abs(fs))) if np.any(fs) else 0.0
    signs = np.where(np.abs(fs) <= zero, 0, np.sign(fs)).astype(int)

    roots = []
    last = None
    for i, sg in enumerate(signs):
        if sg == 0:
            continue
        if last is not None and signs[last] > 0 and sg < 0:
            gap = range(last + 1, i)
            exact = [j for j in gap if fs[j] == 0.0]
            if exact:
                roots.append(float(xs[exact[len(exact) // 2]]))
            else:
                roots.append(brentq(force, xs[last], xs[i], xtol=1e-10))
        last = i

    reports = []
    for x in roots:
        x += 0.0  # no signed zero in reports
        curvature, _, scale = ratio_curvature(s, x, y0_over_z0)
        reports.append(ExtremumReport((x, float(y0_over_z0)), ratio_at(s, x, y0_over_z0),
                                      _kind(curvature, scale), curvature))
    if reports:
        # minima degenerate to within DEGENERACY_BAND of the deepest are all global
        deepest = min(r.value for r in reports)
        band = DEGENERACY_BAND * max(abs(deepest), float(np.max(np.abs([r.value for r in reports]))))
        reports = [
            ExtremumReport(r.location, r.value, r.kind, r.curvature, r.value <= deepest + band)
            for r in reports
        ]
    return sorted(reports, key=lambda r: r.location[0])


def boundary_minima_1d(s: Scenario, x_lo: float, x_hi: float,
                       y0_over_z0: float = 0.0) -> list[float]:
    """Window endpoints where the force points out of the window (scan artefacts)."""
    out = []
    if lateral_force_ratio(s, x_lo, y0_over_z0).value < 0.0:
        out.append(float(x_lo))
    if lateral_force_ratio(s, x_hi, y0_over_z0).value > 0.0:
        out.append(float(x_hi))
    return out


def regime_classify(s: Scenario, rel_tol: float = 1e-9) -> str:
    """'peak' if the energy is lower over the central strip than over the adjacent gap."""
    p = s.profile
    if not isinstance(p, Grating):
        raise DomainError("regime classification needs a grating profile")
    if p.n_strips < 5:
        raise DomainError("regime classification needs at least 5 strips")
    centres = grating_centres(p.d_over_z0, p.L_over_z0, p.n_strips)
    centre = float(centres[np.argmin(np.abs(centres) - 1e-12 * np.sign(centres))])
    half_period = 0.5 * (p.d_over_z0 + p.L_over_z0)
    gap = centre - half_period if centre > 0.0 else centre + half_period
    on_strip = ratio_at(s, centre)
    on_gap = ratio_at(s, gap)
    if abs(on_strip - on_gap) <= rel_tol * max(abs(on_strip), abs(on_gap)):
        return "degenerate"
    return "peak" if on_strip < on_gap else "valley"


# --------------------------------------------------------------------- trap


def trap_response(s: Scenario, setup: PhysicalSetup) -> TrapShift:
    """Trap frequency shift for a particle held at x0 = 0 above an even profile."""
    curvature, _, _ = ratio_curvature(s, 0.0)
    if setup.amplitude_a == 0.0 or curvature == 0.0:
        stiffness = 0.0
    else:
        stiffness = energy_scale(setup, s.mode) * curvature / setup.z0 ** 2
    omega = setup.omega_trap
    shift = stiffness / setup.mass
    w2 = omega * omega + shift
    if w2 < 0.0:
        raise TrapDestabilizedError(
            f"omega_trap^2 + U''/m = {w2:.3g} < 0: the corrugation destabilises the trap"
        )
    omega_prime = math.sqrt(w2)
    # difference of square roots without cancellation
    delta = shift / (omega_prime + omega)
    return TrapShift(curvature, stiffness, omega_prime, delta)


def trap_shift(s: Scenario, setup: PhysicalSetup) -> float:
    """delta omega = omega' - omega_trap in rad/s."""
    return trap_response(s, setup).delta_omega


# ------------------------------------------------------------------- sweeps


def _point(args):
    s, x, y = args
    try:
        return ratio_at(s, x, y), False
    except ConvergenceError:
        return math.nan, True


def _evaluate(s: Scenario, points: list[tuple[float, float]], workers: int):
    tasks = [(s, x, y) for x, y in points]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_point, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_point(t) for t in tasks]
    values = np.array([r[0] for r in results], dtype=float)
    failed = np.array([r[1] for r in results], dtype=bool)
    return values, failed


def scan_1d(s: Scenario, x_lo: float, x_hi: float, n: int, y0_over_z0: float = 0.0,
            workers: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Ratio on ``n`` equally spaced abscissae; failed points are NaN."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if not x_lo <= x_hi:
        raise DomainError("need x_lo <= x_hi")
    xs = np.linspace(x_lo, x_hi, int(n)) if n != 1 else np.array([float(x_lo)])
    values, _ = _evaluate(s, [(float(x), float(y0_over_z0)) for x in xs], workers)
    return xs, values


def energy_map_2d(s: Scenario, x_range: tuple[float, float], y_range: tuple[float, float],
                  nx: int, ny: int, workers: int = 1) -> EnergyMap:
    """Ratio on an nx-by-ny grid, ``values[i, j]`` at ``(x[i], y[j])``.

    Points whose quadrature fails are NaN and flagged in ``failed``.
    """
    if nx < 1 or ny < 1:
        raise DomainError("grid sizes must be >= 1")
    if not (x_range[0] <= x_range[1] and y_range[0] <= y_range[1]):
        raise DomainError("ranges must be ordered low to high")
    xs = np.linspace(x_range[0], x_range[1], nx) if nx > 1 else np.array([float(x_range[0])])
    ys = np.linspace(y_range[0], y_range[1], ny) if ny > 1 else np.array([float(y_range[0])])
    points = [(float(x), float(y)) for x in xs for y in ys]
    values, failed = _evaluate(s, points, workers)
    return EnergyMap(xs, ys, values.reshape(nx, ny), failed.reshape(nx, ny))
