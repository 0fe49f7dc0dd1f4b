"""Lateral van der Waals forces on anisotropic particles above corrugated surfaces.

The first-order correction to the particle-surface interaction energy is
evaluated as a dimensionless ratio U / U_scale = -Tr(K M), where K is a
surface-shape kernel and M the rotated polarizability response of the particle.
"""

from __future__ import annotations

from .analysis import (
    CURVATURE_STEP,
    FAMILIES,
    FORCE_STEP,
    Derivative,
    EnergyMap,
    ExtremumReport,
    Scenario,
    TrapShift,
    boundary_minima_1d,
    classify_origin,
    critical_width,
    energy_map_2d,
    family_scenario,
    find_minima_1d,
    lateral_force_ratio,
    phase_boundary,
    ratio_at,
    ratio_curvature,
    regime_classify,
    scan_1d,
    threshold_gamma,
    trap_response,
    trap_shift,
)
from .energy import (
    MODES,
    PhysicalSetup,
    classical_ratio,
    dimensional_energy,
    energy_ratio,
    energy_ratio_pfa,
    energy_scale,
)
from .errors import (
    ConvergenceError,
    DegenerateParticleError,
    DomainError,
    LateralVdWError,
    NoSignChangeError,
    OrderingError,
    TrapDestabilizedError,
)
from .kernel import j_entries_1d, j_matrix, j_parts, radial_products
from .profile import (
    DEFAULT_QUAD,
    Gaussian,
    Grating,
    Strip,
    Tabulated1D,
    grating_centres,
    height,
    kernel,
    kernel_gaussian,
    kernel_general_1d,
    kernel_grating,
    kernel_strip,
    kernel_x_derivative,
    load_table,
    strip_spectrum,
    tabulated_spectrum,
)
from .quadrature import QuadratureSpec, integrate_adaptive
from .response import (
    CLASSICAL_GAMMAS,
    GammaParams,
    Orientation,
    euler_rotation,
    gamma_from_polarizability,
    pi_matrix,
    response_matrix,
)
from .special import bessel_k, bessel_k01

__version__ = "0.1.0"
