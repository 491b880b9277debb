"""Doppler-cooling equilibria for rotating single-plane ion crystals.

The package computes the perpendicular (in-plane) temperature reached by
Doppler laser cooling of a planar ion crystal rotating in a Penning trap,
the torque the cooling beam exerts on the crystal, and the operating
curves along which that torque vanishes.  The energy balance includes the
work exchanged with the rotating-wall potential that pins the rotation
frequency, and optional recoil heating from a beam along the rotation
axis.
"""

from ._version import __version__
from .balance import (
    BalanceEvaluator,
    BalanceResult,
    ReducedParams,
    laser_energy_rate,
    laser_torque,
    laser_wall_energy_rate,
    parallel_recoil_rate,
    reduced_params_from_physical,
    rescale_beam,
    total_balance_full,
    total_balance_reduced,
)
from .constants import AMU, HBAR, KB
from .equilibrium import (
    EquilibriumResult,
    RootConfig,
    SolverError,
    find_equilibrium,
    temperature_of_u,
    u_of_temperature,
)
from .model import (
    BE9,
    AtomicSpecies,
    CrystalState,
    ParBeam,
    PerpBeam,
    ThermalState,
    areal_density,
    scatter_rate,
    scatter_rate_density,
    velocity_pdf,
)
from .quadrature import (
    GaussHermiteRule,
    QuadratureError,
    QuadratureSpec,
    gauss_hermite,
    gauss_lorentz_moments,
    integrate_1d,
    integrate_disk_xy,
)
from .sweep import (
    ContourSlope,
    GridAxis,
    SweepGrid,
    ZeroTorqueCurve,
    contour_slope,
    sweep_physical,
    sweep_reduced,
    zero_torque_curve,
)
