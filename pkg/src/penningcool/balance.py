"""Energy balance and torque integrals for the cooled rotating crystal.

The perpendicular beam exchanges energy with the in-plane motion through
three channels: velocity-dependent photon scattering (cooling or heating),
photon recoil (always heating), and the work done by the rotating wall
while its torque holds the rotation frequency fixed against the beam's
torque.  All of these reduce to integrals of the same Gaussian-Lorentzian
kernel over the beam/crystal overlap; the variants differ only in the
weight multiplying the velocity moments.

The x-integral of the half-spheroid density over a chord is analytic,

    integral dx sigma(x, y) = sigma0 (pi R_c / 2) (1 - y^2 / R_c^2),

which collapses every disk integral here to one adaptive y-integral of a
velocity-moment kernel.  (The generic two-dimensional route survives in
:func:`penningcool.quadrature.integrate_disk_xy` and is exercised against
this one in the test suite.)

A dimensionless reduced form of the balance, valid for beams narrow
compared to the crystal and nearly centered, depends only on the
saturation s0, the scaled detuning-at-beam-center, the scaled Doppler
dispersion across the waist, and the scaled recoil; it is what makes the
two-parameter cooling maps species-universal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import HBAR
from .model import AtomicSpecies, CrystalState, ParBeam, PerpBeam, ThermalState
from .quadrature import (
    QuadratureSpec,
    _integrate_family,
    gauss_hermite,
    gauss_lorentz_moments,
)

__all__ = [
    "ReducedParams",
    "BalanceResult",
    "BalanceEvaluator",
    "laser_torque",
    "laser_energy_rate",
    "laser_wall_energy_rate",
    "parallel_recoil_rate",
    "total_balance_full",
    "total_balance_reduced",
    "rescale_beam",
    "reduced_params_from_physical",
]

# Half-width (in thermal-velocity units) below which the Gauss-Hermite
# rule can no longer resolve the Lorentzian and the velocity moments
# switch to graded adaptive panels.  Measured against the closed-form
# moments: at width 1.0 a 40-node rule is good to ~2e-7 relative, at 0.5
# it degrades to ~5e-4.
NARROW_WIDTH = 1.0

#: beam profile support, in waists away from the axis, kept in integrals
_WINDOW_WAISTS = 8.0


@dataclass(frozen=True)
class ReducedParams:
    """Dimensionless inputs of the reduced energy balance.

    ``delta_d``: laser detuning from the Doppler-shifted resonance at the
    beam center, in half-linewidths.  ``delta_w``: spread of rotational
    Doppler shifts across the beam waist, in half-linewidths.  ``kappa``:
    recoil velocity times wavenumber in half-linewidths, the only place
    the species enters.
    """

    s0: float
    delta_d: float
    delta_w: float
    kappa: float

    def __post_init__(self):
        if self.s0 < 0:
            raise ValueError(f"s0 must be non-negative, got {self.s0}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.delta_w < 0:
            raise ValueError(
                f"delta_w must be non-negative, got {self.delta_w}")


@dataclass(frozen=True)
class BalanceResult:
    """Energy-exchange rates (W) and laser torque (N m) at one state.

    ``total_rate`` is the exact sum of the three channel rates; a positive
    value means the in-plane motion is gaining energy.
    """

    laser_rate: float
    wall_rate: float
    parallel_rate: float
    total_rate: float
    torque: float


def rescale_beam(beam: PerpBeam, crystal: CrystalState) -> PerpBeam:
    """Fold the density's lowest-order y-falloff into the beam profile.

    Absorbing sqrt(1 - y^2/R_c^2) ~ exp(-y^2/2R_c^2) into the Gaussian
    beam yields an equivalent beam with both the squared waist and the
    offset shrunk by 1 / (1 + w_y^2 / 4 R_c^2).
    """
    shrink = 1.0 / (1.0 + beam.waist**2 / (4 * crystal.radius**2))
    return replace(beam, waist=beam.waist * math.sqrt(shrink),
                   offset=beam.offset * shrink)


def reduced_params_from_physical(species, beam, crystal,
                                 density_corrected=False) -> ReducedParams:
    """Scale a physical configuration down to the reduced parameters.

    With ``density_corrected=True`` the beam is first passed through
    :func:`rescale_beam`, extending the reduced model's validity to
    moderately wide beams at low saturation.
    """
    if density_corrected:
        beam = rescale_beam(beam, crystal)
    half_line = species.linewidth / 2
    k = species.wavenumber
    return ReducedParams(
        s0=beam.s0,
        delta_d=(beam.detuning - k * crystal.omega_r * beam.offset) / half_line,
        delta_w=k * crystal.omega_r * beam.waist / half_line,
        kappa=k * species.recoil_velocity / half_line,
    )


def parallel_recoil_rate(species, par: ParBeam, crystal) -> float:
    """Recoil heating rate (W) of in-plane motion from the axial beam.

    The axial beam is taken as uniform over the crystal and parked half a
    linewidth below resonance; each ion then scatters at
    gamma_0 S_par / (2 (1 + S_par)), and two thirds of the emitted-photon
    recoil energy lands in the plane:

        gamma_0 S_par / (1 + S_par) * (R/3) * N.
    """
    s = par.saturation
    if s == 0:
        return 0.0
    return (species.linewidth * s / (1 + s)
            * species.recoil_energy / 3 * crystal.ion_number)


def _chord_density(crystal, y):
    """Exact x-integral of the areal density along the chord at height y."""
    out = crystal.sigma0 * (math.pi * crystal.radius / 2) * (
        1 - (y / crystal.radius) ** 2)
    return np.where(np.abs(y) < crystal.radius, out, 0.0)


class BalanceEvaluator:
    """Precomputed kernels for repeated balance evaluations at varying u.

    Root finding evaluates the energy balance dozens of times per
    configuration; this object keeps the geometry fixed and exposes both
    scalar and batched evaluation.  The batched form shares one adaptive
    y-mesh across all u values, turning a scan into a single family
    integration.
    """

    def __init__(self, species, beam, crystal, par=None, spec=None,
                 rule=None):
        self.species = species
        self.beam = beam
        self.crystal = crystal
        self.par = par or ParBeam(0.0)
        self.rule = rule or gauss_hermite(40)
        self.window = (max(-crystal.radius,
                           beam.offset - _WINDOW_WAISTS * beam.waist),
                       min(crystal.radius,
                           beam.offset + _WINDOW_WAISTS * beam.waist))
        # scale for absolute-tolerance floors: the beam scattering at full
        # saturation over every ion, times the recoil momentum transfer
        peak_rate = species.linewidth * beam.s0 / (1 + 2 * beam.s0)
        self._power_scale = (peak_rate * HBAR * species.wavenumber
                             * species.recoil_velocity * crystal.ion_number)
        self._torque_scale = (peak_rate * HBAR * species.wavenumber
                              * crystal.radius * crystal.ion_number)
        if spec is None:
            spec = QuadratureSpec()
        self.spec = spec
        self.parallel_rate = parallel_recoil_rate(species, self.par, crystal)

    def _breakpoints(self, s_typ=None):
        """Seed the y-mesh with the beam profile and the resonance stripe."""
        beam, crystal, species = self.beam, self.crystal, self.species
        pts = [beam.offset + f * beam.waist
               for f in (-5, -3, -2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2, 3, 5)]
        if crystal.omega_r != 0.0:
            k = species.wavenumber
            y_res = beam.detuning / (k * crystal.omega_r)
            stripe = species.linewidth / (2 * k * abs(crystal.omega_r))
            if s_typ is None:
                s_typ = beam.s0
            stripe *= math.sqrt(1 + 2 * s_typ)
            pts.extend(y_res + f * stripe for f in (-4, -2, -1, 0, 1, 2, 4))
        return pts

    def _moments(self, y, us):
        """I0, I1 of the velocity Lorentzian at each (y, u); shapes (ny, nu)."""
        species, beam, crystal = self.species, self.beam, self.crystal
        k = species.wavenumber
        s = beam.saturation(y)
        ku = k * us
        center = (beam.detuning - k * crystal.omega_r * y[:, None]) / ku
        width = species.linewidth * np.sqrt(1 + 2 * s)[:, None] / (2 * ku)
        base_width = species.linewidth / (2 * ku)
        narrow = base_width < NARROW_WIDTH
        if not narrow.any():
            return gauss_lorentz_moments(center, width, rule=self.rule)
        i0 = np.empty_like(center)
        i1 = np.empty_like(center)
        wide = ~narrow
        if wide.any():
            i0[:, wide], i1[:, wide] = gauss_lorentz_moments(
                center[:, wide], width[:, wide], rule=self.rule)
        tight = QuadratureSpec(rel_tol=0.1 * self.spec.rel_tol,
                               max_subdivisions=self.spec.max_subdivisions)
        i0[:, narrow], i1[:, narrow] = gauss_lorentz_moments(
            center[:, narrow], width[:, narrow], spec=tight,
            method="adaptive")
        return i0, i1

    def _family(self, us, weight, torque_scaled=False):
        """Integrate a kernel family over y.

        ``weight`` maps (y, us, i0, i1) to the moment combination of the
        integrand; returns the per-u integrals.
        """
        species, beam = self.species, self.beam
        us = np.asarray(us, dtype=float)
        a, b = self.window
        if b <= a:
            return np.zeros(us.shape)

        def f(y):
            s = beam.saturation(y)
            pref = (species.linewidth * s / (1 + 2 * s)
                    * _chord_density(self.crystal, y) / math.sqrt(math.pi))
            i0, i1 = self._moments(y, us)
            wsq = (species.linewidth ** 2 * (1 + 2 * s)[:, None]
                   / (2 * species.wavenumber * us) ** 2)
            return pref[:, None] * wsq * weight(y, us, i0, i1)

        if torque_scaled:
            scale = self._torque_scale
        else:
            scale = self._power_scale * np.maximum(
                1.0, us / self.species.recoil_velocity)
        abs_tol = np.maximum(self.spec.abs_tol, 1e-12 * scale)
        vals, _ = _integrate_family(f, a, b, rel_tol=self.spec.rel_tol,
                                    abs_tol=abs_tol,
                                    max_subdivisions=self.spec.max_subdivisions,
                                    breakpoints=self._breakpoints())
        return vals

    def energy_rate_batch(self, us):
        """Laser+wall energy rate (W) for an array of thermal velocities."""
        species = self.species
        hk = HBAR * species.wavenumber

        def w(y, us, i0, i1):
            return hk * us * (i1 + (species.recoil_velocity / us) * i0)

        return self._family(us, w)

    def total_rate_batch(self, us):
        """Full energy balance including axial-beam recoil, per u."""
        return self.energy_rate_batch(us) + self.parallel_rate

    def total_rate(self, u):
        return float(self.total_rate_batch(np.array([u]))[0])

    def torque(self, u):
        """Net laser torque (N m) on the crystal at thermal velocity u."""
        hk = HBAR * self.species.wavenumber

        def w(y, us, i0, i1):
            return hk * y[:, None] * i0

        return float(self._family(np.array([u]), w, torque_scaled=True)[0])

    def laser_rate(self, u):
        """Energy rate (W) from scattering alone, without the wall's work."""
        species, crystal = self.species, self.crystal
        hk = HBAR * species.wavenumber

        def w(y, us, i0, i1):
            drift = crystal.omega_r * y[:, None]
            return hk * ((drift + species.recoil_velocity) * i0 + us * i1)

        return float(self._family(np.array([u]), w)[0])


def laser_torque(species, beam, crystal, state: ThermalState,
                 spec=None) -> float:
    """Net torque (N m) the perpendicular beam exerts about the trap axis.

    Each scattered photon transfers hbar k along the beam at moment arm y;
    the sign convention makes a beam displaced to the receding side of the
    crystal (offset of the same sign as the rotation drift) spin the
    crystal up.
    """
    return BalanceEvaluator(species, beam, crystal, spec=spec).torque(state.u)


def laser_energy_rate(species, beam, crystal, state: ThermalState,
                      spec=None) -> float:
    """Energy-exchange rate (W) between the beam and the in-plane motion.

    Scattering at rate gamma against the local Doppler-shifted resonance
    transfers hbar k v_x per event plus the recoil share; this is the
    laser-only channel, excluding the rotating wall's work.
    """
    return BalanceEvaluator(species, beam, crystal, spec=spec).laser_rate(
        state.u)


def laser_wall_energy_rate(species, beam, crystal, state: ThermalState,
                           spec=None) -> float:
    """Combined laser and rotating-wall energy rate (W).

    The wall's work -omega_r * torque cancels the drift part of the laser
    channel analytically, leaving the thermal kernel
    hbar k u (v + v_rec / u); this combined form is what the equilibrium
    condition balances against axial-beam recoil.
    """
    ev = BalanceEvaluator(species, beam, crystal, spec=spec)
    return float(ev.energy_rate_batch(np.array([state.u]))[0])


def total_balance_full(species, beam, crystal, state: ThermalState,
                       par: ParBeam | None = None, spec=None) -> BalanceResult:
    """All energy-exchange channels and the torque at one thermal state.

    ``wall_rate`` is constructed as -omega_r * torque (the wall holds the
    rotation frequency fixed, so its work rate is set by the laser torque
    it must cancel), and ``total_rate`` is the exact sum of the three
    channels.
    """
    ev = BalanceEvaluator(species, beam, crystal, par=par, spec=spec)
    torque = ev.torque(state.u)
    laser = ev.laser_rate(state.u)
    wall = -crystal.omega_r * torque
    total = laser + wall + ev.parallel_rate
    return BalanceResult(laser_rate=laser, wall_rate=wall,
                         parallel_rate=ev.parallel_rate, total_rate=total,
                         torque=torque)


def total_balance_reduced(params: ReducedParams, u_scaled, rule=None,
                          spec=None):
    """Dimensionless energy balance of the reduced model.

    ``u_scaled`` is the thermal velocity in units of the recoil velocity;
    it may be an array, in which case one adaptive mesh over the beam
    coordinate is shared by all values.  The result carries an arbitrary
    positive normalization: only its roots and signs are meaningful.
    Positive means net heating.
    """
    spec = spec or QuadratureSpec(rel_tol=1e-9)
    rule = rule or gauss_hermite(40)
    u_scaled = np.asarray(u_scaled, dtype=float)
    scalar = u_scaled.ndim == 0
    us = np.atleast_1d(u_scaled)
    if np.any(us <= 0):
        raise ValueError("u_scaled must be positive")
    ku = params.kappa * us
    narrow = (1.0 / ku) < NARROW_WIDTH

    def f(delta):
        gauss = np.exp(-2 * delta * delta)
        s = params.s0 * gauss
        center = (params.delta_d - params.delta_w * delta[:, None]) / ku
        width = np.sqrt(1 + 2 * s)[:, None] / ku
        if narrow.any():
            i0 = np.empty_like(center)
            i1 = np.empty_like(center)
            wide = ~narrow
            if wide.any():
                i0[:, wide], i1[:, wide] = gauss_lorentz_moments(
                    center[:, wide], width[:, wide], rule=rule)
            tight = QuadratureSpec(rel_tol=0.1 * spec.rel_tol,
                                   max_subdivisions=spec.max_subdivisions)
            i0[:, narrow], i1[:, narrow] = gauss_lorentz_moments(
                center[:, narrow], width[:, narrow], spec=tight,
                method="adaptive")
        else:
            i0, i1 = gauss_lorentz_moments(center, width, rule=rule)
        wsq = width * width
        return gauss[:, None] * wsq / (1 + 2 * s)[:, None] * (
            i1 + i0 / us)

    span = 6.5
    pts = [-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0]
    if params.delta_w > 0:
        d_res = params.delta_d / params.delta_w
        stripe = math.sqrt(1 + 2 * params.s0) / params.delta_w
        pts.extend(d_res + f_ * stripe for f_ in (-4, -2, -1, 0, 1, 2, 4))
    # the kernel magnitude is of order I0 ~ sqrt(pi); tolerate absolutely
    # at the scale a root-bracketing scan cares about
    abs_tol = np.full(us.shape, 1e-14 * math.sqrt(math.pi) / params.kappa)
    vals, _ = _integrate_family(f, -span, span, rel_tol=spec.rel_tol,
                                abs_tol=abs_tol,
                                max_subdivisions=spec.max_subdivisions,
                                breakpoints=pts)
    return float(vals[0]) if scalar else vals
