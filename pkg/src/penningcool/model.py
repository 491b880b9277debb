"""Pointwise physics of a laser-cooled rotating planar ion crystal.

The objects here describe the ingredients of the energy-balance integrals:
an atomic species with a cycling transition, a cooling beam propagating in
the crystal plane with a Gaussian intensity profile, the crystal itself
(a rigid disk of ions with a half-spheroid areal density rotating at the
rotating-wall frequency), and the thermal state of the in-plane motion.

Sign conventions: the beam propagates along +x, displaced by ``offset``
along +y from the crystal center.  Rotation carries ions at height y with
mean velocity ``omega_r * y`` along +x, so an ion on the positive-offset
side recedes from the beam's wavevector.  Detuning is the laser frequency
minus the atomic resonance frequency; red detuning is negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import AMU, HBAR, KB


@dataclass(frozen=True)
class AtomicSpecies:
    """A two-level cycling transition of a trapped ion.

    Parameters
    ----------
    mass : float
        Ion mass in kg.
    wavelength : float
        Transition wavelength in m.
    linewidth : float
        Natural linewidth gamma_0 in rad/s (angular FWHM).
    """

    mass: float
    wavelength: float
    linewidth: float

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.linewidth <= 0:
            raise ValueError(f"linewidth must be positive, got {self.linewidth}")

    @property
    def wavenumber(self):
        """Photon wavenumber k = 2 pi / lambda, rad/m."""
        return 2 * math.pi / self.wavelength

    @property
    def recoil_energy(self):
        """Single-photon recoil energy (hbar k)^2 / 2m, J."""
        return (HBAR * self.wavenumber) ** 2 / (2 * self.mass)

    @property
    def recoil_velocity(self):
        """Effective in-plane recoil velocity 5 hbar k / 6m, m/s.

        One absorption transfers hbar k of momentum along the beam; the
        isotropically emitted photon adds recoil energy of which two thirds
        lands in the crystal plane, giving the 5/6 factor in the in-plane
        energy-balance kernel.
        """
        return 5 * HBAR * self.wavenumber / (6 * self.mass)

    @property
    def doppler_temperature(self):
        """Free-ion Doppler cooling limit hbar gamma_0 / 2 k_B, K."""
        return HBAR * self.linewidth / (2 * KB)


#: Preset for the 313 nm cycling transition of beryllium-9 ions.
BE9 = AtomicSpecies(mass=9.012 * AMU, wavelength=313e-9, linewidth=2 * math.pi * 18e6)


@dataclass(frozen=True)
class PerpBeam:
    """Cooling beam propagating in the crystal plane along +x.

    Parameters
    ----------
    s0 : float
        Peak saturation parameter at the beam axis.
    waist : float
        1/e^2 intensity radius w_y of the Gaussian profile, m.
    offset : float
        Displacement d of the beam axis from the crystal center along +y, m.
    detuning : float
        Laser angular frequency minus atomic resonance, rad/s (red < 0).
    """

    s0: float
    waist: float
    offset: float
    detuning: float

    def __post_init__(self):
        if self.s0 < 0:
            raise ValueError(f"s0 must be non-negative, got {self.s0}")
        if self.waist <= 0:
            raise ValueError(f"waist must be positive, got {self.waist}")

    def saturation(self, y):
        """Saturation parameter S(y) = s0 exp(-2 (y-d)^2 / w_y^2)."""
        y = np.asarray(y, dtype=float)
        return self.s0 * np.exp(-2 * (y - self.offset) ** 2 / self.waist**2)


@dataclass(frozen=True)
class ParBeam:
    """Beam along the rotation axis; only its recoil heating enters here.

    ``saturation`` is the on-axis saturation parameter S_par; the beam is
    assumed to illuminate the crystal uniformly.
    """

    saturation: float = 0.0

    def __post_init__(self):
        if self.saturation < 0:
            raise ValueError(
                f"saturation must be non-negative, got {self.saturation}")


@dataclass(frozen=True)
class CrystalState:
    """Rigid single-plane ion crystal rotating at the wall frequency.

    Parameters
    ----------
    radius : float
        Crystal radius R_c, m.
    sigma0 : float
        Peak (center) areal ion density, 1/m^2.
    omega_r : float
        Rotation angular frequency, rad/s.
    """

    radius: float
    sigma0: float
    omega_r: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if self.sigma0 <= 0:
            raise ValueError(f"sigma0 must be positive, got {self.sigma0}")

    @property
    def ion_number(self):
        """Total ion number, the integral of the areal density."""
        return (2.0 / 3.0) * math.pi * self.radius**2 * self.sigma0


@dataclass(frozen=True)
class ThermalState:
    """In-plane thermal velocity spread u, m/s; k_B T = m u^2 / 2."""

    u: float

    def __post_init__(self):
        if self.u <= 0:
            raise ValueError(f"u must be positive, got {self.u}")


def scatter_rate(species, beam, y, v_x):
    """Photon scatter rate of one ion at height y moving at v_x, 1/s.

    Saturated Lorentzian response with power broadening,

        gamma_0 S(y) / (1 + 2 S(y) + (2 (detuning - k v_x) / gamma_0)^2),

    where the Doppler shift k v_x moves the ion's resonance.
    """
    y = np.asarray(y, dtype=float)
    v_x = np.asarray(v_x, dtype=float)
    s = beam.saturation(y)
    det = (beam.detuning - species.wavenumber * v_x) * (2.0 / species.linewidth)
    return species.linewidth * s / (1 + 2 * s + det * det)


def areal_density(crystal, x, y):
    """Areal ion density of the half-spheroid profile, 1/m^2.

    sigma(x, y) = sigma0 sqrt(1 - r^2/R_c^2) inside the disk, 0 outside.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    arg = 1 - (x * x + y * y) / crystal.radius**2
    return crystal.sigma0 * np.sqrt(np.clip(arg, 0.0, None))


def velocity_pdf(state, crystal, y, v_x):
    """Distribution of v_x for ions at height y, 1/(m/s).

    A Maxwellian of width u centered on the local rotation drift
    omega_r * y:  exp(-(v_x - omega_r y)^2 / u^2) / (u sqrt(pi)).
    """
    y = np.asarray(y, dtype=float)
    v_x = np.asarray(v_x, dtype=float)
    arg = (v_x - crystal.omega_r * y) / state.u
    return np.exp(-arg * arg) / (state.u * math.sqrt(math.pi))


def scatter_rate_density(species, beam, crystal, state, x, y,
                         rule=None, spec=None):
    """Velocity-averaged photon scatter rate per unit area, 1/(m^2 s).

    The thermal average of :func:`scatter_rate` over the local velocity
    distribution, weighted by the areal density:

        sigma(x, y) * integral dv_x P(v_x | y) gamma(y, v_x).

    The velocity integral is a Gaussian-weighted Lorentzian handled by
    :func:`penningcool.quadrature.gauss_lorentz_moments`.
    """
    from .quadrature import gauss_lorentz_moments

    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    s = beam.saturation(y)
    ku = species.wavenumber * state.u
    center = (beam.detuning - species.wavenumber * crystal.omega_r * y) / ku
    width = species.linewidth * np.sqrt(1 + 2 * s) / (2 * ku)
    i0, _ = gauss_lorentz_moments(center, width, rule=rule, spec=spec)
    mean_rate = (species.linewidth * s / (1 + 2 * s)
                 * width**2 * i0 / math.sqrt(math.pi))
    return areal_density(crystal, x, y) * mean_rate
