"""Pointwise physics: species constants, profiles, and rate formulas."""

import math

import numpy as np
import pytest
from scipy import integrate

from oracles import riemann_ion_number
from penningcool.constants import AMU, HBAR, KB
from penningcool.model import (
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
from penningcool.quadrature import QuadratureSpec, integrate_disk_xy


def test_be9_recoil_velocity():
    """The preset's effective recoil velocity is 0.118 m/s to 1%."""
    np.testing.assert_allclose(BE9.recoil_velocity, 0.118, rtol=0.01)


def test_be9_doppler_limit():
    """The preset's free-ion Doppler limit is 0.44 mK to 2%."""
    np.testing.assert_allclose(BE9.doppler_temperature, 0.44e-3, rtol=0.02)


def test_species_derived_quantities():
    sp = AtomicSpecies(mass=9.012 * AMU, wavelength=313e-9,
                       linewidth=2 * math.pi * 18e6)
    k = 2 * math.pi / 313e-9
    np.testing.assert_allclose(sp.wavenumber, k, rtol=1e-15)
    np.testing.assert_allclose(sp.recoil_energy,
                               (HBAR * k) ** 2 / (2 * sp.mass), rtol=1e-15)
    np.testing.assert_allclose(sp.recoil_velocity,
                               5 * HBAR * k / (6 * sp.mass), rtol=1e-15)
    np.testing.assert_allclose(sp.doppler_temperature,
                               HBAR * sp.linewidth / (2 * KB), rtol=1e-15)


@pytest.mark.parametrize("kwargs", [
    {"mass": 0.0},
    {"mass": -1e-26},
    {"wavelength": 0.0},
    {"linewidth": -1.0},
])
def test_species_validation(kwargs):
    full = {"mass": 1e-26, "wavelength": 313e-9, "linewidth": 1e8}
    full.update(kwargs)
    with pytest.raises(ValueError):
        AtomicSpecies(**full)


def test_perp_beam_saturation_profile():
    beam = PerpBeam(s0=0.5, waist=30e-6, offset=10e-6, detuning=-1e8)
    np.testing.assert_allclose(beam.saturation(10e-6), 0.5, rtol=1e-15)
    np.testing.assert_allclose(beam.saturation(10e-6 + 30e-6),
                               0.5 * math.exp(-2), rtol=1e-14)
    np.testing.assert_allclose(beam.saturation(10e-6 - 30e-6),
                               beam.saturation(10e-6 + 30e-6), rtol=1e-14)


def test_perp_beam_validation():
    with pytest.raises(ValueError):
        PerpBeam(s0=-0.1, waist=30e-6, offset=0.0, detuning=0.0)
    with pytest.raises(ValueError):
        PerpBeam(s0=0.5, waist=0.0, offset=0.0, detuning=0.0)


def test_par_beam_validation():
    assert ParBeam().saturation == 0.0
    with pytest.raises(ValueError):
        ParBeam(-0.2)


def test_crystal_validation():
    with pytest.raises(ValueError):
        CrystalState(radius=0.0, sigma0=1e9, omega_r=1e5)
    with pytest.raises(ValueError):
        CrystalState(radius=1e-4, sigma0=-1e9, omega_r=1e5)
    # a non-rotating crystal is legal
    CrystalState(radius=1e-4, sigma0=1e9, omega_r=0.0)


def test_thermal_state_validation():
    with pytest.raises(ValueError):
        ThermalState(0.0)


def test_scatter_rate_formula():
    """Saturated Lorentzian with power broadening, written out by hand."""
    beam = PerpBeam(s0=0.7, waist=30e-6, offset=0.0, detuning=-2e8)
    y, v = 12e-6, 1.3
    s = 0.7 * math.exp(-2 * (y / 30e-6) ** 2)
    det = (-2e8 - BE9.wavenumber * v) * 2 / BE9.linewidth
    expected = BE9.linewidth * s / (1 + 2 * s + det * det)
    np.testing.assert_allclose(scatter_rate(BE9, beam, y, v), expected,
                               rtol=1e-14)


def test_scatter_rate_peaks_on_resonance():
    """The rate peaks where the Doppler shift matches the detuning."""
    beam = PerpBeam(s0=0.7, waist=30e-6, offset=0.0, detuning=-2e8)
    v_res = beam.detuning / BE9.wavenumber
    peak = float(scatter_rate(BE9, beam, 0.0, v_res))
    np.testing.assert_allclose(peak, BE9.linewidth * 0.7 / (1 + 1.4),
                               rtol=1e-14)
    assert peak > scatter_rate(BE9, beam, 0.0, v_res + 0.5)
    assert peak > scatter_rate(BE9, beam, 0.0, v_res - 0.5)


def test_areal_density_profile():
    crystal = CrystalState(radius=200e-6, sigma0=3e9, omega_r=1e5)
    np.testing.assert_allclose(areal_density(crystal, 0.0, 0.0), 3e9)
    np.testing.assert_allclose(
        areal_density(crystal, 100e-6, 0.0), 3e9 * math.sqrt(0.75),
        rtol=1e-14)
    assert areal_density(crystal, 200e-6, 10e-6) == 0.0
    assert areal_density(crystal, 0.0, 250e-6) == 0.0


def test_ion_number_closed_form():
    crystal = CrystalState(radius=225e-6, sigma0=2.77e9, omega_r=1e5)
    expected = (2.0 / 3.0) * math.pi * (225e-6) ** 2 * 2.77e9
    np.testing.assert_allclose(crystal.ion_number, expected, rtol=1e-15)


def test_ion_number_against_riemann_sum():
    crystal = CrystalState(radius=225e-6, sigma0=2.77e9, omega_r=1e5)
    np.testing.assert_allclose(riemann_ion_number(crystal, n=1000),
                               crystal.ion_number, rtol=5e-6)


def test_density_disk_integral():
    """The adaptive disk integrator reproduces the ion count to 1e-8."""
    crystal = CrystalState(radius=225e-6, sigma0=2.77e9, omega_r=1e5)
    value, _ = integrate_disk_xy(
        lambda x, y: areal_density(crystal, x, y), crystal.radius,
        QuadratureSpec(rel_tol=1e-10))
    np.testing.assert_allclose(value, crystal.ion_number, rtol=1e-8)


def test_velocity_pdf_normalization():
    """The thermal distribution integrates to one at any height."""
    crystal = CrystalState(radius=225e-6, sigma0=2.77e9,
                           omega_r=2 * math.pi * 45e3)
    state = ThermalState(0.8)
    for y in (0.0, 20e-6, -150e-6):
        drift = crystal.omega_r * y
        value, _ = integrate.quad(
            lambda v: velocity_pdf(state, crystal, y, v),
            drift - 9 * state.u, drift + 9 * state.u, epsabs=0.0,
            epsrel=1e-12)
        np.testing.assert_allclose(value, 1.0, rtol=1e-8)


def test_velocity_pdf_centered_on_rotation_drift():
    crystal = CrystalState(radius=225e-6, sigma0=2.77e9,
                           omega_r=2 * math.pi * 45e3)
    state = ThermalState(0.8)
    y = 30e-6
    drift = crystal.omega_r * y
    peak = velocity_pdf(state, crystal, y, drift)
    np.testing.assert_allclose(peak, 1 / (0.8 * math.sqrt(math.pi)),
                               rtol=1e-14)
    np.testing.assert_allclose(
        velocity_pdf(state, crystal, y, drift + 0.5),
        velocity_pdf(state, crystal, y, drift - 0.5), rtol=1e-12)


def test_scatter_rate_density_vs_direct_quadrature():
    """The moment-based thermal average matches brute-force integration."""
    crystal = CrystalState(radius=225e-6, sigma0=2.77e9,
                           omega_r=2 * math.pi * 45e3)
    beam = PerpBeam(s0=0.5, waist=30e-6, offset=10e-6,
                    detuning=-2 * math.pi * 15e6)
    state = ThermalState(0.9)
    x, y = 50e-6, 18e-6
    drift = crystal.omega_r * y
    expected, _ = integrate.quad(
        lambda v: (velocity_pdf(state, crystal, y, v)
                   * scatter_rate(BE9, beam, y, v)),
        drift - 9 * state.u, drift + 9 * state.u, epsabs=0.0, epsrel=1e-11)
    expected *= areal_density(crystal, x, y)
    value = scatter_rate_density(BE9, beam, crystal, state, x, y)
    np.testing.assert_allclose(value, expected, rtol=1e-7)
