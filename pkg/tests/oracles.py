"""Independent brute-force references for the integral machinery.

Everything here deliberately avoids the library's quadrature stack: the
column density is a literal midpoint sum along each chord (no closed
form), thermal averages are plain Riemann sums on uniform grids, and
the Gaussian-Lorentzian velocity moments come from the Faddeeva
function.  Slow and dumb on purpose — these exist so the fast paths
have something honest to disagree with.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import wofz

from penningcool.constants import HBAR


def faddeeva_moments(center, width):
    """Closed-form moments of exp(-v^2) against a unit Lorentzian.

    With z = center + i*width,

        I0 = integral exp(-v^2) / ((v - center)^2 + width^2) dv
           = (pi / width) * Re w(z)
        I1 = integral v exp(-v^2) / ((v - center)^2 + width^2) dv
           = center * I0 - pi * Im w(z)

    where w is the Faddeeva function.
    """
    center = np.asarray(center, dtype=float)
    width = np.asarray(width, dtype=float)
    fad = wofz(center + 1j * width)
    i0 = math.pi / width * fad.real
    i1 = center * i0 - math.pi * fad.imag
    return i0, i1


def _midpoints(lo, hi, n):
    """Midpoint grid and cell width for a uniform partition of [lo, hi]."""
    edges = np.linspace(lo, hi, n + 1)
    return 0.5 * (edges[:-1] + edges[1:]), (hi - lo) / n


def riemann_column_density(crystal, ys, nx=400):
    """Chord-integrated areal density at each height by literal x-summation."""
    ys = np.asarray(ys, dtype=float)
    R = crystal.radius
    half = np.sqrt(np.clip(R * R - ys * ys, 0.0, None))
    # midpoint grid along each chord, scaled per row
    frac = (np.arange(nx) + 0.5) / nx
    xs = (2 * frac[None, :] - 1.0) * half[:, None]
    arg = 1.0 - (xs * xs + ys[:, None] ** 2) / (R * R)
    dens = crystal.sigma0 * np.sqrt(np.clip(arg, 0.0, None))
    return dens.sum(axis=1) * (2 * half / nx)


def riemann_ion_number(crystal, n=1500):
    """Total ion count by a uniform 2-D midpoint sum over the disk."""
    R = crystal.radius
    xs, dx = _midpoints(-R, R, n)
    ys, dy = _midpoints(-R, R, n)
    arg = 1.0 - (xs[None, :] ** 2 + ys[:, None] ** 2) / (R * R)
    dens = crystal.sigma0 * np.sqrt(np.clip(arg, 0.0, None))
    return dens.sum() * dx * dy


def riemann_rates(species, beam, crystal, u, nx=400, ny=400, nv=4000,
                  window_waists=10.0):
    """All beam-crystal exchange rates by uniform midpoint sums.

    The scatter rate is evaluated pointwise on a (height, velocity)
    grid, with the thermal velocity substituted as v_x = omega_r*y + u*t
    for t on [-8, 8]; each scattered photon carries hbar*k along the
    beam, so the energy kernel is hbar*k*(v_x + v_rec) and the torque
    kernel is hbar*k*y.

    Returns a dict with keys laser_rate, torque, wall_rate, lw_rate,
    scatter_rate (photons/s), all SI.
    """
    k = species.wavenumber
    gamma = species.linewidth
    R = crystal.radius
    vrec = species.recoil_velocity
    om = crystal.omega_r

    lo = max(-R, beam.offset - window_waists * beam.waist)
    hi = min(R, beam.offset + window_waists * beam.waist)
    ys, dy = _midpoints(lo, hi, ny)
    cols = riemann_column_density(crystal, ys, nx=nx)

    ts, dt = _midpoints(-8.0, 8.0, nv)
    thermal = np.exp(-ts * ts) / math.sqrt(math.pi) * dt

    s = beam.s0 * np.exp(-2 * (ys - beam.offset) ** 2 / beam.waist**2)
    vx = om * ys[:, None] + u * ts[None, :]
    det = (beam.detuning - k * vx) * (2.0 / gamma)
    rate = gamma * s[:, None] / (1 + 2 * s[:, None] + det * det)

    base = (cols * dy)[:, None] * thermal[None, :] * rate
    hk = HBAR * k
    scatter = base.sum()
    laser = (base * (hk * (vx + vrec))).sum()
    torque = hk * (base.sum(axis=1) * ys).sum()
    wall = -om * torque
    return {
        "laser_rate": laser,
        "torque": torque,
        "wall_rate": wall,
        "lw_rate": laser + wall,
        "scatter_rate": scatter,
    }


def draw_parameter_points(n, seed=20260816):
    """Randomized full-model parameter points with the beam off the rim.

    Waist and offset are drawn relative to the crystal radius so that the
    beam's support (a few waists) always sits well inside the disk, where
    both the production integrals and the uniform-grid sums are sharp.
    Returns a list of dicts with SI values plus the thermal velocity u.
    """
    rng = np.random.default_rng(seed)
    points = []
    for _ in range(n):
        radius = rng.uniform(150e-6, 300e-6)
        points.append({
            "radius": radius,
            "sigma0": rng.uniform(1.5e9, 4.0e9),
            "omega_r": 2 * math.pi * rng.uniform(30e3, 250e3),
            "s0": rng.uniform(0.05, 1.0),
            "waist": radius * rng.uniform(0.05, 0.22),
            "offset": radius * rng.uniform(-0.09, 0.18),
            "detuning": -2 * math.pi * rng.uniform(5e6, 40e6),
            "u": rng.uniform(0.3, 3.0),
            "spar": rng.uniform(0.0, 0.4),
        })
    return points


def riemann_reduced(params, u_scaled, ndelta=4000, nv=4000, span=7.0):
    """Dimensionless balance by a double midpoint sum.

    Matches the library's normalization of the reduced model,

        integral d_delta exp(-2 delta^2) / (1 + 2 s)
          * integral dv exp(-v^2) W^2 / ((v - v0)^2 + W^2) (v + 1/u),

    with s = s0 exp(-2 delta^2), v0 = (delta_d - delta_w*delta)/(kappa*u)
    and W = sqrt(1 + 2 s)/(kappa*u).
    """
    u_scaled = float(u_scaled)
    ds, dd = _midpoints(-span, span, ndelta)
    ts, dt = _midpoints(-8.0, 8.0, nv)
    ku = params.kappa * u_scaled

    total = 0.0
    chunk = 250
    for start in range(0, ndelta, chunk):
        d = ds[start:start + chunk]
        gauss = np.exp(-2 * d * d)
        s = params.s0 * gauss
        v0 = (params.delta_d - params.delta_w * d) / ku
        wsq = (1 + 2 * s) / (ku * ku)
        lor = wsq[:, None] / ((ts[None, :] - v0[:, None]) ** 2 + wsq[:, None])
        inner = (np.exp(-ts * ts)[None, :] * lor
                 * (ts[None, :] + 1.0 / u_scaled)).sum(axis=1) * dt
        total += (gauss / (1 + 2 * s) * inner).sum() * dd
    return total
