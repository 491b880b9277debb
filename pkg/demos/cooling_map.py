"""A desk-scale cooling map: temperature over detuning and beam offset.

The operating diagram of a rotating-crystal cooling setup is a map of
the equilibrium temperature over laser detuning (x) and beam offset
from the rotation axis (y).  Two features matter:

  * a diagonal cold trough -- moving the beam outward shifts the local
    rotational Doppler resonance, so colder operating points line up
    along a stripe whose slope is about 1/(k * omega_r) once converted
    to um per MHz;
  * temperatures rise steeply on the near-resonance side of the trough.

The full-size maps take minutes; this desk-scale 15x15 version shows
the same structure in about ten seconds and writes the same CSV an
analysis pipeline would consume (columns: axis1, axis2, T_perp_K,
torque_Nm, status -- axis1 in rad/s angular detuning, axis2 in m).
"""

import math
import tempfile
from pathlib import Path

import numpy as np

from penningcool.model import BE9, CrystalState, PerpBeam
from penningcool.sweep import contour_slope, sweep_physical

RAD_PER_MHZ = 2e6 * math.pi

crystal = CrystalState(radius=225e-6, sigma0=2.77e9,
                       omega_r=2 * math.pi * 45e3)
beam = PerpBeam(s0=0.5, waist=30e-6, offset=14e-6,
                detuning=-2 * math.pi * 23e6)

dets = np.linspace(-40.0, -10.0, 15) * RAD_PER_MHZ
offs = np.linspace(0.0, 40.0, 15) * 1e-6

print("sweeping a 15 x 15 grid (a few cells per second)...")
grid = sweep_physical(BE9, beam, crystal, detuning_axis=dets,
                      offset_axis=offs)

trough, det_star, off_star = grid.min_temperature()
print(f"\ntrough: {trough * 1e3:.4f} mK at "
      f"{det_star / RAD_PER_MHZ:.1f} MHz, {off_star * 1e6:.1f} um")
print(f"one-ion limit for comparison: "
      f"{BE9.doppler_temperature * 1e3:.3f} mK")

# A crude console rendering: one character per cell, cold to hot.
ramp = " .:-=+*#%@"
temps = np.where(np.isfinite(grid.temperature), grid.temperature, np.nan)
log_t = np.log(temps / trough)
hottest = np.nanmax(log_t)
print("\n  offset 0 um " + " " * max(0, len(offs) - 18) + "-> 40 um")
for i in range(len(dets) - 1, -1, -1):  # red detunings at the bottom
    row = []
    for j in range(len(offs)):
        if not np.isfinite(log_t[i, j]):
            row.append("!")
        else:
            row.append(ramp[int(log_t[i, j] / hottest * (len(ramp) - 1))])
    print(f"  {dets[i] / RAD_PER_MHZ:+6.1f} MHz |{''.join(row)}|")
print("  (' ' = trough, '@' = hottest, '!' = no stable equilibrium)")

# The cold stripe's slope, read off a contour just above the trough,
# against the geometric estimate 1/(k * omega_r) (plus a small waist
# correction) converted to um per MHz.
level = 1.5 * trough
fit = contour_slope(grid, level)
slope = fit.slope * RAD_PER_MHZ / 1e-6
predicted = (1.0 / (BE9.wavenumber * crystal.omega_r)
             * (1 + beam.waist**2 / (4 * crystal.radius**2))
             * RAD_PER_MHZ / 1e-6)
print(f"\ncontour at {level * 1e3:.3f} mK: slope {slope:.3f} um/MHz "
      f"(geometric estimate {predicted:.3f})")

out = Path(tempfile.gettempdir()) / "cooling_map_demo.csv"
with open(out, "w", encoding="utf-8") as fh:
    fh.write("axis1,axis2,T_perp_K,torque_Nm,status\n")
    for i in range(len(dets)):
        for j in range(len(offs)):
            temp = grid.temperature[i, j]
            tau = grid.torque[i, j]
            temp_cell = repr(float(temp)) if np.isfinite(temp) else ""
            tau_cell = repr(float(tau)) if np.isfinite(tau) else ""
            fh.write(f"{float(dets[i])!r},{float(offs[j])!r},"
                     f"{temp_cell},{tau_cell},{grid.status[i, j]}\n")
print(f"full grid written to {out}")
