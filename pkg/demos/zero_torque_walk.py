"""Walking the zero-torque curve: where the laser stops fighting the wall.

An off-axis cooling beam inevitably torques the rotating crystal: the
near side and far side of the beam see different rotational Doppler
shifts, so one side scatters harder.  The rotating wall can hold the
rotation frequency against that torque, but operating at nonzero torque
means shear stress across the crystal and extra sensitivity to wall
imperfections.

For every detuning there is (over some range) a beam offset where the
net torque vanishes -- heating drag from inside the beam's resonant
stripe cancels braking from outside it.  This script walks that curve:
for each detuning it brackets the torque's sign change in the offset,
bisects it down to 0.1 um, and reports the equilibrium temperature at
the zero-torque offset.  Takes a few seconds.
"""

import math

import numpy as np

from penningcool.model import BE9, CrystalState, PerpBeam
from penningcool.sweep import zero_torque_curve

RAD_PER_MHZ = 2e6 * math.pi

crystal = CrystalState(radius=225e-6, sigma0=2.77e9,
                       omega_r=2 * math.pi * 45e3)
beam = PerpBeam(s0=0.5, waist=30e-6, offset=14e-6,
                detuning=-2 * math.pi * 23e6)

dets_mhz = np.arange(-28.0, -19.0, 2.0)
print(f"bracketing zero torque in offset 0..40 um at "
      f"{len(dets_mhz)} detunings...")
curve = zero_torque_curve(BE9, beam, crystal,
                          detuning_axis=dets_mhz * RAD_PER_MHZ,
                          offset_bracket=(0.0, 40e-6),
                          bracket_width=0.1e-6)

header = (f"{'det (MHz)':>10} {'offset (um)':>12} {'T (mK)':>8} "
          f"{'bracket torque (N m)':>24}")
print("\n" + header)
print("-" * len(header))
for det, off, temp, lo, hi in zip(curve.detunings, curve.offsets,
                                  curve.temperatures, curve.torque_low,
                                  curve.torque_high):
    print(f"{det / RAD_PER_MHZ:>10.1f} {off * 1e6:>12.2f} "
          f"{temp * 1e3:>8.4f} {lo:>11.2e} .. {hi:+.2e}")

det, off, temp = curve.min_temperature_point()
print(f"\ncoolest torque-free operating point: "
      f"{det / RAD_PER_MHZ:.1f} MHz at {off * 1e6:.2f} um "
      f"({temp * 1e3:.4f} mK)")
print("Below the zero-torque offset the torque is negative (the beam")
print("drags the rotation); above it, positive.  Redder detunings push")
print("the operating point to slightly smaller offsets along a line set")
print("by the rotational Doppler gradient k * omega_r.")
