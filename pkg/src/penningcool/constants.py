"""Physical constants (CODATA 2018) used throughout the package."""

HBAR = 1.054571817e-34      # reduced Planck constant, J s
KB = 1.380649e-23           # Boltzmann constant, J/K
C = 299792458.0             # speed of light, m/s
AMU = 1.66053906660e-27     # atomic mass unit, kg
