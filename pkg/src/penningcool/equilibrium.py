"""Root finding for the steady-state thermal velocity.

The equilibrium perpendicular temperature is set by the smallest stable
zero of the net energy-exchange rate as a function of the thermal velocity
u: recoil heating dominates at low u, so the rate starts positive and a
downward crossing is a self-correcting equilibrium.  A logarithmic scan
brackets every sign change, the smallest stable bracket is polished by
bisection, and the remaining crossings are kept for diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import KB

__all__ = [
    "RootConfig",
    "EquilibriumResult",
    "SolverError",
    "find_equilibrium",
    "temperature_of_u",
    "u_of_temperature",
]

CONVERGED = "converged"
NO_ROOT = "no_root"
RUNAWAY = "runaway_heating"


class SolverError(RuntimeError):
    """The equilibrium solver could not produce a trustworthy result."""


@dataclass(frozen=True)
class RootConfig:
    """Bracket and tolerances for the equilibrium search.

    The scan covers [u_min, u_max] with ``scan_points`` logarithmically
    spaced evaluations; bisection stops once the bracket is narrower than
    ``u_rel_tol`` times the root.  ``rate_abs_tol`` bounds the residual
    rate at the reported root; if None it is scaled from the magnitude of
    the rates seen during the scan.
    """

    u_min: float = 1e-3
    u_max: float = 50.0
    u_rel_tol: float = 1e-6
    rate_abs_tol: float | None = None
    max_iterations: int = 200
    scan_points: int = 64

    def __post_init__(self):
        if not 0 < self.u_min < self.u_max:
            raise ValueError(
                f"need 0 < u_min < u_max, got [{self.u_min}, {self.u_max}]")
        if self.u_rel_tol <= 0:
            raise ValueError(
                f"u_rel_tol must be positive, got {self.u_rel_tol}")
        if self.scan_points < 2:
            raise ValueError(
                f"scan_points must be at least 2, got {self.scan_points}")


@dataclass(frozen=True)
class EquilibriumResult:
    """Outcome of the equilibrium search.

    ``status`` is one of "converged", "no_root" (the rate is negative all
    the way down to u_min, so the equilibrium lies below the bracket), or
    "runaway_heating" (no stable crossing and the rate is still positive
    at u_max).  ``crossings`` lists every sign change seen by the scan as
    (u_low, u_high, kind) with kind "stable" or "unstable".
    """

    status: str
    u_star: float | None = None
    temperature: float | None = None
    residual_rate: float | None = None
    stability: str | None = None
    u_bound: float | None = None
    crossings: tuple = field(default_factory=tuple)


def temperature_of_u(species, u):
    """Temperature (K) of a thermal velocity spread: k_B T = m u^2 / 2."""
    if np.any(np.asarray(u) < 0):
        raise ValueError("u must be non-negative")
    return np.asarray(u) ** 2 * species.mass / (2 * KB)


def u_of_temperature(species, temperature):
    """Thermal velocity spread (m/s) at temperature T."""
    if np.any(np.asarray(temperature) < 0):
        raise ValueError("temperature must be non-negative")
    return np.sqrt(2 * KB * np.asarray(temperature) / species.mass)


def find_equilibrium(balance_fn, config=None, species=None, batch_fn=None):
    """Locate the smallest stable zero of a net energy-exchange rate.

    Parameters
    ----------
    balance_fn : callable
        Net rate as a function of thermal velocity u; positive means
        heating.
    config : RootConfig, optional
    species : AtomicSpecies, optional
        If given, the result carries the temperature alongside u.
    batch_fn : callable, optional
        Vectorized variant evaluating an array of u values at once; used
        for the scan when provided.

    Raises
    ------
    SolverError
        If the rate evaluates non-finite, or a refined root fails its
        stability re-check.
    """
    config = config or RootConfig()
    us = np.geomspace(config.u_min, config.u_max, config.scan_points)
    if batch_fn is not None:
        rates = np.asarray(batch_fn(us), dtype=float)
    else:
        rates = np.array([balance_fn(u) for u in us], dtype=float)
    if not np.isfinite(rates).all():
        bad = us[~np.isfinite(rates)][0]
        raise SolverError(f"balance function returned a non-finite rate "
                          f"at u = {bad!r}")

    crossings = []
    for i in range(len(us) - 1):
        a, b = rates[i], rates[i + 1]
        if a > 0 >= b or a == 0 > b:
            crossings.append((float(us[i]), float(us[i + 1]), "stable"))
        elif a < 0 <= b or a == 0 < b:
            crossings.append((float(us[i]), float(us[i + 1]), "unstable"))
    crossings = tuple(crossings)

    scale = float(np.max(np.abs(rates))) if len(rates) else 0.0
    rate_tol = (config.rate_abs_tol if config.rate_abs_tol is not None
                else 1e-8 * scale)

    for u_lo, u_hi, kind in crossings:
        if kind != "stable":
            continue
        a, b = u_lo, u_hi
        iterations = 0
        while iterations < config.max_iterations:
            mid = 0.5 * (a + b)
            if (b - a) <= config.u_rel_tol * mid:
                break
            if balance_fn(mid) > 0:
                a = mid
            else:
                b = mid
            iterations += 1
        u_star = 0.5 * (a + b)
        residual = float(balance_fn(u_star))
        # polish further if the residual is still above tolerance
        while abs(residual) > rate_tol and iterations < config.max_iterations:
            if (b - a) <= 8 * np.finfo(float).eps * b:
                break  # bracket exhausted at float resolution
            if residual > 0:
                a = u_star
            else:
                b = u_star
            u_star = 0.5 * (a + b)
            residual = float(balance_fn(u_star))
            iterations += 1
        eps = 1e-3
        below = balance_fn(u_star * (1 - eps))
        above = balance_fn(u_star * (1 + eps))
        if not (below > 0 > above):
            # a spurious bracket (e.g. quadrature noise); try the next one
            continue
        return EquilibriumResult(
            status=CONVERGED, u_star=float(u_star),
            temperature=(float(temperature_of_u(species, u_star))
                         if species is not None else None),
            residual_rate=residual, stability="stable",
            crossings=crossings)

    if any(kind == "stable" for *_, kind in crossings):
        raise SolverError(
            "every bracketed stable crossing failed its stability re-check")
    if rates[-1] > 0:
        return EquilibriumResult(status=RUNAWAY, crossings=crossings)
    return EquilibriumResult(status=NO_ROOT, u_bound=float(config.u_min),
                             crossings=crossings)
