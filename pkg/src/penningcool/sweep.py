"""Parameter sweeps, zero-torque curves, and contour-line slopes.

A cooling map is a grid of independent equilibrium solves over laser
detuning and beam offset; each converged cell records the equilibrium
temperature, thermal velocity, and the beam torque there.  On top of the
maps this module extracts the operating curve along which the torque
vanishes (by bisecting the offset at fixed detuning) and the slope of
constant-temperature contour lines (by marching squares plus straight-line
fits through the quasi-linear contour branches).

Cells are independent, so sweeps optionally fan out over a process pool;
results are deterministic and independent of the worker count.  One
percent of the converged cells of every sweep are re-checked for root
stability with a fixed-seed sample.
"""

from __future__ import annotations

import math
import multiprocessing
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from skimage import measure

from ._version import __version__
from .balance import BalanceEvaluator, ReducedParams, total_balance_reduced
from .equilibrium import (
    CONVERGED,
    RootConfig,
    SolverError,
    find_equilibrium,
    temperature_of_u,
)
from .model import ParBeam
from .quadrature import QuadratureError

__all__ = [
    "GridAxis",
    "SweepGrid",
    "ZeroTorqueCurve",
    "ContourSlope",
    "sweep_physical",
    "sweep_reduced",
    "zero_torque_curve",
    "contour_slope",
]

#: fixed so repeated runs of the same sweep are reproducible end to end
_SPOT_CHECK_SEED = 916801
_SPOT_CHECK_FRACTION = 0.01
_STABILITY_EPS = 1e-3

#: stand-in value for non-converged cells during contour extraction; the
#: points interpolated against it are discarded afterwards
_BAD_FILL = 1e6


@dataclass(frozen=True, eq=False)
class GridAxis:
    """One sweep axis: a name, a unit label, and strictly monotone values."""

    name: str
    unit: str
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError(
                f"axis {self.name!r} must be a nonempty 1-D sequence")
        if not np.isfinite(vals).all():
            raise ValueError(f"axis {self.name!r} contains non-finite values")
        if vals.size > 1:
            steps = np.diff(vals)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise ValueError(
                    f"axis {self.name!r} must be strictly monotone")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size


def _as_axis(values, name, unit):
    if isinstance(values, GridAxis):
        return values
    return GridAxis(name=name, unit=unit, values=values)


@dataclass
class SweepGrid:
    """Equilibrium temperatures (and torques) over a two-axis grid.

    Non-converged cells hold NaN in the numeric arrays and carry their
    solver status ("no_root", "runaway_heating", or "error") in
    ``status``.  ``torque`` is None for reduced-model sweeps, which have
    no absolute torque scale.  ``metadata`` snapshots the inputs, the
    package version, and the runtime.
    """

    axis1: GridAxis
    axis2: GridAxis
    temperature: np.ndarray
    torque: np.ndarray | None
    u_star: np.ndarray
    status: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (len(self.axis1), len(self.axis2))
        for name in ("temperature", "u_star", "status"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} array must have shape {shape}")
        if self.torque is not None and self.torque.shape != shape:
            raise ValueError(f"torque array must have shape {shape}")

    @property
    def shape(self):
        return self.temperature.shape

    def min_temperature(self):
        """Coolest converged cell, as (T, axis1 value, axis2 value).

        Raises ValueError when no cell converged.
        """
        i, j = np.unravel_index(np.nanargmin(self.temperature), self.shape)
        return (float(self.temperature[i, j]), float(self.axis1.values[i]),
                float(self.axis2.values[j]))


@dataclass
class ZeroTorqueCurve:
    """Operating curve along which the beam exerts no net torque.

    ``torque_low`` and ``torque_high`` are the torques at the final
    bisection bracket ends (opposite signs by construction, a bracket no
    wider than ``bracket_width``); ``torques`` holds the residual torque
    at the reported midpoint, and ``temperatures`` and ``u_star`` the
    equilibrium there.  Detunings whose offset scan showed no torque sign
    change are simply absent.
    """

    detunings: np.ndarray
    offsets: np.ndarray
    u_star: np.ndarray
    temperatures: np.ndarray
    torques: np.ndarray
    torque_low: np.ndarray
    torque_high: np.ndarray
    bracket_width: float
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return self.detunings.size

    @property
    def points(self):
        """(detuning, offset) pairs in scan order."""
        return list(zip(self.detunings.tolist(), self.offsets.tolist()))

    def min_temperature_point(self):
        """(detuning, offset, temperature) of the coolest curve point."""
        if self.detunings.size == 0:
            raise ValueError("the zero-torque curve is empty")
        i = int(np.argmin(self.temperatures))
        return (float(self.detunings[i]), float(self.offsets[i]),
                float(self.temperatures[i]))


@dataclass(frozen=True)
class ContourSlope:
    """Fitted direction of the constant-temperature contour lines.

    ``slope`` is d(axis2)/d(axis1) in the grid's SI axis units;
    ``residual`` is the span-weighted rms deviation of the contour points
    from the fitted lines, in axis-2 units.
    """

    level: float
    slope: float
    residual: float
    n_points: int
    branch_slopes: tuple


def _config_snapshot(species, crystal, beam=None, par=None, root_config=None):
    snap = {
        "version": __version__,
        "species": asdict(species),
        "crystal": asdict(crystal),
        "par_beam": asdict(par) if par is not None else asdict(ParBeam(0.0)),
    }
    if beam is not None:
        snap["perp_beam"] = asdict(beam)
    if root_config is not None:
        snap["solver"] = asdict(root_config)
    return snap


def _run_tasks(fn, tasks, workers):
    if workers is not None and workers > 1:
        chunk = max(1, len(tasks) // (4 * workers))
        with multiprocessing.Pool(workers) as pool:
            return pool.map(fn, tasks, chunksize=chunk)
    return [fn(task) for task in tasks]


def _solve_physical_cell(args):
    # module level so process pools can pickle it
    i, j, species, beam, crystal, par, root_config, spec, rule = args
    try:
        ev = BalanceEvaluator(species, beam, crystal, par=par, spec=spec,
                              rule=rule)
        res = find_equilibrium(ev.total_rate, root_config, species=species,
                               batch_fn=ev.total_rate_batch)
        if res.status != CONVERGED:
            return i, j, res.status, math.nan, math.nan, math.nan, ""
        tau = ev.torque(res.u_star)
        return i, j, res.status, res.u_star, res.temperature, tau, ""
    except (QuadratureError, SolverError) as exc:
        return i, j, "error", math.nan, math.nan, math.nan, str(exc)


def sweep_physical(species, beam_template, crystal, par=None,
                   detuning_axis=None, offset_axis=None, *,
                   root_config=None, spec=None, rule=None, workers=None):
    """Equilibrium temperature and torque over a detuning/offset grid.

    ``beam_template`` supplies the saturation and waist; its detuning and
    offset are overridden cell by cell from the axes (detuning in rad/s,
    offset in m).  A failed cell never aborts the sweep: its status is
    recorded and its numbers are NaN.
    """
    if detuning_axis is None or offset_axis is None:
        raise TypeError("detuning_axis and offset_axis are required")
    axis1 = _as_axis(detuning_axis, "detuning", "rad/s")
    axis2 = _as_axis(offset_axis, "offset", "m")
    root_config = root_config or RootConfig()
    start = time.perf_counter()

    tasks = [
        (i, j, species,
         replace(beam_template, detuning=float(det), offset=float(off)),
         crystal, par, root_config, spec, rule)
        for i, det in enumerate(axis1.values)
        for j, off in enumerate(axis2.values)
    ]
    results = _run_tasks(_solve_physical_cell, tasks, workers)

    shape = (len(axis1), len(axis2))
    temperature = np.full(shape, np.nan)
    torque = np.full(shape, np.nan)
    u_star = np.full(shape, np.nan)
    status = np.full(shape, "", dtype="<U32")
    cell_errors = {}
    for i, j, stat, u, temp, tau, err in results:
        status[i, j] = stat
        u_star[i, j] = u
        temperature[i, j] = temp
        torque[i, j] = tau
        if err:
            cell_errors[f"{i},{j}"] = err

    metadata = _config_snapshot(species, crystal, beam=beam_template, par=par,
                                root_config=root_config)
    metadata["axes"] = {axis1.name: axis1.values.tolist(),
                        axis2.name: axis2.values.tolist()}
    metadata["workers"] = workers
    if cell_errors:
        metadata["cell_errors"] = cell_errors
    grid = SweepGrid(axis1=axis1, axis2=axis2, temperature=temperature,
                     torque=torque, u_star=u_star, status=status,
                     metadata=metadata)

    def rate_at(i, j, u):
        beam = replace(beam_template, detuning=float(axis1.values[i]),
                       offset=float(axis2.values[j]))
        ev = BalanceEvaluator(species, beam, crystal, par=par, spec=spec,
                              rule=rule)
        return ev.total_rate(u)

    _spot_check_stability(grid, rate_at)
    grid.metadata["runtime_seconds"] = time.perf_counter() - start
    return grid


def _solve_reduced_cell(args):
    i, j, species, params, root_config, spec, rule = args

    def balance(u_scaled):
        return total_balance_reduced(params, u_scaled, rule=rule, spec=spec)

    try:
        res = find_equilibrium(balance, root_config, batch_fn=balance)
        if res.status != CONVERGED:
            return i, j, res.status, math.nan, math.nan, ""
        u = res.u_star * species.recoil_velocity
        return i, j, res.status, u, float(temperature_of_u(species, u)), ""
    except (QuadratureError, SolverError, ValueError) as exc:
        return i, j, "error", math.nan, math.nan, str(exc)


def reduced_kappa(species):
    """Recoil velocity as a Doppler shift, in half-linewidths."""
    return (species.wavenumber * species.recoil_velocity
            / (species.linewidth / 2))


def sweep_reduced(species, s0, delta_d_axis, delta_w_axis, *,
                  root_config=None, spec=None, rule=None, workers=None):
    """Equilibrium temperature over the dimensionless cooling map.

    Axes are the scaled detuning (delta_d, negative = red) and the scaled
    Doppler dispersion across the waist (delta_w >= 0), both in
    half-linewidths.  The species enters only through the scaled recoil
    and the conversion of the root back to kelvin.  The result carries no
    torque array.
    """
    axis1 = _as_axis(delta_d_axis, "delta_d", "half-linewidths")
    axis2 = _as_axis(delta_w_axis, "delta_w", "half-linewidths")
    root_config = root_config or RootConfig()
    v_rec = species.recoil_velocity
    scaled_config = replace(root_config, u_min=root_config.u_min / v_rec,
                            u_max=root_config.u_max / v_rec)
    kappa = reduced_kappa(species)
    start = time.perf_counter()

    tasks = []
    for i, dd in enumerate(axis1.values):
        for j, dw in enumerate(axis2.values):
            params = ReducedParams(s0=s0, delta_d=float(dd),
                                   delta_w=float(dw), kappa=kappa)
            tasks.append((i, j, species, params, scaled_config, spec, rule))
    results = _run_tasks(_solve_reduced_cell, tasks, workers)

    shape = (len(axis1), len(axis2))
    temperature = np.full(shape, np.nan)
    u_star = np.full(shape, np.nan)
    status = np.full(shape, "", dtype="<U32")
    cell_errors = {}
    for i, j, stat, u, temp, err in results:
        status[i, j] = stat
        u_star[i, j] = u
        temperature[i, j] = temp
        if err:
            cell_errors[f"{i},{j}"] = err

    metadata = {
        "version": __version__,
        "species": asdict(species),
        "s0": s0,
        "kappa": kappa,
        "solver": asdict(root_config),
        "axes": {axis1.name: axis1.values.tolist(),
                 axis2.name: axis2.values.tolist()},
        "workers": workers,
    }
    if cell_errors:
        metadata["cell_errors"] = cell_errors
    grid = SweepGrid(axis1=axis1, axis2=axis2, temperature=temperature,
                     torque=None, u_star=u_star, status=status,
                     metadata=metadata)

    def rate_at(i, j, u):
        params = ReducedParams(s0=s0, delta_d=float(axis1.values[i]),
                               delta_w=float(axis2.values[j]), kappa=kappa)
        return total_balance_reduced(params, u / v_rec, rule=rule, spec=spec)

    _spot_check_stability(grid, rate_at)
    grid.metadata["runtime_seconds"] = time.perf_counter() - start
    return grid


def _spot_check_stability(grid, rate_at, fraction=_SPOT_CHECK_FRACTION):
    """Re-verify root stability on a fixed-seed sample of converged cells.

    ``rate_at(i, j, u)`` re-evaluates the balance for cell (i, j); the
    rate must be heating just below the recorded root and cooling just
    above it.  A failure means the sweep recorded an untrustworthy root,
    which is a bug, so it raises rather than flagging the cell.
    """
    conv = np.argwhere(grid.status == CONVERGED)
    if len(conv) == 0:
        grid.metadata["stability_spot_check"] = {"sampled": 0, "passed": True}
        return
    rng = np.random.default_rng(_SPOT_CHECK_SEED)
    n = min(len(conv), max(1, math.ceil(fraction * len(conv))))
    picks = conv[rng.choice(len(conv), size=n, replace=False)]
    for i, j in picks:
        u = grid.u_star[i, j]
        below = rate_at(i, j, u * (1 - _STABILITY_EPS))
        above = rate_at(i, j, u * (1 + _STABILITY_EPS))
        if not (below > 0 > above):
            raise SolverError(
                f"stability spot-check failed at cell ({i}, {j}): "
                f"rate is {below!r} below and {above!r} above the root")
    grid.metadata["stability_spot_check"] = {"sampled": n, "passed": True}


def _solve_at_offset(species, beam_template, crystal, par, detuning, offset,
                     root_config, spec, rule):
    """Equilibrium at one (detuning, offset): (u*, T, torque) or None."""
    beam = replace(beam_template, detuning=float(detuning),
                   offset=float(offset))
    try:
        ev = BalanceEvaluator(species, beam, crystal, par=par, spec=spec,
                              rule=rule)
        res = find_equilibrium(ev.total_rate, root_config, species=species,
                               batch_fn=ev.total_rate_batch)
    except (QuadratureError, SolverError):
        return None
    if res.status != CONVERGED:
        return None
    return res.u_star, res.temperature, ev.torque(res.u_star)


def zero_torque_curve(species, beam_template, crystal, par=None,
                      detuning_axis=None, offset_bracket=None, *,
                      bracket_width=1e-7, scan_points=9,
                      root_config=None, spec=None, rule=None):
    """Locus of (detuning, offset) pairs with vanishing beam torque.

    For each detuning, the equilibrium torque is sampled at
    ``scan_points`` offsets across ``offset_bracket``; the first adjacent
    sign change is bisected (re-solving the equilibrium at every trial
    offset) until the bracket is narrower than ``bracket_width``.
    Detunings without a sign change between converged samples are
    omitted; no sign change anywhere yields an empty curve, not an error.
    """
    if detuning_axis is None or offset_bracket is None:
        raise TypeError("detuning_axis and offset_bracket are required")
    axis = _as_axis(detuning_axis, "detuning", "rad/s")
    d_lo, d_hi = float(offset_bracket[0]), float(offset_bracket[1])
    if not d_lo < d_hi:
        raise ValueError(
            f"offset_bracket must be an increasing pair, got {offset_bracket}")
    if bracket_width <= 0:
        raise ValueError(f"bracket_width must be positive, got {bracket_width}")
    if scan_points < 2:
        raise ValueError(f"scan_points must be at least 2, got {scan_points}")
    root_config = root_config or RootConfig()
    start = time.perf_counter()

    def solve(det, d):
        return _solve_at_offset(species, beam_template, crystal, par, det, d,
                                root_config, spec, rule)

    rows = []
    for det in axis.values:
        samples = [(d, solve(det, d))
                   for d in np.linspace(d_lo, d_hi, scan_points)]
        bracket = None
        for (da, sa), (db, sb) in zip(samples, samples[1:]):
            if sa is None or sb is None:
                continue
            if sa[2] * sb[2] < 0:
                bracket = (da, sa[2], db, sb[2])
                break
        if bracket is None:
            continue
        a, tau_a, b, tau_b = bracket
        failed = False
        while (b - a) > bracket_width:
            mid = 0.5 * (a + b)
            sol = solve(det, mid)
            if sol is None:
                failed = True
                break
            if (sol[2] > 0) == (tau_a > 0):
                a, tau_a = mid, sol[2]
            else:
                b, tau_b = mid, sol[2]
        if failed:
            continue
        d_star = 0.5 * (a + b)
        sol = solve(det, d_star)
        if sol is None:
            continue
        rows.append((float(det), d_star, sol[0], sol[1], sol[2],
                     tau_a, tau_b))

    cols = (np.array([r[k] for r in rows]) for k in range(7))
    dets, offs, us, temps, taus, tau_lo, tau_hi = cols
    metadata = _config_snapshot(species, crystal, beam=beam_template, par=par,
                                root_config=root_config)
    metadata["detunings_scanned"] = axis.values.tolist()
    metadata["offset_bracket"] = [d_lo, d_hi]
    metadata["runtime_seconds"] = time.perf_counter() - start
    return ZeroTorqueCurve(detunings=dets, offsets=offs, u_star=us,
                           temperatures=temps, torques=taus,
                           torque_low=tau_lo, torque_high=tau_hi,
                           bracket_width=bracket_width, metadata=metadata)


def _bad_adjacent(points, bad):
    """Mask of contour points interpolated from any non-converged node."""
    r, c = points[:, 0], points[:, 1]
    n1, n2 = bad.shape
    r0 = np.clip(np.floor(r).astype(int), 0, n1 - 1)
    r1 = np.clip(np.ceil(r).astype(int), 0, n1 - 1)
    c0 = np.clip(np.floor(c).astype(int), 0, n2 - 1)
    c1 = np.clip(np.ceil(c).astype(int), 0, n2 - 1)
    return bad[r0, c0] | bad[r0, c1] | bad[r1, c0] | bad[r1, c1]


def _index_runs(mask):
    """Maximal runs of consecutive True positions, as index arrays."""
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return []
    breaks = np.flatnonzero(np.diff(idx) > 1) + 1
    return np.split(idx, breaks)


def _monotone_runs(x):
    """Slices over x covering maximal runs of one direction of travel."""
    if x.size < 2:
        return []
    d = np.sign(np.diff(x))
    nz = np.flatnonzero(d)
    if nz.size == 0:
        return []
    dirs = d.copy()
    dirs[:nz[0]] = d[nz[0]]
    last = dirs[nz[0]]
    for i in range(nz[0], dirs.size):
        if dirs[i] == 0:
            dirs[i] = last
        else:
            last = dirs[i]
    out = []
    begin = 0
    for i in range(1, dirs.size):
        if dirs[i] != dirs[i - 1]:
            out.append(slice(begin, i + 1))
            begin = i
    out.append(slice(begin, x.size))
    return out


def contour_slope(grid, level, *, min_span=0.3, min_points=5):
    """Slope of the constant-temperature contour lines at ``level`` (K).

    The level set is extracted by marching squares with linear
    interpolation along cell edges.  Points interpolated from
    non-converged cells are dropped, each connected piece is split into
    branches monotone along axis 1, and branches spanning at least
    ``min_span`` of the axis-1 range are fitted with straight lines.
    The reported slope is the span-weighted average over branches, in
    axis-2 units per axis-1 unit.

    Raises ValueError when the level set is empty or too fragmented for
    a meaningful fit.
    """
    temp = np.asarray(grid.temperature, dtype=float)
    if temp.shape[0] < 2 or temp.shape[1] < 2:
        raise ValueError("contour extraction needs at least a 2x2 grid")
    bad = ~np.isfinite(temp)
    filled = np.where(bad, _BAD_FILL, temp)
    x_axis = grid.axis1.values
    y_axis = grid.axis2.values
    span_required = min_span * abs(x_axis[-1] - x_axis[0])

    branches = []
    for poly in measure.find_contours(filled, level):
        keep = ~_bad_adjacent(poly, bad)
        for run in _index_runs(keep):
            pts = poly[run]
            x = np.interp(pts[:, 0], np.arange(x_axis.size), x_axis)
            y = np.interp(pts[:, 1], np.arange(y_axis.size), y_axis)
            for seg in _monotone_runs(x):
                xs, ys = x[seg], y[seg]
                span = abs(xs[-1] - xs[0])
                if xs.size < min_points or span < span_required:
                    continue
                intercept, slope = np.polynomial.polynomial.polyfit(xs, ys, 1)
                rms = float(np.sqrt(np.mean(
                    (ys - (intercept + slope * xs)) ** 2)))
                branches.append((span, float(slope), rms, xs.size))

    if not branches:
        raise ValueError(
            f"no contour branch at level {level!r} spans {min_span:.0%} "
            f"of the axis-1 range")
    spans = np.array([b[0] for b in branches])
    slopes = np.array([b[1] for b in branches])
    rmss = np.array([b[2] for b in branches])
    weight = spans / spans.sum()
    return ContourSlope(
        level=float(level),
        slope=float(np.sum(weight * slopes)),
        residual=float(np.sqrt(np.sum(weight * rmss**2))),
        n_points=int(sum(b[3] for b in branches)),
        branch_slopes=tuple(float(s) for s in slopes),
    )
