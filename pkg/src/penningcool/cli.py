"""Command-line front end.

Subcommands::

    penningcool limit       --config c.cfg [--out report.json]
    penningcool map         --config c.cfg --out grid.csv [--format ...]
    penningcool reduced-map --config c.cfg --out grid.csv [--format ...]
    penningcool zero-torque --config c.cfg --out curve.csv [--format ...]
    penningcool slope       --map grid.csv --level-mk 0.8

Grid commands write a CSV (or a self-contained JSON document, or a
gnuplot nonuniform matrix) plus a ``.json`` sidecar carrying the exact
config text, the package version, and the runtime.  CSV bytes are
deterministic for a given config and version.  Exit codes: 0 success,
1 configuration/usage error, 2 solver non-convergence in ``limit`` mode.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ._version import __version__
from .balance import BalanceEvaluator, reduced_params_from_physical
from .config import ConfigError, emit_config, load_config, parse_config
from .equilibrium import CONVERGED, find_equilibrium
from .quadrature import gauss_hermite
from .sweep import GridAxis, SweepGrid, contour_slope, sweep_physical, \
    sweep_reduced, zero_torque_curve

RAD_PER_MHZ = 2e6 * math.pi

CSV_HEADER = ["axis1", "axis2", "T_perp_K", "torque_Nm", "status"]


class _Parser(argparse.ArgumentParser):
    # route usage errors through the config-error exit path (code 1)
    def error(self, message):
        raise ConfigError(message)


def _fmt(value):
    return repr(float(value))


def _cell(value):
    return "" if value is None or not np.isfinite(value) else _fmt(value)


def _jsonable(obj):
    """Recursively convert to JSON-safe types; non-finite floats -> None."""
    if isinstance(obj, dict):
        return {key: _jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(val) for val in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj) if np.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _grid_rows(grid: SweepGrid):
    n1, n2 = grid.shape
    for i in range(n1):
        for j in range(n2):
            torque = None if grid.torque is None else grid.torque[i, j]
            yield [_fmt(grid.axis1.values[i]), _fmt(grid.axis2.values[j]),
                   _cell(grid.temperature[i, j]), _cell(torque),
                   grid.status[i, j]]


def _curve_rows(curve):
    for det, off, temp, tau in zip(curve.detunings, curve.offsets,
                                   curve.temperatures, curve.torques):
        yield [_fmt(det), _fmt(off), _cell(temp), _cell(tau), CONVERGED]


def _write_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        writer.writerows(rows)


def _write_gnuplot(path, grid):
    lines = ["# temperature (K), gnuplot nonuniform matrix: "
             "splot '...' nonuniform matrix"]
    header = [str(len(grid.axis2))] + [_fmt(v) for v in grid.axis2.values]
    lines.append(" ".join(header))
    for i, a1 in enumerate(grid.axis1.values):
        row = [_fmt(a1)] + [
            _fmt(t) if np.isfinite(t) else "NaN"
            for t in grid.temperature[i]]
        lines.append(" ".join(row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _sidecar_path(out):
    return Path(out).with_suffix(".json")


def _write_sidecar(out, command, cfg, metadata, extra=None):
    doc = {
        "command": command,
        "version": __version__,
        "config_ini": emit_config(cfg),
        "metadata": _jsonable(metadata),
    }
    if extra:
        doc.update(_jsonable(extra))
    with open(_sidecar_path(out), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_grid(out, fmt, command, cfg, grid):
    if fmt == "json":
        doc = {
            "command": command,
            "version": __version__,
            "config_ini": emit_config(cfg),
            "axis1": {"name": grid.axis1.name, "unit": grid.axis1.unit,
                      "values": grid.axis1.values.tolist()},
            "axis2": {"name": grid.axis2.name, "unit": grid.axis2.unit,
                      "values": grid.axis2.values.tolist()},
            "temperature_K": _jsonable(grid.temperature),
            "torque_Nm": _jsonable(grid.torque),
            "status": grid.status.tolist(),
            "metadata": _jsonable(grid.metadata),
        }
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return
    if fmt == "gnuplot":
        _write_gnuplot(out, grid)
    else:
        _write_csv(out, _grid_rows(grid))
    _write_sidecar(out, command, cfg, grid.metadata)


def _load(args):
    cfg = load_config(args.config)
    if args.workers is not None:
        return cfg, args.workers
    return cfg, cfg.workers


def _require(cfg, command, **fields):
    missing = [name for name, value in fields.items() if value is None]
    if missing:
        raise ConfigError(
            f"{command} needs {', '.join(missing)} in [solver]")


def cmd_limit(args):
    cfg, _ = _load(args)
    rule = gauss_hermite(cfg.hermite_order)
    ev = BalanceEvaluator(cfg.species, cfg.perp_beam, cfg.crystal,
                          par=cfg.par_beam, spec=cfg.quad_spec, rule=rule)
    res = find_equilibrium(ev.total_rate, cfg.root_config,
                           species=cfg.species, batch_fn=ev.total_rate_batch)
    reduced = reduced_params_from_physical(cfg.species, cfg.perp_beam,
                                           cfg.crystal)
    u_report = res.u_star if res.status == CONVERGED else cfg.root_config.u_min
    torque = ev.torque(u_report)
    laser = ev.laser_rate(u_report)
    wall = -cfg.crystal.omega_r * torque
    report = {
        "status": res.status,
        "T_perp_K": res.temperature,
        "u_star_mps": res.u_star,
        "torque_Nm": torque,
        "laser_rate_W": laser,
        "wall_rate_W": wall,
        "parallel_rate_W": ev.parallel_rate,
        "total_rate_W": laser + wall + ev.parallel_rate,
        "delta_d": reduced.delta_d,
        "delta_w": reduced.delta_w,
        "doppler_limit_K": cfg.species.doppler_temperature,
    }
    if res.status != CONVERGED:
        report["T_perp_K"] = None
        report["u_star_mps"] = None
        report["rates_reported_at_u_mps"] = u_report
    for key, value in report.items():
        print(f"{key}: {value}")
    if res.status == CONVERGED:
        print(f"T_perp_mK: {res.temperature * 1e3:.6f}")
    if args.out:
        doc = {"command": "limit", "version": __version__,
               "config_ini": emit_config(cfg), "report": _jsonable(report)}
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0 if res.status == CONVERGED else 2


def cmd_map(args):
    cfg, workers = _load(args)
    _require(cfg, "map", detuning_axis_mhz=cfg.detuning_axis,
             offset_axis_um=cfg.offset_axis)
    grid = sweep_physical(
        cfg.species, cfg.perp_beam, cfg.crystal, cfg.par_beam,
        cfg.detuning_axis, cfg.offset_axis, root_config=cfg.root_config,
        spec=cfg.quad_spec, rule=gauss_hermite(cfg.hermite_order),
        workers=workers)
    _write_grid(args.out, args.format, "map", cfg, grid)
    return 0


def cmd_reduced_map(args):
    cfg, workers = _load(args)
    _require(cfg, "reduced-map", delta_d_axis=cfg.delta_d_axis,
             delta_w_axis=cfg.delta_w_axis)
    grid = sweep_reduced(
        cfg.species, cfg.perp_beam.s0, cfg.delta_d_axis, cfg.delta_w_axis,
        root_config=cfg.root_config, spec=cfg.quad_spec,
        rule=gauss_hermite(cfg.hermite_order), workers=workers)
    _write_grid(args.out, args.format, "reduced-map", cfg, grid)
    return 0


def cmd_zero_torque(args):
    cfg, _ = _load(args)
    _require(cfg, "zero-torque", detuning_axis_mhz=cfg.detuning_axis,
             offset_bracket_um=cfg.offset_bracket)
    curve = zero_torque_curve(
        cfg.species, cfg.perp_beam, cfg.crystal, cfg.par_beam,
        cfg.detuning_axis, cfg.offset_bracket,
        bracket_width=cfg.bracket_width, root_config=cfg.root_config,
        spec=cfg.quad_spec, rule=gauss_hermite(cfg.hermite_order))
    if args.format == "json":
        doc = {"command": "zero-torque", "version": __version__,
               "config_ini": emit_config(cfg),
               "curve": _jsonable(asdict(curve))}
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return 0
    _write_csv(args.out, _curve_rows(curve))
    _write_sidecar(args.out, "zero-torque", cfg, curve.metadata,
                   extra={"curve": {
                       "detunings_rad_s": curve.detunings,
                       "offsets_m": curve.offsets,
                       "u_star_mps": curve.u_star,
                       "temperatures_K": curve.temperatures,
                       "torques_Nm": curve.torques,
                       "torque_low_Nm": curve.torque_low,
                       "torque_high_Nm": curve.torque_high,
                       "bracket_width_m": curve.bracket_width,
                   }})
    return 0


def _read_map_csv(path):
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
    except OSError as exc:
        raise ConfigError(f"cannot read map {path}: {exc}") from None
    except StopIteration:
        raise ConfigError(f"{path}: empty map file") from None
    if header != CSV_HEADER:
        raise ConfigError(
            f"{path}: unexpected header {header!r}; this does not look "
            f"like a grid CSV (expected {CSV_HEADER!r})")
    if not rows:
        raise ConfigError(f"{path}: map has no data rows")
    try:
        axis1 = []
        for row in rows:
            value = float(row[0])
            if value not in axis1:
                axis1.append(value)
        n1 = len(axis1)
        n2 = len(rows) // n1
        if n1 * n2 != len(rows):
            raise ConfigError(f"{path}: rows do not form a full grid")
        axis2 = [float(row[1]) for row in rows[:n2]]
        temp = np.full((n1, n2), np.nan)
        status = np.full((n1, n2), "", dtype="<U32")
        for idx, row in enumerate(rows):
            i, j = divmod(idx, n2)
            temp[i, j] = float(row[2]) if row[2] else np.nan
            status[i, j] = row[4]
    except (ValueError, IndexError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path}: malformed grid CSV: {exc}") from None
    return SweepGrid(
        axis1=GridAxis("axis1", "", np.array(axis1)),
        axis2=GridAxis("axis2", "", np.array(axis2)),
        temperature=temp, torque=None,
        u_star=np.full((n1, n2), np.nan), status=status)


def cmd_slope(args):
    grid = _read_map_csv(args.map)
    level = args.level_mk * 1e-3
    try:
        result = contour_slope(grid, level, min_span=args.min_span)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    to_um_mhz = RAD_PER_MHZ / 1e-6
    print(f"level_mK: {args.level_mk}")
    print(f"slope_um_per_MHz: {result.slope * to_um_mhz:.6f}")
    print(f"fit_residual_um: {result.residual / 1e-6:.6f}")
    print(f"n_points: {result.n_points}")
    print("branch_slopes_um_per_MHz: "
          + ", ".join(f"{s * to_um_mhz:.6f}" for s in result.branch_slopes))

    sidecar = _sidecar_path(args.map)
    if sidecar.exists():
        with open(sidecar, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        if doc.get("command") == "map" and "config_ini" in doc:
            cfg = parse_config(doc["config_ini"], source=str(sidecar))
            k = cfg.species.wavenumber
            prediction = (1.0 / (k * cfg.crystal.omega_r)) * (
                1 + cfg.perp_beam.waist**2 / (4 * cfg.crystal.radius**2))
            ratio = result.slope / prediction
            print(f"predicted_slope_um_per_MHz: "
                  f"{prediction * to_um_mhz:.6f}")
            print(f"observed_over_predicted: {ratio:.4f}")
    else:
        print(f"note: no sidecar at {sidecar}; prediction skipped")
    return 0


def build_parser():
    parser = _Parser(
        prog="penningcool",
        description="Doppler-cooling equilibria, torque maps, and "
                    "zero-torque curves for rotating planar ion crystals.")
    parser.add_argument("--version", action="version",
                        version=f"penningcool {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, needs_out=True, needs_config=True):
        p = sub.add_parser(name, help=help_text)
        if needs_config:
            p.add_argument("--config", required=True,
                           help="experiment config file")
            p.add_argument("--workers", type=int, default=None,
                           help="worker processes for grid cells")
        if needs_out:
            p.add_argument("--out", required=True, help="output file")
            p.add_argument("--format", choices=("csv", "json", "gnuplot"),
                           default="csv", help="output format (default csv)")
        p.set_defaults(func=func)
        return p

    p_limit = sub.add_parser(
        "limit", help="equilibrium temperature at one operating point")
    p_limit.add_argument("--config", required=True)
    p_limit.add_argument("--workers", type=int, default=None)
    p_limit.add_argument("--out", default=None,
                         help="optional JSON report path")
    p_limit.set_defaults(func=cmd_limit)

    add("map", cmd_map,
        "equilibrium temperature and torque over detuning x offset")
    add("reduced-map", cmd_reduced_map,
        "dimensionless cooling map over delta_d x delta_w")
    add("zero-torque", cmd_zero_torque,
        "offset of vanishing torque per detuning")

    p_slope = sub.add_parser(
        "slope", help="contour-line slope of a temperature map CSV")
    p_slope.add_argument("--map", required=True, help="grid CSV from 'map'")
    p_slope.add_argument("--level-mk", type=float, required=True,
                         help="contour level in millikelvin")
    p_slope.add_argument("--min-span", type=float, default=0.3,
                         help="minimum axis-1 span fraction per branch")
    p_slope.set_defaults(func=cmd_slope)
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
