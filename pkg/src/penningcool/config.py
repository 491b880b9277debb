"""Experiment configuration files.

Configs are INI text with one section per physical block and explicit
units in the key names (``rotation_khz``, ``waist_um``, ``detuning_mhz``),
matching how such parameters are usually quoted.  Parsing converts every
value to SI exactly once; all downstream code sees SI only.  Unknown keys
or sections are rejected outright so a typo cannot silently fall back to
a default.  Detunings are angular-frequency detunings quoted as
`` detuning / 2 pi `` in MHz, negative meaning red of resonance.

Grid axes are written ``start:stop:count`` (inclusive, linearly spaced)
and brackets ``low:high``.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass

import numpy as np

from .constants import AMU
from .equilibrium import RootConfig
from .model import BE9, AtomicSpecies, CrystalState, ParBeam, PerpBeam
from .quadrature import QuadratureSpec

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config",
           "emit_config"]

#: multiplicative SI conversions for unit-suffixed keys
_TO_SI = {
    "mass_amu": AMU,
    "wavelength_nm": 1e-9,
    "linewidth_mhz": 2e6 * math.pi,
    "radius_um": 1e-6,
    "rotation_khz": 2e3 * math.pi,
    "waist_um": 1e-6,
    "offset_um": 1e-6,
    "detuning_mhz": 2e6 * math.pi,
    "bracket_width_um": 1e-6,
}

_KNOWN_KEYS = {
    "species": {"preset", "mass_amu", "wavelength_nm", "linewidth_mhz"},
    "crystal": {"radius_um", "sigma0_per_m2", "rotation_khz"},
    "perp_beam": {"s0", "waist_um", "offset_um", "detuning_mhz"},
    "par_beam": {"spar"},
    "solver": {
        "u_min_mps", "u_max_mps", "u_rel_tol", "rate_abs_tol_w",
        "max_iterations", "scan_points", "hermite_order", "quad_rel_tol",
        "max_subdivisions", "workers",
        "detuning_axis_mhz", "offset_axis_um", "delta_d_axis", "delta_w_axis",
        "offset_bracket_um", "bracket_width_um",
    },
}

_SPECIES_PRESETS = {"be9": BE9}


class ConfigError(ValueError):
    """A configuration file could not be parsed or validated."""


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """A fully parsed experiment: SI values plus solver settings.

    Axis and bracket fields are None when the config does not define
    them; the commands that need them complain by name.
    """

    species: AtomicSpecies
    crystal: CrystalState
    perp_beam: PerpBeam
    par_beam: ParBeam
    root_config: RootConfig
    quad_spec: QuadratureSpec
    hermite_order: int
    workers: int | None
    detuning_axis: np.ndarray | None
    offset_axis: np.ndarray | None
    delta_d_axis: np.ndarray | None
    delta_w_axis: np.ndarray | None
    offset_bracket: tuple | None
    bracket_width: float
    species_preset: str | None


def _float(section, key, raw, source):
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(
            f"{source}: [{section}] {key} = {raw!r} is not a number") from None


def _int(section, key, raw, source):
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(
            f"{source}: [{section}] {key} = {raw!r} is not an integer"
        ) from None


def _axis(section, key, raw, source):
    parts = raw.split(":")
    if len(parts) != 3:
        raise ConfigError(
            f"{source}: [{section}] {key} = {raw!r}; axes are "
            f"written start:stop:count")
    start = _float(section, key, parts[0], source)
    stop = _float(section, key, parts[1], source)
    count = _int(section, key, parts[2], source)
    if count < 1:
        raise ConfigError(
            f"{source}: [{section}] {key}: count must be >= 1, got {count}")
    return np.linspace(start, stop, count)


def _bracket(section, key, raw, source):
    parts = raw.split(":")
    if len(parts) != 2:
        raise ConfigError(
            f"{source}: [{section}] {key} = {raw!r}; brackets are "
            f"written low:high")
    return (_float(section, key, parts[0], source),
            _float(section, key, parts[1], source))


def parse_config(text, source="<config>"):
    """Parse INI text into an :class:`ExperimentConfig` (all SI)."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(
                f"{source}: unknown section [{section}]; expected "
                f"{sorted(_KNOWN_KEYS)}")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(
                    f"{source}: unknown key {key!r} in [{section}]; known "
                    f"keys: {sorted(_KNOWN_KEYS[section])}")

    def get(section, key, conv=_float):
        if section not in parser or key not in parser[section]:
            return None
        return conv(section, key, parser[section][key].strip(), source)

    def si(section, key):
        value = get(section, key)
        return None if value is None else value * _TO_SI[key]

    def defaulted(value, fallback):
        return fallback if value is None else value

    # species: a preset name, or the three raw atomic numbers
    preset = None
    if "species" in parser and "preset" in parser["species"]:
        name = parser["species"]["preset"].strip()
        preset = name
        if name.lower() not in _SPECIES_PRESETS:
            raise ConfigError(
                f"{source}: unknown species preset {name!r}; available: "
                f"{sorted(_SPECIES_PRESETS)}")
        extras = set(parser["species"]) - {"preset"}
        if extras:
            raise ConfigError(
                f"{source}: [species] preset conflicts with raw keys "
                f"{sorted(extras)}")
        species = _SPECIES_PRESETS[name.lower()]
    else:
        raw = {key: si("species", key)
               for key in ("mass_amu", "wavelength_nm", "linewidth_mhz")}
        missing = [key for key, val in raw.items() if val is None]
        if missing:
            raise ConfigError(
                f"{source}: [species] needs a preset or all of "
                f"mass_amu/wavelength_nm/linewidth_mhz; missing {missing}")
        species = AtomicSpecies(mass=raw["mass_amu"],
                                wavelength=raw["wavelength_nm"],
                                linewidth=raw["linewidth_mhz"])

    required = {"crystal": ("radius_um", "sigma0_per_m2", "rotation_khz"),
                "perp_beam": ("s0", "waist_um", "offset_um", "detuning_mhz")}
    for section, keys in required.items():
        if section not in parser:
            raise ConfigError(f"{source}: missing section [{section}]")
        missing = [key for key in keys if key not in parser[section]]
        if missing:
            raise ConfigError(
                f"{source}: [{section}] is missing {missing}")

    try:
        crystal = CrystalState(radius=si("crystal", "radius_um"),
                               sigma0=get("crystal", "sigma0_per_m2"),
                               omega_r=si("crystal", "rotation_khz"))
        perp = PerpBeam(s0=get("perp_beam", "s0"),
                        waist=si("perp_beam", "waist_um"),
                        offset=si("perp_beam", "offset_um"),
                        detuning=si("perp_beam", "detuning_mhz"))
        par = ParBeam(defaulted(get("par_beam", "spar"), 0.0))

        root_defaults = RootConfig()
        root_config = RootConfig(
            u_min=defaulted(get("solver", "u_min_mps"), root_defaults.u_min),
            u_max=defaulted(get("solver", "u_max_mps"), root_defaults.u_max),
            u_rel_tol=defaulted(get("solver", "u_rel_tol"),
                                root_defaults.u_rel_tol),
            rate_abs_tol=get("solver", "rate_abs_tol_w"),
            max_iterations=defaulted(get("solver", "max_iterations", _int),
                                     root_defaults.max_iterations),
            scan_points=defaulted(get("solver", "scan_points", _int),
                                  root_defaults.scan_points),
        )
        quad_defaults = QuadratureSpec()
        quad_spec = QuadratureSpec(
            rel_tol=defaulted(get("solver", "quad_rel_tol"),
                              quad_defaults.rel_tol),
            max_subdivisions=defaulted(
                get("solver", "max_subdivisions", _int),
                quad_defaults.max_subdivisions),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{source}: {exc}") from None

    detuning_axis = get("solver", "detuning_axis_mhz", _axis)
    if detuning_axis is not None:
        detuning_axis = detuning_axis * _TO_SI["detuning_mhz"]
    offset_axis = get("solver", "offset_axis_um", _axis)
    if offset_axis is not None:
        offset_axis = offset_axis * _TO_SI["offset_um"]
    bracket = get("solver", "offset_bracket_um", _bracket)
    if bracket is not None:
        bracket = (bracket[0] * 1e-6, bracket[1] * 1e-6)
    bracket_width = defaulted(si("solver", "bracket_width_um"), 0.1e-6)
    if bracket_width <= 0:
        raise ConfigError(
            f"{source}: [solver] bracket_width_um must be positive")

    return ExperimentConfig(
        species=species,
        crystal=crystal,
        perp_beam=perp,
        par_beam=par,
        root_config=root_config,
        quad_spec=quad_spec,
        hermite_order=defaulted(get("solver", "hermite_order", _int), 40),
        workers=get("solver", "workers", _int),
        detuning_axis=detuning_axis,
        offset_axis=offset_axis,
        delta_d_axis=get("solver", "delta_d_axis", _axis),
        delta_w_axis=get("solver", "delta_w_axis", _axis),
        offset_bracket=bracket,
        bracket_width=bracket_width,
        species_preset=preset,
    )


def load_config(path):
    """Read and parse a config file; errors carry the file name."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, source=str(path))


def _fmt(value):
    return repr(float(value))


def _fmt_axis(values, factor=1.0):
    values = np.asarray(values) / factor
    return f"{_fmt(values[0])}:{_fmt(values[-1])}:{values.size}"


def emit_config(config: ExperimentConfig) -> str:
    """Serialize back to INI text; parse(emit(c)) reproduces c's values.

    SI values are divided back by the same factors the parser multiplies
    by, so a round trip is exact apart from one multiply/divide rounding
    (well inside 1e-12 relative).
    """
    out = configparser.ConfigParser(interpolation=None)
    sp = config.species
    if config.species_preset is not None:
        out["species"] = {"preset": config.species_preset}
    else:
        out["species"] = {
            "mass_amu": _fmt(sp.mass / AMU),
            "wavelength_nm": _fmt(sp.wavelength / 1e-9),
            "linewidth_mhz": _fmt(sp.linewidth / _TO_SI["linewidth_mhz"]),
        }
    out["crystal"] = {
        "radius_um": _fmt(config.crystal.radius / 1e-6),
        "sigma0_per_m2": _fmt(config.crystal.sigma0),
        "rotation_khz": _fmt(config.crystal.omega_r / _TO_SI["rotation_khz"]),
    }
    out["perp_beam"] = {
        "s0": _fmt(config.perp_beam.s0),
        "waist_um": _fmt(config.perp_beam.waist / 1e-6),
        "offset_um": _fmt(config.perp_beam.offset / 1e-6),
        "detuning_mhz": _fmt(config.perp_beam.detuning
                             / _TO_SI["detuning_mhz"]),
    }
    out["par_beam"] = {"spar": _fmt(config.par_beam.saturation)}
    solver = {
        "u_min_mps": _fmt(config.root_config.u_min),
        "u_max_mps": _fmt(config.root_config.u_max),
        "u_rel_tol": _fmt(config.root_config.u_rel_tol),
        "max_iterations": str(config.root_config.max_iterations),
        "scan_points": str(config.root_config.scan_points),
        "hermite_order": str(config.hermite_order),
        "quad_rel_tol": _fmt(config.quad_spec.rel_tol),
        "max_subdivisions": str(config.quad_spec.max_subdivisions),
        "bracket_width_um": _fmt(config.bracket_width / 1e-6),
    }
    if config.root_config.rate_abs_tol is not None:
        solver["rate_abs_tol_w"] = _fmt(config.root_config.rate_abs_tol)
    if config.workers is not None:
        solver["workers"] = str(config.workers)
    if config.detuning_axis is not None:
        solver["detuning_axis_mhz"] = _fmt_axis(config.detuning_axis,
                                                _TO_SI["detuning_mhz"])
    if config.offset_axis is not None:
        solver["offset_axis_um"] = _fmt_axis(config.offset_axis, 1e-6)
    if config.delta_d_axis is not None:
        solver["delta_d_axis"] = _fmt_axis(config.delta_d_axis)
    if config.delta_w_axis is not None:
        solver["delta_w_axis"] = _fmt_axis(config.delta_w_axis)
    if config.offset_bracket is not None:
        lo, hi = config.offset_bracket
        solver["offset_bracket_um"] = f"{_fmt(lo / 1e-6)}:{_fmt(hi / 1e-6)}"
    out["solver"] = solver

    buf = io.StringIO()
    out.write(buf)
    return buf.getvalue()
