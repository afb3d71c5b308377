"""Run configuration: flat ``key = value`` files with unit-suffixed quantities.

Physical quantities are quoted strings such as ``"100 um"``,
``"2pi * 3 MHz"`` or ``"10 * gamma"`` (the latter for ``omega`` only).
Hz-family units are read as s^-1; write the ``2pi *`` prefix for cyclic
frequencies.  Everything is converted to SI on load.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .analysis import PEAK_THRESHOLD, SMOOTHING, ScanGrid
from .errors import (
    ConfigError,
    ConfigParseError,
    InvalidParameterError,
    MissingKeyError,
    UnitError,
    UnknownKeyError,
)
from .params import PhysicalParams
from .propagation import COMOVING, DEFAULT_N_T, DEFAULT_PADDING, LAB

PRESETS = ("paper-rb85",)

UNITS = {
    "Hz": ("rate", 1.0),
    "MHz": ("rate", 1e6),
    "GHz": ("rate", 1e9),
    "rad/s": ("rate", 1.0),
    "s": ("time", 1.0),
    "ns": ("time", 1e-9),
    "m": ("length", 1.0),
    "um": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "m^-3": ("density", 1.0),
    "cm^-3": ("density", 1e6),
    "m/s": ("velocity", 1.0),
    "s^-2": ("coupling", 1.0),
}

QUANTITIES = {
    "gamma": "rate",
    "omega": "rate",
    "v1": "velocity",
    "v2": "velocity",
    "coupling_1": "coupling",
    "coupling_2": "coupling",
    "density": "density",
    "length": "length",
    "wavelength": "length",
    "pulse_duration": "time",
    "center_time": "time",
}

# key -> (accepted python types, default)
SETTINGS = {
    "channel": ((int,), 1),
    "amplitude": ((int, float), 1.0),
    "n_t": ((int,), DEFAULT_N_T),
    "n_z": ((int,), None),
    "window_padding": ((int, float), DEFAULT_PADDING),
    "snapshots": ((list,), []),
    "coupling_step": ((str,), "cayley"),
    "frame": ((str,), LAB),
    "strictness": ((int, float), 3.0),
    "peak_threshold": ((int, float), PEAK_THRESHOLD),
    "smoothing": ((int,), SMOOTHING),
    "scan_start": ((int, float), 0.0),
    "scan_stop": ((int, float), 1.0),
    "scan_step": ((int, float), 0.01),
    "scan_phases": ((list,), [0.0]),
    "sweep_omega_over_gamma": ((list,), [6.0, 10.0, 14.0]),
    "out_dir": ((str,), None),
}

REQUIRED = ("gamma", "omega", ("v1", "coupling_1"), ("v2", "coupling_2"),
            "density", "length", "wavelength", "pulse_duration")

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"^\s*(?P<twopi>2\s*pi\s*\*\s*)?(?P<num>{_NUMBER})\s*(?P<unit>\S+)\s*$")
_RELATIVE = re.compile(rf"^\s*(?P<num>{_NUMBER})\s*\*\s*gamma\s*$")


@dataclass(frozen=True)
class RunConfig:
    params: PhysicalParams
    channel: int = 1
    amplitude: float = 1.0
    center_time: float = 0.0
    n_t: int = DEFAULT_N_T
    n_z: int | None = None
    window_padding: float = DEFAULT_PADDING
    snapshots: tuple = ()
    coupling_step: str = "cayley"
    frame: str = LAB
    strictness: float = 3.0
    peak_threshold: float = PEAK_THRESHOLD
    smoothing: int = SMOOTHING
    scan: ScanGrid = ScanGrid()
    sweep_omega_over_gamma: tuple = (6.0, 10.0, 14.0)
    out_dir: str | None = None
    command: str | None = None


def parse_quantity(text, kind, gamma=None):
    """Convert ``"<2pi *> number unit"`` to SI; ``"k * gamma"`` needs ``gamma``."""
    if not isinstance(text, str):
        raise UnitError(f"expected a quoted value with a unit suffix, got {text!r}")
    rel = _RELATIVE.match(text)
    if rel:
        if kind != "rate" or gamma is None:
            raise UnitError(f"'{text}': only omega may be given relative to gamma")
        return float(rel["num"]) * gamma
    m = _QUANTITY.match(text)
    if not m:
        raise UnitError(f"cannot parse quantity '{text}'")
    unit = m["unit"]
    if unit not in UNITS:
        raise UnitError(f"unknown unit '{unit}' in '{text}'")
    unit_kind, scale = UNITS[unit]
    if unit_kind != kind:
        raise UnitError(f"'{text}' has {unit_kind} units, expected {kind}")
    value = float(m["num"]) * scale
    if m["twopi"]:
        if kind != "rate":
            raise UnitError(f"'2pi *' only applies to rates: '{text}'")
        value *= 2.0 * math.pi
    return value


def _line_of(text, key):
    for n, line in enumerate(text.splitlines(), start=1):
        if re.match(rf"^\s*{re.escape(key)}\s*=", line):
            return n
    return None


def _read_toml(text, source):
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        if line is None:
            found = re.search(r"line (\d+)", str(exc))
            line = int(found.group(1)) if found else None
        raise ConfigParseError(f"{source}: {exc}", line=line) from None
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigParseError(f"{source}: tables are not supported ('{key}')", line=_line_of(text, f"[{key}"))
    return data


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}' (available: {', '.join(PRESETS)})")
    return resources.files("timebin_sim").joinpath("presets", f"{name}.toml").read_text(encoding="utf-8")


def load_config(path=None, preset=None) -> RunConfig:
    """Parse a config file, optionally layered over a bundled preset.

    Keys in ``path`` override the preset.  Raises ConfigParseError (with
    line number), UnknownKeyError, MissingKeyError or UnitError.
    """
    raw, lines = {}, {}
    sources = []
    if preset is not None:
        sources.append((preset_text(preset), f"preset {preset}"))
    if path is not None:
        try:
            sources.append((Path(path).read_text(encoding="utf-8"), str(path)))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not sources:
        raise ConfigError("give a config file or a preset")
    for text, source in sources:
        data = _read_toml(text, source)
        for key, value in data.items():
            if key not in QUANTITIES and key not in SETTINGS:
                line = _line_of(text, key)
                where = f"{source}, line {line}" if line else source
                raise UnknownKeyError(f"{where}: unknown key '{key}'")
            raw[key] = value
            lines[key] = (source, _line_of(text, key))
    return _build(raw, lines)


def _with_location(exc, key, lines):
    source, line = lines.get(key, (None, None))
    where = f"{source}, line {line}: " if line else ""
    return type(exc)(f"{where}{key}: {exc}")


def _build(raw, lines) -> RunConfig:
    for req in REQUIRED:
        names = req if isinstance(req, tuple) else (req,)
        if not any(n in raw for n in names):
            raise MissingKeyError(names[0])

    si = {}
    try:
        for key in ("gamma", "omega", "v1", "v2", "coupling_1", "coupling_2", "density",
                    "length", "wavelength", "pulse_duration", "center_time"):
            if key in raw:
                si[key] = parse_quantity(raw[key], QUANTITIES[key], gamma=si.get("gamma") if key == "omega" else None)
    except UnitError as exc:
        raise _with_location(exc, key, lines) from None

    settings = {}
    for key, (types, default) in SETTINGS.items():
        value = raw.get(key, default)
        if key in raw and (not isinstance(value, types) or isinstance(value, bool)):
            raise ConfigError(f"{key}: expected {'/'.join(t.__name__ for t in types)}, got {value!r}")
        settings[key] = value
    for key in ("snapshots", "scan_phases", "sweep_omega_over_gamma"):
        items = settings[key]
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in items):
            raise ConfigError(f"{key}: expected a list of numbers")
        settings[key] = tuple(float(v) for v in items)
    if any(not 0.0 <= s <= 1.0 for s in settings["snapshots"]):
        raise ConfigError("snapshots are fractions of the medium length in [0, 1]")
    sweep = settings["sweep_omega_over_gamma"]
    if not sweep or len(set(sweep)) != len(sweep) or min(sweep) <= 0:
        raise ConfigError("sweep_omega_over_gamma needs distinct positive values")
    if settings["frame"] not in (LAB, COMOVING):
        raise ConfigError(f"frame must be '{LAB}' or '{COMOVING}'")
    if settings["coupling_step"] not in ("cayley", "exact"):
        raise ConfigError("coupling_step must be 'cayley' or 'exact'")

    try:
        params = PhysicalParams(
            gamma=si["gamma"], omega=si["omega"], density=si["density"], length=si["length"],
            wavelength=si["wavelength"], pulse_duration=si["pulse_duration"],
            v1=si.get("v1"), v2=si.get("v2"),
            coupling_1=si.get("coupling_1"), coupling_2=si.get("coupling_2"),
        )
        scan = ScanGrid(float(settings["scan_start"]), float(settings["scan_stop"]),
                        float(settings["scan_step"]), settings["scan_phases"])
    except InvalidParameterError as exc:
        raise ConfigError(str(exc)) from None

    return RunConfig(
        params=params,
        channel=settings["channel"],
        amplitude=float(settings["amplitude"]),
        center_time=si.get("center_time", 0.0),
        n_t=settings["n_t"],
        n_z=settings["n_z"],
        window_padding=float(settings["window_padding"]),
        snapshots=settings["snapshots"],
        coupling_step=settings["coupling_step"],
        frame=settings["frame"],
        strictness=float(settings["strictness"]),
        peak_threshold=float(settings["peak_threshold"]),
        smoothing=settings["smoothing"],
        scan=scan,
        sweep_omega_over_gamma=tuple(sorted(sweep)),
        out_dir=settings["out_dir"],
    )
