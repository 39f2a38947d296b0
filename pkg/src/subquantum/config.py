"""Plain-text experiment configuration.

One ``key = value`` pair per line; blank lines and lines starting with ``#``
are ignored.  Keys carry a section prefix (``constants.``, ``slits.``,
``ramp.``, ``grid.``, ``trajectories.``, ``lattice.``, ``modular.``,
``output.``).  Every key has a default, so an empty file is a valid
configuration.  Unknown or repeated keys are rejected.

Numeric values may be written as multiples of pi (``5*pi``, ``-pi``,
``0.5pi``).  The ramp is switched on by giving ``ramp.delta_phi``; ``ramp.t1``
and ``ramp.t2`` are then required.

:func:`serialize` writes every key in sorted order with shortest round-trip
numbers.  That canonical form, minus the ``output.`` keys, is what the
configuration hash is computed from.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .cml import BOUNDARIES, LatticeSpec
from .doubleslit import RAMP_SHAPES, GridSpec, PhaseRamp, SlitConfig
from .errors import ParseError, ValidationError
from .modular import MOMENTUM_SHIFT_CONVENTIONS
from .packet import PhysicalConstants
from .trajectories import INTEGRATORS, SEEDINGS, TrajectorySpec

__all__ = [
    "KEYS",
    "FORMATS",
    "SCALINGS",
    "ExperimentConfig",
    "ModularSettings",
    "OutputSettings",
    "parse_config",
    "load_config",
    "serialize",
    "config_hash",
    "describe_keys",
]

FORMATS = ("csv", "pgm", "both")
SCALINGS = ("linear", "log")
_NONE = "none"


@dataclass(frozen=True)
class _Key:
    kind: str
    default: Any
    doc: str
    choices: tuple = ()
    optional: bool = False


KEYS: dict[str, _Key] = {
    "constants.hbar": _Key("float", 1.0, "reduced Planck constant"),
    "constants.mass": _Key("float", 1.0, "particle mass"),
    "slits.sigma0": _Key("float", 1.0, "initial channel width"),
    "slits.half_separation": _Key("float", 1.0, "slit position X; the slits sit at +X and -X"),
    "slits.v_x": _Key("float", 0.0, "transverse drift of channel 1 (channel 2 mirrors it)"),
    "slits.v_y": _Key("float", 1.0, "forward speed"),
    "slits.weight1": _Key("float", 1.0, "amplitude weight of channel 1"),
    "slits.weight2": _Key("float", 1.0, "amplitude weight of channel 2"),
    "slits.phase_offset": _Key("float", 0.0, "constant extra phase at slit 1"),
    "slits.mirrored": _Key("bool", False, "put channel 1 at -X instead of +X"),
    "slits.density_floor": _Key("float", 1e-300, "P_tot below this gives no velocity"),
    "slits.tail_fraction": _Key("float", 1e-30, "tail threshold relative to the peak density"),
    "ramp.delta_phi": _Key("float", None, "total extra phase accumulated at slit 1", optional=True),
    "ramp.t1": _Key("float", None, "ramp start time", optional=True),
    "ramp.t2": _Key("float", None, "ramp end time", optional=True),
    "ramp.shape": _Key("choice", "linear", "ramp profile", choices=RAMP_SHAPES),
    "grid.x_min": _Key("float", -12.0, "left edge of the field grid"),
    "grid.x_max": _Key("float", 12.0, "right edge of the field grid"),
    "grid.n_x": _Key("int", 512, "number of x samples"),
    "grid.t_min": _Key("float", 0.0, "first time sample"),
    "grid.t_max": _Key("float", 8.0, "last time sample"),
    "grid.n_t": _Key("int", 256, "number of time samples"),
    "trajectories.n": _Key("int", 100, "number of trajectories"),
    "trajectories.seeding": _Key("choice", SEEDINGS[0], "seed placement", choices=SEEDINGS),
    "trajectories.x_min": _Key("float", None, "seed range left edge", optional=True),
    "trajectories.x_max": _Key("float", None, "seed range right edge", optional=True),
    "trajectories.t_start": _Key("float", 1e-3, "integration start time"),
    "trajectories.t_end": _Key("float", 8.0, "integration end time"),
    "trajectories.dt": _Key("float", None, "time step; none means 1e-3 sigma0/u0", optional=True),
    "trajectories.integrator": _Key("choice", "rk4", "time stepper", choices=INTEGRATORS),
    "trajectories.record_stride": _Key("int", 1, "store every n-th step"),
    "trajectories.n_bins": _Key("int", 256, "screen histogram bins"),
    "lattice.n_cells": _Key("int", 2048, "lattice cells"),
    "lattice.dx": _Key("float", 0.02, "cell size"),
    "lattice.dt": _Key("float", 0.01, "macro time step (split automatically for stability)"),
    "lattice.boundary": _Key("choice", "reflecting", "boundary rule", choices=BOUNDARIES),
    "lattice.t_end": _Key("float", 8.0, "lattice run length"),
    "modular.x_probe": _Key("float", 1.0, "probe position for the decomposition"),
    "modular.t_probe": _Key("float", 1.0, "probe time for the decomposition"),
    "modular.sign": _Key("int", 1, "which slit opens (+1 or -1)"),
    "modular.convention": _Key("choice", "halved", "momentum shift convention", choices=MOMENTUM_SHIFT_CONVENTIONS),
    "modular.t_min": _Key("float", 0.01, "first time of the shift sweep"),
    "modular.t_max": _Key("float", 100.0, "last time of the shift sweep"),
    "modular.n_t": _Key("int", 64, "number of log-spaced sweep times"),
    "output.dir": _Key("str", "out", "output directory"),
    "output.format": _Key("choice", "csv", "files to write", choices=FORMATS),
    "output.scaling": _Key("choice", "linear", "heatmap scaling", choices=SCALINGS),
}

_PI_RE = re.compile(r"^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*pi$|^([+-])pi$")


def _parse_float(token: str) -> float:
    t = token.strip()
    if t.lower() in ("nan", "+nan", "-nan"):
        raise ValueError("nan is not allowed")
    try:
        return float(t)
    except ValueError:
        pass
    m = _PI_RE.match(t)
    if not m:
        raise ValueError("not a number")
    if m.group(2):
        return -math.pi if m.group(2) == "-" else math.pi
    coef = float(m.group(1)) if m.group(1) else 1.0
    return coef * math.pi


def _parse_value(spec: _Key, token: str):
    t = token.strip()
    if spec.optional and t.lower() == _NONE:
        return None
    if spec.kind == "float":
        return _parse_float(t)
    if spec.kind == "int":
        if not re.fullmatch(r"[+-]?\d+", t):
            raise ValueError("not an integer")
        return int(t)
    if spec.kind == "bool":
        low = t.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError("not a boolean")
    if spec.kind == "choice":
        if t not in spec.choices:
            raise ValueError(f"expected one of {', '.join(spec.choices)}")
        return t
    if not t:
        raise ValueError("empty value")
    return t


def _format_value(spec: _Key, value) -> str:
    if value is None:
        return _NONE
    if spec.kind == "float":
        return repr(float(value))
    if spec.kind == "bool":
        return "true" if value else "false"
    return str(value)


@dataclass(frozen=True)
class ModularSettings:
    x_probe: float
    t_probe: float
    sign: int
    convention: str
    t_min: float
    t_max: float
    n_t: int


@dataclass(frozen=True)
class OutputSettings:
    dir: str
    format: str
    scaling: str


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated configuration; ``values`` holds every key with defaults filled in."""

    values: dict
    constants: PhysicalConstants
    slits: SlitConfig
    grid: GridSpec
    trajectories: TrajectorySpec
    n_bins: int
    lattice: LatticeSpec
    lattice_t_end: float
    modular: ModularSettings
    output: OutputSettings

    def with_values(self, **changes) -> "ExperimentConfig":
        """Rebuild with some keys replaced (use ``__`` for the dot, e.g. ``output__dir``)."""
        vals = dict(self.values)
        for k, v in changes.items():
            key = k.replace("__", ".")
            if key not in KEYS:
                raise ValidationError(f"unknown key {key!r}")
            vals[key] = v
        return _build(vals)

    @property
    def hash(self) -> str:
        return config_hash(self)


def _check(cond: bool, key: str, message: str):
    if not cond:
        raise ValidationError(f"{key}: {message}")


def _build(vals: dict) -> ExperimentConfig:
    v = vals
    for key, spec in KEYS.items():
        x = v[key]
        if spec.kind == "float" and x is not None:
            _check(math.isfinite(x), key, "must be finite")
    _check(v["constants.hbar"] > 0, "constants.hbar", "hbar must be positive")
    _check(v["constants.mass"] > 0, "constants.mass", "mass must be positive")
    _check(v["slits.sigma0"] > 0, "slits.sigma0", "sigma0 must be positive")
    _check(v["slits.half_separation"] > 0, "slits.half_separation", "half separation must be positive")
    _check(v["slits.weight1"] >= 0 and v["slits.weight2"] >= 0, "slits.weight", "weights must be non-negative")
    _check(v["slits.weight1"] + v["slits.weight2"] > 0, "slits.weight", "at least one weight must be positive")
    _check(v["slits.density_floor"] >= 0, "slits.density_floor", "must be non-negative")
    _check(0 <= v["slits.tail_fraction"] < 1, "slits.tail_fraction", "must lie in [0, 1)")
    ramp_keys = ("ramp.delta_phi", "ramp.t1", "ramp.t2")
    given = [v[k] is not None for k in ramp_keys]
    _check(all(given) or not any(given), "ramp", "delta_phi, t1 and t2 must be given together")
    ramp = None
    if all(given):
        _check(v["ramp.t1"] < v["ramp.t2"], "ramp.t1", "t1 must be before t2")
        _check(v["ramp.t1"] >= 0, "ramp.t1", "t1 must be non-negative")
        ramp = PhaseRamp(v["ramp.delta_phi"], v["ramp.t1"], v["ramp.t2"], v["ramp.shape"])
    _check(v["grid.x_min"] < v["grid.x_max"], "grid.x_min", "x_min must be below x_max")
    _check(v["grid.n_x"] >= 1, "grid.n_x", "n_x must be positive")
    _check(v["grid.t_min"] >= 0, "grid.t_min", "t_min must be non-negative")
    _check(v["grid.t_min"] <= v["grid.t_max"], "grid.t_min", "t_min must not exceed t_max")
    _check(v["grid.n_t"] >= 1, "grid.n_t", "n_t must be positive")
    _check(v["trajectories.n"] >= 1, "trajectories.n", "n_trajectories must be at least 1")
    _check(v["trajectories.t_start"] < v["trajectories.t_end"], "trajectories.t_start", "t_start must be before t_end")
    _check(v["trajectories.t_start"] >= 0, "trajectories.t_start", "t_start must be non-negative")
    _check(v["trajectories.dt"] is None or v["trajectories.dt"] > 0, "trajectories.dt", "dt must be positive")
    _check(v["trajectories.record_stride"] >= 1, "trajectories.record_stride", "must be at least 1")
    _check(v["trajectories.n_bins"] >= 1, "trajectories.n_bins", "must be at least 1")
    xr = (v["trajectories.x_min"], v["trajectories.x_max"])
    _check((xr[0] is None) == (xr[1] is None), "trajectories.x_min", "x_min and x_max must be given together")
    if xr[0] is not None:
        _check(xr[0] < xr[1], "trajectories.x_min", "x_min must be below x_max")
    else:
        xr = None
    _check(
        v["trajectories.seeding"] != "uniform_in_x" or xr is not None,
        "trajectories.seeding",
        "uniform_in_x needs trajectories.x_min and trajectories.x_max",
    )
    _check(v["lattice.n_cells"] >= 16, "lattice.n_cells", "n_cells must be at least 16")
    _check(v["lattice.dx"] > 0, "lattice.dx", "dx must be positive")
    _check(v["lattice.dt"] > 0, "lattice.dt", "dt must be positive")
    _check(v["lattice.t_end"] >= 0, "lattice.t_end", "t_end must be non-negative")
    _check(v["modular.sign"] in (1, -1), "modular.sign", "sign must be +1 or -1")
    _check(0 < v["modular.t_min"] < v["modular.t_max"], "modular.t_min", "need 0 < t_min < t_max")
    _check(v["modular.n_t"] >= 2, "modular.n_t", "n_t must be at least 2")
    _check(v["modular.t_probe"] > 0, "modular.t_probe", "t_probe must be positive")
    _check(v["modular.x_probe"] != 0, "modular.x_probe", "x_probe must be nonzero")

    constants = PhysicalConstants(v["constants.hbar"], v["constants.mass"])
    slits = SlitConfig(
        constants=constants,
        sigma0=v["slits.sigma0"],
        half_separation=v["slits.half_separation"],
        v_x=v["slits.v_x"],
        v_y=v["slits.v_y"],
        amplitude_weights=(v["slits.weight1"], v["slits.weight2"]),
        ramp=ramp,
        phase_offset=v["slits.phase_offset"],
        mirrored=v["slits.mirrored"],
        density_floor=v["slits.density_floor"],
        tail_fraction=v["slits.tail_fraction"],
    )
    grid = GridSpec(v["grid.x_min"], v["grid.x_max"], v["grid.n_x"], v["grid.t_min"], v["grid.t_max"], v["grid.n_t"])
    traj = TrajectorySpec(
        n_trajectories=v["trajectories.n"],
        seeding=v["trajectories.seeding"],
        x_range=xr,
        t_start=v["trajectories.t_start"],
        t_end=v["trajectories.t_end"],
        dt=v["trajectories.dt"],
        integrator=v["trajectories.integrator"],
        record_stride=v["trajectories.record_stride"],
    )
    lattice = LatticeSpec(v["lattice.n_cells"], v["lattice.dx"], v["lattice.dt"], v["lattice.boundary"])
    modular = ModularSettings(
        v["modular.x_probe"],
        v["modular.t_probe"],
        v["modular.sign"],
        v["modular.convention"],
        v["modular.t_min"],
        v["modular.t_max"],
        v["modular.n_t"],
    )
    output = OutputSettings(v["output.dir"], v["output.format"], v["output.scaling"])
    return ExperimentConfig(
        values=dict(vals),
        constants=constants,
        slits=slits,
        grid=grid,
        trajectories=traj,
        n_bins=v["trajectories.n_bins"],
        lattice=lattice,
        lattice_t_end=v["lattice.t_end"],
        modular=modular,
        output=output,
    )


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text.

    Raises
    ------
    ParseError
        For malformed lines, unknown or repeated keys and unreadable values.
    ValidationError
        If the values break an invariant.
    """
    vals = {k: s.default for k, s in KEYS.items()}
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(lineno, line, "expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in KEYS:
            raise ParseError(lineno, key, "unknown key")
        if key in seen:
            raise ParseError(lineno, key, "repeated key")
        seen.add(key)
        try:
            vals[key] = _parse_value(KEYS[key], value)
        except ValueError as exc:
            raise ParseError(lineno, value.strip(), f"bad value for {key} ({exc})") from None
    try:
        return _build(vals)
    except ValidationError:
        raise
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    """Read a UTF-8 configuration file; see :func:`parse_config`."""
    data = Path(path).read_bytes()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        lineno = data[: exc.start].count(b"\n") + 1
        raise ParseError(lineno, repr(data[exc.start : exc.start + 1]), "not UTF-8") from None
    return parse_config(text)


def serialize(config: ExperimentConfig) -> str:
    """Canonical text form: every key, sorted, one per line."""
    return "".join(f"{k} = {_format_value(KEYS[k], config.values[k])}\n" for k in sorted(KEYS))


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical form without the ``output.`` keys.

    Where and how files are written does not change their numbers, so two
    runs that differ only in output settings carry the same hash.
    """
    text = "".join(line for line in serialize(config).splitlines(keepends=True) if not line.startswith("output."))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def describe_keys() -> str:
    """Human-readable key reference (used by ``--help``-style output and the README)."""
    lines = []
    for k in sorted(KEYS):
        s = KEYS[k]
        default = _format_value(s, s.default)
        extra = f" [{'|'.join(s.choices)}]" if s.choices else ""
        lines.append(f"{k} = {default}  # {s.doc}{extra}")
    return "\n".join(lines)
