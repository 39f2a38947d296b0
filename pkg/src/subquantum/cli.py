"""Command-line entry point.

``subquantum <subcommand> [--config PATH] [--out DIR] [--format csv|pgm|both]``

Exit codes: 0 success, 2 configuration error, 3 validation failure,
4 I/O error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import checks, cml, modular
from .config import FORMATS, ExperimentConfig, config_hash, describe_keys, load_config, parse_config
from .doubleslit import FieldGrid, channel_densities, relative_phase, sample_grid
from .errors import ConfigError, SubquantumError, UnsupportedConfiguration, UndefinedSplit
from .export import format_float, write_field_csv, write_heatmap, write_table_csv, write_text
from .trajectories import (
    integrate_ensemble,
    no_crossing_report,
    normalized_intensity,
    screen_histogram,
)

__all__ = ["main", "run_subcommand", "SUBCOMMANDS", "EXIT_OK", "EXIT_CONFIG", "EXIT_VALIDATION", "EXIT_IO"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3
EXIT_IO = 4

PHASESHIFT_TOL = 1e-12


class _Exit(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _fields_out(cfg: ExperimentConfig, out: Path, prefix: str, grid: FieldGrid, names, written: list):
    h = config_hash(cfg)
    fmt = cfg.output.format
    for name in names:
        if fmt in ("csv", "both"):
            p = out / f"{prefix}_{name}.csv"
            write_field_csv(p, grid, name, h)
            written.append(p)
        if fmt in ("pgm", "both"):
            p = out / f"{prefix}_{name}.pgm"
            display = replace(grid, **{name: np.nan_to_num(grid.field(name), nan=0.0)})
            write_heatmap(p, display, name, cfg.output.scaling, h)
            written.append(p)


def _pattern(cfg, out, written):
    _fields_out(cfg, out, "pattern", sample_grid(cfg.slits, cfg.grid), ["P_tot"], written)
    return EXIT_OK


def _currents(cfg, out, written):
    _fields_out(cfg, out, "currents", sample_grid(cfg.slits, cfg.grid), ["J_x", "J_y", "v_x", "v_y"], written)
    return EXIT_OK


def _entangling(cfg, out, written):
    _fields_out(cfg, out, "entangling", sample_grid(cfg.slits, cfg.grid), ["J_e"], written)
    return EXIT_OK


def flipped_reference(cfg: ExperimentConfig, x, t):
    """Analytic ``P_tot`` once the ramp is complete.

    For a total ramp that is a whole multiple of pi the cosine is multiplied
    by exactly +1 or -1; otherwise it is shifted by the ramp value.
    """
    slits = cfg.slits
    ramp = slits.ramp
    static = slits.with_(ramp=None)
    p1, p2 = channel_densities(static, x, t)
    phi = relative_phase(static, x, t)
    turns = ramp.delta_phi_total / np.pi
    if float(turns).is_integer():
        cos_term = (1.0 if int(turns) % 2 == 0 else -1.0) * np.cos(phi)
    else:
        cos_term = np.cos(phi + ramp.delta_phi_total)
    return p1 + p2 + 2.0 * np.sqrt(p1 * p2) * cos_term


def _phaseshift(cfg, out, written):
    if cfg.slits.ramp is None:
        raise _Exit(EXIT_CONFIG, "phaseshift needs ramp.delta_phi, ramp.t1 and ramp.t2")
    grid = sample_grid(cfg.slits, cfg.grid)
    _fields_out(cfg, out, "phaseshift", grid, ["P_tot", "J_e"], written)
    after = grid.t >= cfg.slits.ramp.t2
    if not after.any():
        print("phaseshift: no grid times at or after t2; nothing to compare")
        return EXIT_OK
    xx, tt = np.meshgrid(grid.x, grid.t[after])
    dev = float(np.max(np.abs(grid.P_tot[after] - flipped_reference(cfg, xx, tt))))
    ok = dev <= PHASESHIFT_TOL
    print(f"phaseshift: max |P_tot - reference| for t >= t2 = {format_float(dev)} ({'ok' if ok else 'FAIL'})")
    return EXIT_OK if ok else EXIT_VALIDATION


def _trajectories(cfg, out, written):
    ens = integrate_ensemble(cfg.slits, cfg.trajectories)
    n, m = ens.positions.shape
    h = config_hash(cfg)
    p = out / "trajectories_positions.csv"
    write_table_csv(
        p,
        {
            "trajectory_id": np.repeat(np.arange(n), m),
            "t": np.tile(ens.times, n),
            "x": ens.positions.reshape(-1),
            "flag": np.repeat(ens.flags.astype(np.int64), m),
        },
        {"config_hash": h},
    )
    written.append(p)
    t_screen = float(ens.times[-1])
    hist = screen_histogram(ens, t_screen, cfg.n_bins)
    pdf = normalized_intensity(cfg.slits, t_screen)
    p = out / "trajectories_histogram.csv"
    write_table_csv(
        p,
        {"x": hist.centers, "density": hist.density, "P_tot_normalized": pdf(hist.centers)},
        {"config_hash": h, "t_screen": format_float(t_screen)},
    )
    written.append(p)
    rep = no_crossing_report(ens)
    print(f"trajectories: axis_crossings={rep['axis_crossings']} order_violations={rep['order_violations']}")
    return EXIT_OK


def _modular(cfg, out, written):
    ms = cfg.modular
    h = config_hash(cfg)
    dec = modular.decompose(cfg.slits, ms.x_probe, ms.t_probe)
    p = out / "modular_decomposition.csv"
    write_table_csv(
        p,
        {
            "x": [dec.x],
            "t": [dec.t],
            "X": [dec.X],
            "X_n": [dec.X_n],
            "delta_X": [dec.delta_X],
            "n": np.array([dec.n], dtype=np.int64),
        },
        {"config_hash": h},
    )
    written.append(p)
    ts = np.geomspace(ms.t_min, ms.t_max, ms.n_t)
    shift = modular.momentum_shift(cfg.slits, dec, ts, ms.sign, ms.convention).value
    rate = modular.momentum_shift_rate(cfg.slits, dec, ts, ms.sign, ms.convention)
    asym = modular.large_time_shift(cfg.slits, dec, ts, ms.sign, ms.convention)
    p = out / "modular_shift.csv"
    write_table_csv(p, {"t": ts, "shift": shift, "rate": rate, "large_time": asym}, {"config_hash": h})
    written.append(p)
    return EXIT_OK


def _cml(cfg, out, written):
    base = cfg.slits.channels()[0]
    params = type(base)(base.constants, base.sigma0, 0.0, 0.0)
    series = cml.run_dispersion(cfg.lattice, params, cfg.lattice_t_end)
    p = out / "cml_series.csv"
    write_table_csv(
        p,
        {"t": series.t, "variance": series.variance, "mass": series.mass, "kurtosis": series.kurtosis},
        {"config_hash": config_hash(cfg)},
    )
    written.append(p)
    return EXIT_OK


def _validate(cfg, out, written):
    results = checks.run_checks(cfg)
    passed = all(r.passed for r in results)
    report = {
        "config_hash": config_hash(cfg),
        "passed": passed,
        "checks": {r.name: r.as_dict() for r in results},
    }
    p = out / "validate_report.json"
    write_text(p, json.dumps(report, sort_keys=True, indent=2) + "\n")
    written.append(p)
    for r in results:
        print(f"{r.name}: {'PASS' if r.passed else 'FAIL'} value={format_float(r.value)} tol={format_float(r.tolerance)}")
    return EXIT_OK if passed else EXIT_VALIDATION


SUBCOMMANDS = {
    "pattern": _pattern,
    "currents": _currents,
    "entangling": _entangling,
    "trajectories": _trajectories,
    "phaseshift": _phaseshift,
    "modular": _modular,
    "cml": _cml,
    "validate": _validate,
}


def run_subcommand(name: str, config: ExperimentConfig) -> tuple[int, list[Path]]:
    """Run one subcommand; returns the exit status and the files written."""
    if name not in SUBCOMMANDS:
        raise ValueError(f"unknown subcommand {name!r}")
    out = Path(config.output.dir)
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise _Exit(EXIT_IO, f"cannot create output directory: {exc}") from None
    code = SUBCOMMANDS[name](config, out, written)
    return code, written


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="subquantum",
        description="Two-slit interference fields, trajectories and checks.",
        epilog="Configuration keys:\n" + describe_keys(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ap.add_argument("subcommand", choices=list(SUBCOMMANDS))
    ap.add_argument("--config", help="key = value configuration file (defaults if omitted)")
    ap.add_argument("--out", help="output directory (overrides output.dir)")
    ap.add_argument("--format", choices=FORMATS, help="output files (overrides output.format)")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.config and not Path(args.config).is_file():
        print(f"config error: no such file {args.config!r}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config) if args.config else parse_config("")
        overrides = {}
        if args.out:
            overrides["output__dir"] = args.out
        if args.format:
            overrides["output__format"] = args.format
        if overrides:
            cfg = cfg.with_values(**overrides)
        code, _ = run_subcommand(args.subcommand, cfg)
        return code
    except _Exit as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, UnsupportedConfiguration, UndefinedSplit) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SubquantumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
