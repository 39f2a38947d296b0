"""CSV and PGM writers and readers.

Numbers are written with ``repr(float)``, the shortest decimal string that
reads back to the same binary64 value, so every file round-trips exactly.

Field CSV layout::

    # field = P_tot
    # units = 1/length
    # config_hash = <sha256>
    # grid = x_min=-12.0 x_max=12.0 n_x=512 t_min=0.0 t_max=8.0 n_t=256
    t,<x_0>,<x_1>,...
    <t_0>,<value>,<value>,...

Heatmaps are binary 16-bit PGM (``P5``, big-endian) with one image row per
time sample, first time at the top.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .doubleslit import FIELD_UNITS, FieldGrid, GridSpec

__all__ = [
    "FieldGridFile",
    "format_float",
    "write_text",
    "field_file",
    "write_field_csv",
    "read_field_csv",
    "write_table_csv",
    "read_table_csv",
    "heatmap_levels",
    "write_heatmap",
    "write_pgm",
    "read_pgm",
]

PGM_MAX = 65535


def format_float(value) -> str:
    return repr(float(value))


def _write_exclusive(path, data: bytes) -> None:
    """Write ``data`` to a temporary sibling and rename it into place."""
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def write_text(path, text: str) -> None:
    """Write UTF-8 text through a temporary file, so readers never see a partial file."""
    _write_exclusive(path, text.encode("utf-8"))


@dataclass(frozen=True)
class FieldGridFile:
    """One field on the (t, x) grid plus the header that describes it."""

    field: str
    units: str
    config_hash: str
    grid: GridSpec
    values: np.ndarray

    def __eq__(self, other):
        if not isinstance(other, FieldGridFile):
            return NotImplemented
        return (
            (self.field, self.units, self.config_hash, self.grid)
            == (other.field, other.units, other.config_hash, other.grid)
            and self.values.shape == other.values.shape
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None

    def to_text(self) -> str:
        g = self.grid
        lines = [
            f"# field = {self.field}",
            f"# units = {self.units}",
            f"# config_hash = {self.config_hash}",
            "# grid = "
            + " ".join(
                [
                    f"x_min={format_float(g.x_min)}",
                    f"x_max={format_float(g.x_max)}",
                    f"n_x={g.n_x}",
                    f"t_min={format_float(g.t_min)}",
                    f"t_max={format_float(g.t_max)}",
                    f"n_t={g.n_t}",
                ]
            ),
            ",".join(["t"] + [format_float(x) for x in g.x.tolist()]),
        ]
        for t, row in zip(g.t.tolist(), self.values.tolist()):
            lines.append(",".join([format_float(t)] + [format_float(v) for v in row]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FieldGridFile":
        header = {}
        body = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                header[key.strip()] = value.strip()
            elif line:
                body.append(line)
        try:
            gspec = dict(item.split("=", 1) for item in header["grid"].split())
            grid = GridSpec(
                float(gspec["x_min"]),
                float(gspec["x_max"]),
                int(gspec["n_x"]),
                float(gspec["t_min"]),
                float(gspec["t_max"]),
                int(gspec["n_t"]),
            )
            values = np.array([[float(v) for v in row.split(",")[1:]] for row in body[1:]], dtype=float)
            values = values.reshape(grid.n_t, grid.n_x)
            return cls(header["field"], header["units"], header["config_hash"], grid, values)
        except (KeyError, ValueError) as exc:
            raise ValueError(f"malformed field file: {exc}") from None


def field_file(grid: FieldGrid, name: str, config_hash: str) -> FieldGridFile:
    return FieldGridFile(name, FIELD_UNITS[name], config_hash, grid.grid, np.asarray(grid.field(name), dtype=float))


def write_field_csv(path, grid: FieldGrid, name: str, config_hash: str) -> FieldGridFile:
    f = field_file(grid, name, config_hash)
    _write_exclusive(path, f.to_text().encode("utf-8"))
    return f


def read_field_csv(path) -> FieldGridFile:
    return FieldGridFile.from_text(Path(path).read_text(encoding="utf-8"))


def write_table_csv(path, columns: dict, header: dict | None = None) -> None:
    """Column table with optional ``# key = value`` header lines.

    Integer columns are written as integers, everything else with ``repr``.
    """
    names = list(columns)
    cols = [np.asarray(columns[n]) for n in names]
    lines = [f"# {k} = {v}" for k, v in (header or {}).items()]
    lines.append(",".join(names))
    formatters = [
        (lambda v: str(int(v))) if np.issubdtype(c.dtype, np.integer) else format_float for c in cols
    ]
    lists = [c.tolist() for c in cols]
    for row in zip(*lists):
        lines.append(",".join(f(v) for f, v in zip(formatters, row)))
    _write_exclusive(path, ("\n".join(lines) + "\n").encode("utf-8"))


def read_table_csv(path) -> tuple[dict, dict]:
    """Inverse of :func:`write_table_csv`; returns ``(header, columns)`` with float columns."""
    header, rows, names = {}, [], None
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].partition("=")
            header[k.strip()] = v.strip()
        elif names is None:
            names = line.split(",")
        elif line:
            rows.append([float(v) for v in line.split(",")])
    data = np.array(rows, dtype=float).reshape(-1, len(names))
    return header, {n: data[:, i] for i, n in enumerate(names)}


def heatmap_levels(values, scaling: str = "linear", decades: float = 12.0) -> np.ndarray:
    """Map a finite 2D array to 16-bit grey levels.

    Non-negative data are scaled by their maximum.  Data with negative
    entries are mapped symmetrically, ``[-M, M] -> [0, 65535]``, so zero is
    mid-grey.  ``scaling="log"`` (non-negative data only) shows ``decades``
    orders of magnitude below the maximum.  A constant array maps to all-max.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 2:
        raise ValueError("heatmap needs a 2D array")
    if not np.all(np.isfinite(v)):
        raise ValueError("heatmap values must be finite")
    if scaling not in ("linear", "log"):
        raise ValueError(f"scaling must be 'linear' or 'log', got {scaling!r}")
    if v.size == 0 or np.all(v == v.flat[0]):
        return np.full(v.shape, PGM_MAX, dtype=np.uint16)
    if np.any(v < 0):
        if scaling == "log":
            raise ValueError("log scaling needs non-negative data")
        m = np.max(np.abs(v))
        level = 0.5 * (v / m + 1.0)
    else:
        m = np.max(v)
        if scaling == "log":
            with np.errstate(divide="ignore"):
                level = np.clip(1.0 + np.log10(v / m) / decades, 0.0, 1.0)
        else:
            level = v / m
    return np.rint(level * PGM_MAX).astype(np.uint16)


def write_pgm(path, levels: np.ndarray, comments=()) -> None:
    levels = np.asarray(levels)
    if levels.ndim != 2 or levels.dtype != np.uint16:
        raise ValueError("levels must be a 2D uint16 array")
    h, w = levels.shape
    head = "P5\n" + "".join(f"# {c}\n" for c in comments) + f"{w} {h}\n{PGM_MAX}\n"
    _write_exclusive(path, head.encode("ascii") + levels.astype(">u2").tobytes())


def write_heatmap(path, grid: FieldGrid, name: str = "P_tot", scaling: str = "linear", config_hash: str = "") -> np.ndarray:
    """Render one field of ``grid`` as a 16-bit PGM; returns the grey levels."""
    levels = heatmap_levels(grid.field(name), scaling)
    comments = [f"field = {name}", f"scaling = {scaling}"]
    if config_hash:
        comments.append(f"config_hash = {config_hash}")
    write_pgm(path, levels, comments)
    return levels


_TOKEN = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)")


def read_pgm(path) -> tuple[np.ndarray, list[str]]:
    """Read a 16-bit binary PGM; returns ``(levels, comments)``."""
    data = Path(path).read_bytes()
    comments = [c[1:].strip().decode("ascii") for c in re.findall(rb"#[^\n]*", data.split(b"\n65535\n", 1)[0])]
    pos = 0
    fields = []
    for _ in range(4):
        m = _TOKEN.match(data, pos)
        if not m:
            raise ValueError("truncated PGM header")
        fields.append(m.group(2))
        pos = m.end()
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != PGM_MAX:
        raise ValueError(f"expected maxval {PGM_MAX}, got {maxval}")
    raw = data[pos + 1 :]
    if len(raw) != 2 * w * h:
        raise ValueError("PGM payload size does not match header")
    return np.frombuffer(raw, dtype=">u2").reshape(h, w).astype(np.uint16), comments
