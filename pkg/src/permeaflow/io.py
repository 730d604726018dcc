"""Deterministic artifact writers: snapshots, energy log, run manifest.

Floats are written as ``%.16e`` (17 significant digits, round-trip exact)
with negative zero normalized, so a fixed state always yields the same bytes.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path
from typing import Iterable

import numpy as np

from .energy import EnergyReport
from .grid import Grid
from .operators import cell_average
from .scheme import State

ENERGY_COLUMNS = ("n", "t", "e_kin", "e_mix", "e_ent", "e_pressure", "e_mod", "d_visc", "d_mu", "d_c")
CSV_COLUMNS = ("x", "y", "phi", "c", "p", "u", "v")
MANIFEST_NAME = "manifest.txt"


def fmt(x: float) -> str:
    return f"{float(x) + 0.0:.16e}"


def _cell_order(a: np.ndarray) -> np.ndarray:
    # x varies fastest, as legacy VTK expects
    return np.asarray(a).T.ravel()


def _write_text(path: Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def snapshot_vtk(grid: Grid, state: State) -> str:
    nx, ny = grid.shape
    ub, vb = cell_average(state.vel)
    lines = [
        "# vtk DataFile Version 3.0",
        f"permeaflow n={state.n} t={fmt(state.t)}",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx + 1} {ny + 1} 1",
        f"ORIGIN {fmt(grid.x_min)} {fmt(grid.y_min)} {fmt(0.0)}",
        f"SPACING {fmt(grid.hx)} {fmt(grid.hy)} {fmt(1.0)}",
        f"CELL_DATA {nx * ny}",
    ]
    for name in ("phi", "c", "p"):
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
        lines += [fmt(v) for v in _cell_order(getattr(state, name))]
    lines.append("VECTORS velocity double")
    zero = fmt(0.0)
    lines += [f"{fmt(a)} {fmt(b)} {zero}" for a, b in zip(_cell_order(ub), _cell_order(vb))]
    return "\n".join(lines) + "\n"


def snapshot_csv(grid: Grid, state: State) -> str:
    X, Y = grid.cell_centers()
    ub, vb = cell_average(state.vel)
    cols = [_cell_order(a) for a in (X, Y, state.phi, state.c, state.p, ub, vb)]
    rows = [",".join(CSV_COLUMNS)]
    rows += [",".join(fmt(v) for v in row) for row in zip(*cols)]
    return "\n".join(rows) + "\n"


def write_snapshot(grid: Grid, state: State, path) -> tuple[Path, Path]:
    """Write ``<path>.vtk`` and its CSV twin ``<path>.csv``; returns both paths."""
    base = Path(path)
    if base.suffix in (".vtk", ".csv"):
        base = base.with_suffix("")
    vtk = _write_text(base.with_suffix(".vtk"), snapshot_vtk(grid, state))
    csv = _write_text(base.with_suffix(".csv"), snapshot_csv(grid, state))
    return vtk, csv


def energy_row(report: EnergyReport, t: float, n: int) -> str:
    vals = [report.e_kin, report.e_mix, report.e_ent, report.e_pressure, report.e_mod,
            report.d_visc, report.d_mu, report.d_c]
    return ",".join([str(int(n)), fmt(t)] + [fmt(v) for v in vals])


def append_energy_log(report: EnergyReport, t: float, n: int, path) -> Path:
    """Append one CSV row; the header is written when the file is new or empty."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        new = not path.exists() or path.stat().st_size == 0
        with open(path, "a", encoding="utf-8", newline="\n") as fh:
            if new:
                fh.write(",".join(ENERGY_COLUMNS) + "\n")
            fh.write(energy_row(report, t, n) + "\n")
    except OSError as exc:
        raise OSError(f"cannot append to {path}: {exc.strerror or exc}") from exc
    return path


def read_energy_log(path) -> dict[str, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, k] for k, name in enumerate(ENERGY_COLUMNS)}


def file_hash(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(out_dir, paths: Iterable) -> Path:
    """``<sha256>  <relative path>`` for every artifact, sorted by path."""
    out_dir = Path(out_dir)
    entries = sorted({Path(p).resolve() for p in paths})
    lines = []
    for p in entries:
        rel = os.path.relpath(p, out_dir.resolve()).replace(os.sep, "/")
        if rel == MANIFEST_NAME:
            continue
        lines.append(f"{file_hash(p)}  {rel}")
    return _write_text(out_dir / MANIFEST_NAME, "\n".join(lines) + ("\n" if lines else ""))
