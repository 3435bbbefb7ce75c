"""Plain-text field, trajectory and report files.

Field CSV layout::

    # grid d=2 nx=4 ny=3 lx=1 ly=0.5
    0.25
    ...

one value per cell in the row-major order used by :mod:`sisinv.grid`.
"""
from __future__ import annotations

import csv
import re
from pathlib import Path

import numpy as np

from .grid import Grid

_HEADER = re.compile(r"^#\s*grid\s+(.*)$")


def grid_header(grid: Grid) -> str:
    parts = [f"d={grid.dim}", f"nx={grid.cells[0]}"]
    if grid.dim == 2:
        parts.append(f"ny={grid.cells[1]}")
    parts.append(f"lx={grid.extent[0]!r}")
    if grid.dim == 2:
        parts.append(f"ly={grid.extent[1]!r}")
    return "# grid " + " ".join(parts)


def parse_grid_header(line: str) -> Grid:
    m = _HEADER.match(line.strip())
    if not m:
        raise ValueError(f"not a grid header: {line.strip()!r}")
    kv = dict(tok.split("=", 1) for tok in m.group(1).split())
    d = int(kv["d"])
    if d == 1:
        return Grid.line(int(kv["nx"]), float(kv["lx"]))
    if d == 2:
        return Grid.rect(int(kv["nx"]), int(kv["ny"]), float(kv["lx"]), float(kv["ly"]))
    raise ValueError(f"unsupported dimension d={d}")


def write_field(path, grid: Grid, values) -> Path:
    values = grid.check(values)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(grid_header(grid) + "\n")
        for v in values:
            fh.write(f"{float(v)!r}\n")
    return path


def read_field(path) -> tuple[Grid, np.ndarray]:
    with open(path) as fh:
        grid = parse_grid_header(fh.readline())
        values = np.array([float(line) for line in fh if line.strip() and not line.startswith("#")])
    return grid, grid.check(values, str(path))


def write_trajectory(outdir, traj, stride: int = 1, names=("S", "I")) -> Path:
    """Write every ``stride``-th slice (and the final one) plus ``manifest.csv``."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    K = len(traj.times) - 1
    idx = sorted(set(range(0, K + 1, max(1, stride))) | {K})
    fields = [getattr(traj, n) for n in names]
    with open(outdir / "manifest.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "time", *[f"{n}_file" for n in names]])
        for k in idx:
            files = []
            for n, arr in zip(names, fields):
                fname = f"{n}_{k:05d}.csv"
                write_field(outdir / fname, traj.grid, arr[k])
                files.append(fname)
            w.writerow([k, repr(float(traj.times[k])), *files])
    return outdir / "manifest.csv"


def write_table(path, header, rows, config: dict | None = None) -> Path:
    """CSV table, optionally preceded by ``# key = value`` lines of the resolved config."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        if config:
            for k, v in config.items():
                fh.write(f"# {k} = {v}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return path


def read_table(path) -> list[dict]:
    with open(path) as fh:
        lines = [line for line in fh if not line.startswith("#")]
    return list(csv.DictReader(lines))


def write_inversion(outdir, report, config: dict | None = None) -> Path:
    outdir = Path(outdir)
    rows = [(r.iter, r.J, r.misfit, r.penalty, r.pg_norm, r.step) for r in report.records]
    write_table(outdir / "report.csv", ["iter", "J", "misfit", "penalty", "pg_norm", "step"], rows, config)
    write_field(outdir / "beta.csv", report.params.grid, report.params.beta)
    write_field(outdir / "gamma.csv", report.params.grid, report.params.gamma)
    (outdir / "status.txt").write_text(report.reason + "\n")
    return outdir
