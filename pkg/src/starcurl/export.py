"""Serialization of reports and sampled grids.

Everything is plain text: CSV for tabular interchange and the legacy
structured-points volume format for external viewers.  Floats are written
with 17 significant digits, so a value survives the round trip exactly and
re-runs diff byte-for-byte.
"""

from __future__ import annotations

import csv

import numpy as np

from .operators import FieldSampleGrid
from .verify import CheckReport

__all__ = [
    "report_to_csv",
    "grid_to_csv",
    "grid_to_vtk",
]


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def report_to_csv(report: CheckReport, path: str) -> None:
    """One row per compared quantity; the point is ;-joined so the file
    keeps a single point column."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["test", "point", "component", "value", "reference",
                    "abs_err", "rel_err", "pass"])
        for r in report.rows:
            w.writerow([r.test, ";".join(_fmt(c) for c in r.point),
                        r.component, _fmt(r.value), _fmt(r.reference),
                        _fmt(r.abs_err), _fmt(r.rel_err), int(r.passed)])


def grid_to_csv(grid: FieldSampleGrid, path: str) -> None:
    """Lattice samples as x,y,z,vx,vy,vz,inside rows, x-index slowest."""
    pts = grid.points().reshape(-1, 3)
    vals = grid.values.reshape(-1, 3)
    ins = grid.inside.reshape(-1)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "z", "vx", "vy", "vz", "inside"])
        for p, v, i in zip(pts, vals, ins):
            w.writerow([_fmt(p[0]), _fmt(p[1]), _fmt(p[2]),
                        _fmt(v[0]), _fmt(v[1]), _fmt(v[2]), int(i)])


def grid_to_vtk(grid: FieldSampleGrid, path: str, name: str = "potential") -> None:
    """Legacy structured-points volume file (ASCII) with one VECTORS
    attribute.  The format wants the x index fastest, so the value array is
    emitted in transposed order."""
    nx, ny, nz = grid.counts
    lines = [
        "# vtk DataFile Version 3.0",
        "vector potential samples",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} {nz}",
        "ORIGIN " + " ".join(_fmt(c) for c in grid.origin),
        "SPACING " + " ".join(_fmt(c) for c in grid.spacing),
        f"POINT_DATA {nx * ny * nz}",
        f"VECTORS {name} double",
    ]
    vals = np.transpose(grid.values, (2, 1, 0, 3)).reshape(-1, 3)
    lines.extend(" ".join(_fmt(c) for c in v) for v in vals)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
