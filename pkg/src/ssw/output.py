"""CSV snapshots, step logs, convergence tables and spectra."""
from __future__ import annotations

import csv
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .model import cons_to_prim, prim_to_cons

COLUMNS = ("x", "y", "h", "v1", "v2", "P11", "P12", "P22")


def _fmt(v):
    return format(float(v), ".17g")


def snapshot_table(grid):
    """Rows of the snapshot: x varies fastest, then y."""
    q = cons_to_prim(grid.interior_state(), check=False)
    h = q[0]
    cols = [h, q[1], q[2], q[3] / h, q[4] / h, q[5] / h]
    x = grid.x[grid.ghost:-grid.ghost]
    if grid.ndim == 1:
        xs = x
        ys = np.zeros_like(x)
        data = [c for c in cols]
    else:
        y = grid.y[grid.ghost:-grid.ghost]
        X, Y = np.meshgrid(x, y, indexing="ij")
        # transpose so that the flattened order has x innermost
        xs, ys = X.T.ravel(), Y.T.ravel()
        data = [c.T.ravel() for c in cols]
    return np.column_stack([xs, ys] + data)


def write_snapshot(grid, path):
    path = Path(path)
    table = snapshot_table(grid)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# t={_fmt(grid.time)} nx={grid.nx} ny={grid.ny}\n")
        fh.write(",".join(COLUMNS) + "\n")
        for row in table:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


@dataclass
class Snapshot:
    time: float
    nx: int
    ny: int
    data: np.ndarray  # (nrows, 8) in COLUMNS order

    def prim(self):
        """Primitive state (h, v1, v2, R11, R12, R22) with shape (6, nx[, ny])."""
        d = self.data
        h = d[:, 2]
        q = np.stack([h, d[:, 3], d[:, 4], h * d[:, 5], h * d[:, 6], h * d[:, 7]])
        if self.ny == 1:
            return q
        return q.reshape(6, self.ny, self.nx).transpose(0, 2, 1)

    def conserved(self):
        return prim_to_cons(self.prim(), check=False)


def read_snapshot(path):
    with open(path) as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise ValueError(f"{path}: missing '# t=... nx=... ny=...' header")
        meta = dict(tok.split("=", 1) for tok in header[1:].split())
        names = fh.readline().strip().split(",")
        if tuple(names) != COLUMNS:
            raise ValueError(f"{path}: unexpected columns {names}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    snap = Snapshot(float(meta["t"]), int(meta["nx"]), int(meta["ny"]), data)
    if data.shape[0] != snap.nx * snap.ny:
        raise ValueError(f"{path}: expected {snap.nx * snap.ny} rows, found {data.shape[0]}")
    return snap


def write_step_log(records, path):
    names = [f.name for f in fields(records[0])] if records else ["step", "time", "dt", "min_h", "min_p11", "min_p22"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for r in records:
            w.writerow([v if isinstance(v, int) else _fmt(v) for v in (getattr(r, n) for n in names)])


def write_table(path, header, rows):
    """Generic CSV writer; floats at 17 significant digits, None as empty."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            out = []
            for v in row:
                if v is None:
                    out.append("")
                elif isinstance(v, (int, np.integer)):
                    out.append(str(int(v)))
                elif isinstance(v, (float, np.floating)):
                    out.append(_fmt(v))
                else:
                    out.append(str(v))
            w.writerow(out)
