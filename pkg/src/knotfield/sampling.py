"""Field sampling over rectangular grids and the interchange writers.

Rows are ordered z-fastest (x outer, y middle, z inner) and the output is
byte-for-byte deterministic: the segment summation order is fixed and the
thread pool only partitions rows, never reassociates a single row's sum.
Points on the conductor are kept as NaN rows with a flag rather than
dropped, so downstream reshaping to (nx, ny, nz) stays trivial.

Formats: CSV (default), JSON lines, and legacy ASCII VTK structured points
for visualization tools.  Note VTK's own convention is x-fastest, so the
VTK writer permutes rows to match its format; the CSV/JSONL row order is
authoritative for everything else.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import LatticeKnot
from .biot_savart import DEFAULT_EXCLUSION_RADIUS, total_field_many


@dataclass(frozen=True)
class GridSpec:
    origin: tuple[float, float, float]
    spacing: float
    counts: tuple[int, int, int]

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(c) for c in self.origin))
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if self.spacing <= 0:
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")
        if any(c < 1 for c in self.counts):
            raise ValueError(f"grid counts must be >= 1, got {self.counts}")

    @property
    def n_points(self) -> int:
        nx, ny, nz = self.counts
        return nx * ny * nz

    def points(self) -> np.ndarray:
        """All grid points, z-fastest."""
        nx, ny, nz = self.counts
        ix, iy, iz = np.meshgrid(
            np.arange(nx), np.arange(ny), np.arange(nz), indexing="ij"
        )
        idx = np.stack([ix.ravel(), iy.ravel(), iz.ravel()], axis=1)
        return np.asarray(self.origin) + self.spacing * idx


@dataclass(frozen=True)
class FieldSample:
    grid: GridSpec
    points: np.ndarray          # (M, 3)
    b: np.ndarray               # (M, 3), NaN on masked rows
    on_conductor: np.ndarray    # (M,) bool


def sample_field(knot: LatticeKnot, grid: GridSpec,
                 exclusion_radius: float = DEFAULT_EXCLUSION_RADIUS,
                 threads: int = 1, chunk: int = 4096) -> FieldSample:
    """Evaluate the knot's field on every grid point.

    ``threads`` partitions the fixed chunk decomposition; every chunk is an
    independent vectorized evaluation, so results are identical for any
    thread count.
    """
    pts = grid.points()
    b = np.empty_like(pts)
    mask = np.empty(len(pts), dtype=bool)
    ranges = [(lo, min(lo + chunk, len(pts))) for lo in range(0, len(pts), chunk)]

    def work(bounds):
        lo, hi = bounds
        b[lo:hi], mask[lo:hi] = total_field_many(knot, pts[lo:hi], exclusion_radius)

    if threads <= 1:
        for r in ranges:
            work(r)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, ranges))
    return FieldSample(grid=grid, points=pts, b=b, on_conductor=mask)


def _fmt(v: float) -> str:
    return repr(float(v))


CSV_HEADER = "x,y,z,Bx,By,Bz,on_conductor"


def write_csv(sample: FieldSample, fh) -> None:
    fh.write(CSV_HEADER + "\n")
    for p, b, m in zip(sample.points, sample.b, sample.on_conductor):
        row = [_fmt(c) for c in p] + [_fmt(c) for c in b] + ["1" if m else "0"]
        fh.write(",".join(row) + "\n")


def write_jsonl(sample: FieldSample, fh) -> None:
    for p, b, m in zip(sample.points, sample.b, sample.on_conductor):
        fh.write(json.dumps({
            "x": float(p[0]), "y": float(p[1]), "z": float(p[2]),
            "Bx": float(b[0]), "By": float(b[1]), "Bz": float(b[2]),
            "on_conductor": bool(m),
        }) + "\n")


def write_vtk(sample: FieldSample, fh, title: str = "knotfield sample") -> None:
    """Legacy ASCII structured-points dataset with one vector field."""
    nx, ny, nz = sample.grid.counts
    ox, oy, oz = sample.grid.origin
    s = sample.grid.spacing
    fh.write("# vtk DataFile Version 3.0\n")
    fh.write(title + "\n")
    fh.write("ASCII\n")
    fh.write("DATASET STRUCTURED_POINTS\n")
    fh.write(f"DIMENSIONS {nx} {ny} {nz}\n")
    fh.write(f"ORIGIN {_fmt(ox)} {_fmt(oy)} {_fmt(oz)}\n")
    fh.write(f"SPACING {_fmt(s)} {_fmt(s)} {_fmt(s)}\n")
    fh.write(f"POINT_DATA {sample.grid.n_points}\n")
    fh.write("VECTORS B double\n")
    # Our rows are z-fastest; VTK wants x-fastest.
    b = sample.b.reshape(nx, ny, nz, 3)
    for iz in range(nz):
        for iy in range(ny):
            for ix in range(nx):
                bx, by, bz = b[ix, iy, iz]
                fh.write(f"{_fmt(bx)} {_fmt(by)} {_fmt(bz)}\n")


WRITERS = {"csv": write_csv, "jsonl": write_jsonl, "vtk": write_vtk}
