"""Uniform cell-centered meshes on boxes, field reductions and snapshot IO.

Fields are plain numpy arrays with one value per cell center, shape
``(nx,)`` in 1D and ``(nx, ny)`` in 2D.  Homogeneous Neumann boundaries are
realized by the operators through zero boundary fluxes (equivalent to one
layer of reflected ghost cells); the grid itself only carries geometry.

Reductions use compensated summation (``math.fsum``) because the mass
envelope checks run at tight tolerances.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

SNAPSHOT_MAGIC = b"KSCHSNP1"
_HEADER_FMT = "<8sIII4xd"  # magic, dim, nx, ny (0 in 1D), pad, time
assert struct.calcsize(_HEADER_FMT) == 32


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered box mesh in 1 or 2 dimensions.

    extent and cells are per-axis tuples; spacing h = extent / cells.
    """

    extent: tuple[float, ...]
    cells: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.extent) != len(self.cells):
            raise ValueError("extent and cells must have the same length")
        if len(self.cells) not in (1, 2):
            raise ValueError(f"only 1D/2D grids supported, got dim {len(self.cells)}")
        for L in self.extent:
            if not (math.isfinite(L) and L > 0):
                raise ValueError(f"extent entries must be positive, got {L}")
        for n in self.cells:
            if int(n) != n or n < 4:
                raise ValueError(f"at least 4 cells per axis required, got {n}")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.extent, self.cells))

    @property
    def measure(self) -> float:
        """Domain measure |Omega|."""
        return math.prod(self.extent)

    @property
    def cell_volume(self) -> float:
        return math.prod(self.h)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.cells)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)

    def full(self, value: float) -> np.ndarray:
        return np.full(self.shape, float(value))

    def axis_centers(self, axis: int) -> np.ndarray:
        n = self.cells[axis]
        h = self.h[axis]
        return (np.arange(n) + 0.5) * h

    def cell_centers(self) -> tuple[np.ndarray, ...]:
        """Coordinate arrays of cell centers, meshed in 'ij' order for 2D."""
        axes = [self.axis_centers(i) for i in range(self.dim)]
        if self.dim == 1:
            return (axes[0],)
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def sample(self, fn) -> np.ndarray:
        """Evaluate ``fn(*coords)`` on the cell centers."""
        return np.asarray(fn(*self.cell_centers()), dtype=float)


def _require_finite(values: np.ndarray, name: str = "field") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def integrate(values: np.ndarray, grid: Grid) -> float:
    """Midpoint quadrature of a cell field: cell_volume * sum(values)."""
    arr = _require_finite(values)
    if arr.shape != grid.shape:
        raise ValueError(f"field shape {arr.shape} does not match grid {grid.shape}")
    return grid.cell_volume * math.fsum(arr.ravel())


def lp_norm_pow(values: np.ndarray, grid: Grid, k: float) -> float:
    """Integral of |field|^k over the domain (the L^k norm raised to k)."""
    if k < 1:
        raise ValueError(f"k >= 1 required, got {k}")
    arr = _require_finite(values)
    if arr.shape != grid.shape:
        raise ValueError(f"field shape {arr.shape} does not match grid {grid.shape}")
    if k == 1:
        powed = np.abs(arr)
    else:
        powed = np.abs(arr) ** k
    return grid.cell_volume * math.fsum(powed.ravel())


def linf_norm(values: np.ndarray) -> float:
    """Maximum absolute value of a field."""
    arr = _require_finite(values)
    return float(np.max(np.abs(arr)))


@dataclass
class State:
    """Solution pair (cell density u, chemical signal v) at one time level."""

    u: np.ndarray
    v: np.ndarray
    t: float = 0.0
    step_index: int = 0
    dt_last: float = 0.0

    def validate(self, grid: Grid, positivity_tol: float = 1e-12) -> None:
        for name, f in (("u", self.u), ("v", self.v)):
            arr = _require_finite(f, name)
            if arr.shape != grid.shape:
                raise ValueError(f"{name} shape {arr.shape} does not match grid")
            lo = float(arr.min())
            if lo < -positivity_tol:
                raise ValueError(f"{name} dips to {lo}, below -{positivity_tol}")

    def copy(self) -> "State":
        return State(self.u.copy(), self.v.copy(), self.t, self.step_index, self.dt_last)


def write_snapshot(path, values: np.ndarray, grid: Grid, t: float) -> None:
    """Write one field: 32-byte header then the flat little-endian f64 array."""
    arr = _require_finite(values)
    if arr.shape != grid.shape:
        raise ValueError("field shape does not match grid")
    nx = grid.cells[0]
    ny = grid.cells[1] if grid.dim == 2 else 0
    header = struct.pack(_HEADER_FMT, SNAPSHOT_MAGIC, grid.dim, nx, ny, float(t))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def read_snapshot(path) -> tuple[np.ndarray, float]:
    """Read a field snapshot; returns (values, time)."""
    with open(path, "rb") as fh:
        header = fh.read(32)
        if len(header) != 32:
            raise ValueError(f"{path}: truncated snapshot header")
        magic, dim, nx, ny, t = struct.unpack(_HEADER_FMT, header)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: bad snapshot magic {magic!r}")
        shape = (nx,) if dim == 1 else (nx, ny)
        count = int(np.prod(shape))
        raw = fh.read(8 * count)
        if len(raw) != 8 * count:
            raise ValueError(f"{path}: truncated snapshot payload")
        values = np.frombuffer(raw, dtype="<f8").astype(float).reshape(shape)
    return values, t


def field_to_csv(path, values: np.ndarray, grid: Grid) -> None:
    """Plain-text export of a field, one cell per row: x[,y],value."""
    arr = _require_finite(values)
    coords = grid.cell_centers()
    with open(path, "w") as fh:
        if grid.dim == 1:
            fh.write("x,value\n")
            for x, val in zip(coords[0], arr):
                fh.write(f"{x:.17g},{val:.17g}\n")
        else:
            fh.write("x,y,value\n")
            X, Y = coords
            for x, y, val in zip(X.ravel(), Y.ravel(), arr.ravel()):
                fh.write(f"{x:.17g},{y:.17g},{val:.17g}\n")
