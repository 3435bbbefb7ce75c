"""Cell-centered rectangular grids with homogeneous Neumann operators.

Fields are plain 1-D numpy arrays holding one value per cell.  In 2-D the
flattening is C order over an ``(nx, ny)`` array, so the y index varies
fastest.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import GridMismatch, LinearSolveDiverged, NonFiniteField

CG_RTOL = 1e-10


@dataclass(frozen=True)
class Grid:
    """Uniform cell-centered grid on ``[0, lx] (x [0, ly])``."""

    cells: tuple[int, ...]
    extent: tuple[float, ...]

    def __post_init__(self):
        cells = tuple(int(c) for c in self.cells)
        extent = tuple(float(e) for e in self.extent)
        if len(cells) not in (1, 2) or len(extent) != len(cells):
            raise ValueError("grid must be 1-D or 2-D with one extent per axis")
        if any(c < 3 for c in cells):
            raise ValueError(f"need at least 3 cells per axis, got {cells}")
        if any(not np.isfinite(e) or e <= 0 for e in extent):
            raise ValueError(f"extents must be positive, got {extent}")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "extent", extent)

    @classmethod
    def line(cls, nx: int, lx: float = 1.0) -> Grid:
        return cls((nx,), (lx,))

    @classmethod
    def rect(cls, nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> Grid:
        return cls((nx, ny), (lx, ly))

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def size(self) -> int:
        return int(np.prod(self.cells))

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(e / c for e, c in zip(self.extent, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def measure(self) -> float:
        return float(np.prod(self.extent))

    def axes(self) -> list[np.ndarray]:
        """Cell-center coordinates along each axis."""
        return [(np.arange(c) + 0.5) * h for c, h in zip(self.cells, self.spacing)]

    def coordinates(self) -> list[np.ndarray]:
        """Flattened cell-center coordinates, one array per axis."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return [m.ravel() for m in mesh]

    def full(self, value: float) -> np.ndarray:
        return np.full(self.size, float(value))

    def check(self, u, name: str = "field") -> np.ndarray:
        """Return ``u`` as a float array after checking length and finiteness."""
        u = np.asarray(u, dtype=float)
        if u.shape != (self.size,):
            raise GridMismatch(f"{name} has shape {u.shape}, grid expects ({self.size},)")
        if not np.all(np.isfinite(u)):
            raise NonFiniteField(f"{name} contains NaN or Inf")
        return u

    @cached_property
    def laplacian_matrix(self) -> sp.csr_matrix:
        """Sparse Neumann Laplacian; symmetric with zero row and column sums."""
        ops = [_neumann_1d(c, h) for c, h in zip(self.cells, self.spacing)]
        if self.dim == 1:
            return ops[0].tocsr()
        ix = sp.identity(self.cells[0], format="csr")
        iy = sp.identity(self.cells[1], format="csr")
        return (sp.kron(ops[0], iy) + sp.kron(ix, ops[1])).tocsr()


def _neumann_1d(n: int, h: float) -> sp.dia_matrix:
    main = np.full(n, -2.0)
    main[0] = main[-1] = -1.0  # mirror ghost cell folds into the diagonal
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1]) / h**2


def laplacian_neumann(grid: Grid, u) -> np.ndarray:
    """3-point (1-D) or 5-point (2-D) Laplacian with mirror boundary closure."""
    u = grid.check(u)
    if grid.dim == 1:
        (h,) = grid.spacing
        ext = np.concatenate(([u[0]], u, [u[-1]]))
        return (ext[:-2] - 2.0 * u + ext[2:]) / h**2
    nx, ny = grid.cells
    hx, hy = grid.spacing
    v = u.reshape(nx, ny)
    ext = np.pad(v, 1, mode="edge")
    lap = (ext[:-2, 1:-1] - 2.0 * v + ext[2:, 1:-1]) / hx**2
    lap += (ext[1:-1, :-2] - 2.0 * v + ext[1:-1, 2:]) / hy**2
    return lap.ravel()


def inner_l2(grid: Grid, u, v) -> float:
    """Midpoint-rule L2 inner product."""
    u = grid.check(u, "u")
    v = grid.check(v, "v")
    return float(np.dot(u, v) * grid.cell_volume)


def norm_l2(grid: Grid, u) -> float:
    return float(np.sqrt(inner_l2(grid, u, u)))


def seminorm_h1(grid: Grid, u) -> float:
    """Squared discrete H1 seminorm, ``-<u, lap u>``.

    Computed from squared face differences, which equals the summation-by-parts
    form exactly in exact arithmetic and is nonnegative in floating point.
    """
    u = grid.check(u)
    if grid.dim == 1:
        (h,) = grid.spacing
        return float(np.sum(np.diff(u) ** 2) / h**2 * grid.cell_volume)
    v = u.reshape(grid.cells)
    hx, hy = grid.spacing
    total = np.sum(np.diff(v, axis=0) ** 2) / hx**2 + np.sum(np.diff(v, axis=1) ** 2) / hy**2
    return float(total * grid.cell_volume)


class ImplicitSolver:
    """Solver for ``(Id - coef * lap) x = b`` on a fixed grid.

    1-D uses a banded direct solve.  2-D uses conjugate gradients started from
    ``x0 = b``; the initial residual ``coef * lap b`` then has zero sum, and the
    mean of every later residual stays at rounding level, so the solve
    conserves mass even though it stops at a relative residual of 1e-10.
    """

    def __init__(self, grid: Grid, coef: float):
        if coef < 0:
            raise ValueError("coef must be nonnegative")
        self.grid = grid
        self.coef = float(coef)
        if grid.dim == 1:
            (n,) = grid.cells
            (h,) = grid.spacing
            r = self.coef / h**2
            ab = np.zeros((3, n))
            ab[0, 1:] = -r
            ab[1, :] = 1.0 + 2.0 * r
            ab[1, 0] = ab[1, -1] = 1.0 + r
            ab[2, :-1] = -r
            self._banded = ab
        else:
            self._matrix = (sp.identity(grid.size, format="csr") - self.coef * grid.laplacian_matrix).tocsr()

    def solve(self, b: np.ndarray) -> np.ndarray:
        if self.coef == 0.0:
            return np.array(b, dtype=float)
        if self.grid.dim == 1:
            return scipy.linalg.solve_banded((1, 1), self._banded, b, check_finite=False)
        maxiter = 10 * self.grid.size
        x, info = spla.cg(self._matrix, b, x0=np.array(b, dtype=float), rtol=CG_RTOL, atol=0.0, maxiter=maxiter)
        if info != 0:
            raise LinearSolveDiverged(f"CG did not reach rtol={CG_RTOL} in {maxiter} iterations")
        return x


@lru_cache(maxsize=64)
def implicit_solver(grid: Grid, coef: float) -> ImplicitSolver:
    return ImplicitSolver(grid, coef)
