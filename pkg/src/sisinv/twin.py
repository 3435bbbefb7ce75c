"""Synthetic twin experiments: known coefficients, generated observations, scores."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch, ProfileOutOfBounds
from .forward import Bounds, Parameters, Trajectory
from .grid import Grid, norm_l2

PROFILE_KINDS = ("constant", "gaussian", "sinusoidal")


@dataclass(frozen=True)
class Profile:
    """Smooth scalar profile on the grid.

    ``constant``:    base
    ``gaussian``:    base + amplitude * exp(-|x - c|^2 / (2 width^2)), c = center * extent
    ``sinusoidal``:  base + amplitude * prod_i cos(wavenumber * pi * x_i / L_i)

    The cosine profile has zero normal derivative on the boundary.
    """

    kind: str = "constant"
    base: float = 0.5
    amplitude: float = 0.0
    center: float = 0.5
    width: float = 0.1
    wavenumber: int = 1

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}; expected one of {PROFILE_KINDS}")
        if self.kind == "gaussian" and not self.width > 0:
            raise ValueError("gaussian width must be positive")

    def evaluate(self, grid: Grid) -> np.ndarray:
        coords = grid.coordinates()
        if self.kind == "constant":
            return grid.full(self.base)
        if self.kind == "gaussian":
            r2 = sum((x - self.center * L) ** 2 for x, L in zip(coords, grid.extent))
            return self.base + self.amplitude * np.exp(-r2 / (2.0 * self.width**2))
        shape = np.ones(grid.size)
        for x, L in zip(coords, grid.extent):
            shape *= np.cos(self.wavenumber * np.pi * x / L)
        return self.base + self.amplitude * shape


@dataclass(frozen=True)
class TwinSpec:
    beta: Profile = field(default_factory=lambda: Profile("sinusoidal", 0.5, 0.1))
    gamma: Profile = field(default_factory=lambda: Profile("sinusoidal", 0.3, 0.05))
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.noise < 0:
            raise ValueError("noise level must be >= 0")


def make_truth(spec: TwinSpec, grid: Grid, bounds: Bounds) -> Parameters:
    beta = spec.beta.evaluate(grid)
    gamma = spec.gamma.evaluate(grid)
    for name, f, lo, hi in (("beta", beta, bounds.b_lo, bounds.b_hi), ("gamma", gamma, bounds.r_lo, bounds.r_hi)):
        if f.min() <= lo or f.max() >= hi:
            raise ProfileOutOfBounds(
                f"true {name} spans [{f.min():.4g}, {f.max():.4g}], not strictly inside ({lo}, {hi})"
            )
    return Parameters(grid, beta, gamma, bounds)


def observe(traj: Trajectory, eta: float, seed: int):
    """Terminal observations with relative Gaussian noise, clipped at zero."""
    S_T, I_T = traj.S_final.copy(), traj.I_final.copy()
    if eta == 0:
        return S_T, I_T
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((2, traj.grid.size))
    Sobs = np.maximum(S_T * (1.0 + eta * xi[0]), 0.0)
    Iobs = np.maximum(I_T * (1.0 + eta * xi[1]), 0.0)
    return Sobs, Iobs


@dataclass(frozen=True)
class Score:
    rel_beta: float
    rel_gamma: float
    shifted_rel_beta: float
    shifted_rel_gamma: float

    @property
    def worst_shifted(self) -> float:
        return max(self.shifted_rel_beta, self.shifted_rel_gamma)


def _rel(grid, rec, true):
    err = rec - true
    shifted = err - err.mean()
    ref = norm_l2(grid, true)
    return norm_l2(grid, err) / ref, norm_l2(grid, shifted) / ref


def score(recovered: Parameters, truth: Parameters) -> Score:
    """Relative L2 errors, raw and with the mean error removed."""
    grid = truth.grid
    if recovered.grid != grid:
        raise GridMismatch("recovered and true parameters live on different grids")
    rb, sb = _rel(grid, recovered.beta, truth.beta)
    rg, sg = _rel(grid, recovered.gamma, truth.gamma)
    return Score(rb, rg, sb, sg)


def random_admissible(grid: Grid, bounds: Bounds, seed: int) -> Parameters:
    """Cellwise uniform draw inside the box; used for multi-start runs."""
    rng = np.random.default_rng(seed)
    return Parameters(
        grid,
        rng.uniform(bounds.b_lo, bounds.b_hi, grid.size),
        rng.uniform(bounds.r_lo, bounds.r_hi, grid.size),
        bounds,
    )


def disagreement(a: Parameters, b: Parameters) -> tuple[float, float]:
    """Relative L2 distance between two recoveries, raw and with per-component mean shifts removed."""
    grid = a.grid
    raw = shifted = ref = 0.0
    for u, v in ((a.beta, b.beta), (a.gamma, b.gamma)):
        d = u - v
        raw += norm_l2(grid, d) ** 2
        shifted += norm_l2(grid, d - d.mean()) ** 2
        ref += norm_l2(grid, u) ** 2
    return float(np.sqrt(raw / ref)), float(np.sqrt(shifted / ref))
