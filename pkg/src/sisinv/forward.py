"""Direct SIS reaction-diffusion solver.

The state ``(S, I)`` evolves by

    S_t - lap S = -R,    I_t - lap I = R,    R = beta S^m I^n - gamma I

with homogeneous Neumann boundaries.  Time stepping is IMEX: the reaction is
explicit at level k and diffusion is implicit at level k+1.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ForwardSolveError,
    LinearSolveDiverged,
    NegativeInitialData,
    ZeroInfectedMass,
    ZeroPopulationCell,
)
from .grid import Grid, implicit_solver, inner_l2

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ModelConfig:
    """Model exponents and time discretization.

    ``dt`` is rounded so that ``T / dt`` is an integer number of steps.
    """

    m: float = 0.5
    n: float = 0.5
    T: float = 1.0
    dt: float = 1.0 / 64
    floor: float = 1e-12

    def __post_init__(self):
        for name in ("m", "n"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0,1), got {v}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.floor < 0:
            raise ValueError(f"floor must be nonnegative, got {self.floor}")
        steps = max(1, int(round(self.T / self.dt)))
        object.__setattr__(self, "dt", self.T / steps)

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.steps + 1)


@dataclass(frozen=True)
class Bounds:
    b_lo: float = 0.05
    b_hi: float = 0.95
    r_lo: float = 0.05
    r_hi: float = 0.95

    def __post_init__(self):
        if not 0.0 < self.b_lo <= self.b_hi < 1.0:
            raise ValueError(f"need 0 < b_lo <= b_hi < 1, got [{self.b_lo}, {self.b_hi}]")
        if not 0.0 < self.r_lo <= self.r_hi < 1.0:
            raise ValueError(f"need 0 < r_lo <= r_hi < 1, got [{self.r_lo}, {self.r_hi}]")

    @property
    def beta_mid(self) -> float:
        return 0.5 * (self.b_lo + self.b_hi)

    @property
    def gamma_mid(self) -> float:
        return 0.5 * (self.r_lo + self.r_hi)


@dataclass(frozen=True)
class Parameters:
    """Transmission and recovery fields together with their box bounds."""

    grid: Grid
    beta: np.ndarray
    gamma: np.ndarray
    bounds: Bounds = field(default_factory=Bounds)

    def __post_init__(self):
        object.__setattr__(self, "beta", self.grid.check(self.beta, "beta"))
        object.__setattr__(self, "gamma", self.grid.check(self.gamma, "gamma"))

    @classmethod
    def constant(cls, grid: Grid, beta: float, gamma: float, bounds: Bounds | None = None) -> Parameters:
        return cls(grid, grid.full(beta), grid.full(gamma), bounds or Bounds())

    @classmethod
    def midpoint(cls, grid: Grid, bounds: Bounds) -> Parameters:
        return cls.constant(grid, bounds.beta_mid, bounds.gamma_mid, bounds)

    def replace(self, beta=None, gamma=None) -> Parameters:
        return Parameters(
            self.grid,
            self.beta if beta is None else beta,
            self.gamma if gamma is None else gamma,
            self.bounds,
        )

    def is_admissible(self, tol: float = 0.0) -> bool:
        b = self.bounds
        return bool(
            np.all(self.beta >= b.b_lo - tol)
            and np.all(self.beta <= b.b_hi + tol)
            and np.all(self.gamma >= b.r_lo - tol)
            and np.all(self.gamma <= b.r_hi + tol)
        )


@dataclass
class Trajectory:
    """Densely stored forward solution; row k of ``S`` and ``I`` is time ``times[k]``."""

    grid: Grid
    times: np.ndarray
    S: np.ndarray
    I: np.ndarray
    cfg: ModelConfig | None = None
    clamped: int = 0
    phi0: float = float("nan")

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    @property
    def S_final(self) -> np.ndarray:
        return self.S[-1]

    @property
    def I_final(self) -> np.ndarray:
        return self.I[-1]


def validate_initial(S0, I0) -> float:
    """Check the positivity hypotheses on the initial data and return ``min(S0 + I0)``.

    The integral condition on ``I0`` only needs the sign of the sum, so no grid
    is required.
    """
    S0 = np.asarray(S0, dtype=float)
    I0 = np.asarray(I0, dtype=float)
    if S0.shape != I0.shape:
        raise ValueError(f"S0 and I0 shapes differ: {S0.shape} vs {I0.shape}")
    if np.any(S0 < 0):
        raise NegativeInitialData(f"S0 >= 0 violated at cell {int(np.argmin(S0))}")
    if np.any(I0 < 0):
        raise NegativeInitialData(f"I0 >= 0 violated at cell {int(np.argmin(I0))}")
    if not np.sum(I0) > 0:
        raise ZeroInfectedMass("integral of I0 over the domain must be positive")
    total = S0 + I0
    phi0 = float(np.min(total))
    if not phi0 > 0:
        raise ZeroPopulationCell(f"S0 + I0 >= phi0 > 0 violated at cell {int(np.argmin(total))}")
    return phi0


def _powers(S, I, cfg: ModelConfig):
    s = np.maximum(S, cfg.floor)
    i = np.maximum(I, cfg.floor)
    return s, i, s**cfg.m * i**cfg.n


def reaction(S, I, params: Parameters, cfg: ModelConfig) -> np.ndarray:
    """Net infection rate ``beta S^m I^n - gamma I`` with clamped power-law bases."""
    _, _, sm_in = _powers(np.asarray(S, float), np.asarray(I, float), cfg)
    return params.beta * sm_in - params.gamma * np.asarray(I, float)


def reaction_jacobian(S, I, params: Parameters, cfg: ModelConfig):
    """Partial derivatives ``(dR/dS, dR/dI)`` evaluated with clamped bases."""
    s, i, sm_in = _powers(S, I, cfg)
    dR_dS = cfg.m * params.beta * sm_in / s
    dR_dI = cfg.n * params.beta * sm_in / i - params.gamma
    return dR_dS, dR_dI


def dt_max(params: Parameters, S0, I0, cfg: ModelConfig) -> float:
    """Heuristic explicit-reaction step limit ``0.1 / (b_hi max(S+I)^(m+n) + r_hi)``."""
    b = params.bounds
    peak = float(np.max(np.asarray(S0) + np.asarray(I0)))
    return 0.1 / (b.b_hi * peak ** (cfg.m + cfg.n) + b.r_hi)


def _advance(S, I, params, cfg, solver):
    R = reaction(S, I, params, cfg)
    S_new = solver.solve(S - cfg.dt * R)
    I_new = solver.solve(I + cfg.dt * R)
    clamped = int(np.count_nonzero(S_new < cfg.floor) + np.count_nonzero(I_new < cfg.floor))
    if clamped:
        S_new = np.maximum(S_new, cfg.floor)
        I_new = np.maximum(I_new, cfg.floor)
    return S_new, I_new, clamped


def step_forward(S, I, params: Parameters, cfg: ModelConfig):
    """One IMEX step; returns the new ``(S, I)`` clamped below at ``cfg.floor``."""
    grid = params.grid
    S = grid.check(S, "S")
    I = grid.check(I, "I")
    S_new, I_new, _ = _advance(S, I, params, cfg, implicit_solver(grid, cfg.dt))
    return S_new, I_new


def solve_forward(S0, I0, params: Parameters, cfg: ModelConfig, check_bounds: bool = True) -> Trajectory:
    """March the direct problem to ``cfg.T``, storing every time level.

    ``check_bounds=False`` admits coefficients slightly outside the box, as
    needed by finite-difference probes around boundary points.
    """
    grid = params.grid
    S0 = grid.check(S0, "S0")
    I0 = grid.check(I0, "I0")
    phi0 = validate_initial(S0, I0)
    if check_bounds and not params.is_admissible():
        raise ValueError("parameters lie outside their box bounds")
    limit = dt_max(params, S0, I0, cfg)
    if cfg.dt > limit:
        log.warning("dt=%.3g exceeds the reaction step heuristic %.3g", cfg.dt, limit)

    K = cfg.steps
    S = np.empty((K + 1, grid.size))
    I = np.empty((K + 1, grid.size))
    S[0], I[0] = S0, I0
    solver = implicit_solver(grid, cfg.dt)
    clamped = 0
    for k in range(K):
        try:
            S[k + 1], I[k + 1], c = _advance(S[k], I[k], params, cfg, solver)
        except LinearSolveDiverged as exc:
            raise ForwardSolveError(k, exc) from exc
        clamped += c
    if clamped:
        log.warning("positivity clamp activated %d times", clamped)
    return Trajectory(grid, cfg.times, S, I, cfg=cfg, clamped=clamped, phi0=phi0)


def mass(grid: Grid, u) -> float:
    """Integral of ``u`` over the domain."""
    return inner_l2(grid, u, np.ones(grid.size))


def conservation_report(traj: Trajectory) -> dict:
    """Mass drift, population floor and clamp diagnostics of a forward run."""
    grid = traj.grid
    totals = (traj.S + traj.I).sum(axis=1) * grid.cell_volume
    drift = np.abs(totals - totals[0]) / abs(totals[0])
    return {
        "max_relative_mass_drift": float(drift.max()),
        "min_population": float((traj.S + traj.I).min()),
        "phi0": traj.phi0,
        "min_S": float(traj.S.min()),
        "min_I": float(traj.I.min()),
        "clamp_count": traj.clamped,
    }


__all__ = [
    "Bounds",
    "ModelConfig",
    "Parameters",
    "Trajectory",
    "conservation_report",
    "dt_max",
    "mass",
    "reaction",
    "reaction_jacobian",
    "solve_forward",
    "step_forward",
    "validate_initial",
]
