"""Adjoint and tangent-linear solvers for the SIS model.

Both marches reuse the forward IMEX splitting: implicit Neumann diffusion and
explicit zeroth-order coupling.  The adjoint is marched in reversed time
``tau = T - t`` and is the exact transpose of the discrete forward step, so
the adjoint gradient agrees with finite differences of the discrete cost to
rounding level.  Relative to a plain IMEX discretization of the continuous
adjoint, this means the first reversed step carries no coupling term and the
time integrals pair state level k with adjoint level k on the left endpoint.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, TrajectoryIncomplete
from .forward import ModelConfig, Parameters, Trajectory, _powers, reaction_jacobian
from .grid import Grid, implicit_solver, inner_l2


@dataclass
class AdjointTrajectory:
    """Adjoint states ``p1, p2`` on the forward time grid.

    Row K holds the terminal data ``(S(T) - S_obs, I(T) - I_obs)``.
    """

    grid: Grid
    times: np.ndarray
    p1: np.ndarray
    p2: np.ndarray

    def sup_norm(self) -> float:
        return float(max(np.abs(self.p1).max(), np.abs(self.p2).max()))


@dataclass
class TangentTrajectory:
    grid: Grid
    times: np.ndarray
    z1: np.ndarray
    z2: np.ndarray


def _check_complete(traj: Trajectory):
    K = len(traj.times) - 1
    if K < 1 or traj.S.shape != (K + 1, traj.grid.size) or traj.I.shape != traj.S.shape:
        raise TrajectoryIncomplete("trajectory must store every time level")
    if not (np.all(np.isfinite(traj.S)) and np.all(np.isfinite(traj.I))):
        raise TrajectoryIncomplete("trajectory contains non-finite values")


def _cfg_for(traj: Trajectory, cfg: ModelConfig | None) -> ModelConfig:
    cfg = cfg if cfg is not None else traj.cfg
    if cfg is None:
        raise TrajectoryIncomplete("trajectory carries no model configuration")
    if cfg.steps != traj.steps or not np.isclose(cfg.dt, traj.dt, rtol=1e-12, atol=0.0):
        raise TrajectoryIncomplete(
            f"config has {cfg.steps} steps of {cfg.dt}, trajectory has {traj.steps} of {traj.dt}"
        )
    return cfg


def coefficient_source(traj: Trajectory, k: int, dbeta, dgamma, cfg: ModelConfig) -> np.ndarray:
    """Infected-equation source ``dbeta S^m I^n - dgamma I`` at time level k."""
    _, _, sm_in = _powers(traj.S[k], traj.I[k], cfg)
    return dbeta * sm_in - dgamma * traj.I[k]


def solve_adjoint(traj: Trajectory, Sobs, Iobs, params: Parameters, cfg: ModelConfig | None = None) -> AdjointTrajectory:
    """Backward march of the adjoint system from the terminal misfit."""
    _check_complete(traj)
    cfg = _cfg_for(traj, cfg)
    grid = traj.grid
    Sobs = grid.check(Sobs, "Sobs")
    Iobs = grid.check(Iobs, "Iobs")
    K = traj.steps
    solver = implicit_solver(grid, cfg.dt)

    p1 = np.empty_like(traj.S)
    p2 = np.empty_like(traj.I)
    p1[K] = traj.S[K] - Sobs
    p2[K] = traj.I[K] - Iobs
    # tau-step j = 0: the terminal level has no explicit coupling in the discrete transpose
    p1[K - 1] = solver.solve(p1[K])
    p2[K - 1] = solver.solve(p2[K])
    for k in range(K - 1, 0, -1):
        dR_dS, dR_dI = reaction_jacobian(traj.S[k], traj.I[k], params, cfg)
        diff = p1[k] - p2[k]
        p1[k - 1] = solver.solve(p1[k] - cfg.dt * dR_dS * diff)
        p2[k - 1] = solver.solve(p2[k] - cfg.dt * dR_dI * diff)
    return AdjointTrajectory(grid, traj.times.copy(), p1, p2)


def solve_tangent(traj: Trajectory, dbeta, dgamma, params: Parameters, cfg: ModelConfig | None = None) -> TangentTrajectory:
    """Forward march of the linearized system for a coefficient direction."""
    _check_complete(traj)
    cfg = _cfg_for(traj, cfg)
    grid = traj.grid
    dbeta = grid.check(dbeta, "dbeta")
    dgamma = grid.check(dgamma, "dgamma")
    K = traj.steps
    solver = implicit_solver(grid, cfg.dt)

    z1 = np.zeros_like(traj.S)
    z2 = np.zeros_like(traj.I)
    for k in range(K):
        dR_dS, dR_dI = reaction_jacobian(traj.S[k], traj.I[k], params, cfg)
        dR = dR_dS * z1[k] + dR_dI * z2[k] + coefficient_source(traj, k, dbeta, dgamma, cfg)
        z1[k + 1] = solver.solve(z1[k] - cfg.dt * dR)
        z2[k + 1] = solver.solve(z2[k] + cfg.dt * dR)
    return TangentTrajectory(grid, traj.times.copy(), z1, z2)


def _duality_sides(traj, adj, tan, dbeta, dgamma, Sobs, Iobs, cfg, rule):
    grid = traj.grid
    for other in (adj, tan):
        if other.grid != grid or len(other.times) != len(traj.times):
            raise GridMismatch("adjoint/tangent trajectories do not match the forward run")
    K = traj.steps
    vals = np.array(
        [
            inner_l2(grid, coefficient_source(traj, k, dbeta, dgamma, cfg), adj.p2[k] - adj.p1[k])
            for k in range(K + 1)
        ]
    )
    if rule == "trapezoid":
        lhs = traj.dt * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
    else:
        lhs = traj.dt * vals[:-1].sum()
    rhs = inner_l2(grid, traj.S[K] - Sobs, tan.z1[K]) + inner_l2(grid, traj.I[K] - Iobs, tan.z2[K])
    return lhs, rhs


def duality_gap(traj, adj, tan, dbeta, dgamma, Sobs, Iobs) -> float:
    """Relative mismatch between the space-time source pairing and the terminal pairing.

    The time integral uses the trapezoid rule, so the gap measures the
    quadrature consistency of the adjoint and shrinks at first order in dt.
    """
    lhs, rhs = _duality_sides(traj, adj, tan, dbeta, dgamma, Sobs, Iobs, traj.cfg, "trapezoid")
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-30)


def discrete_duality_gap(traj, adj, tan, dbeta, dgamma, Sobs, Iobs) -> float:
    """Dot-product test with the quadrature the discrete transpose implies; rounding-level."""
    lhs, rhs = _duality_sides(traj, adj, tan, dbeta, dgamma, Sobs, Iobs, traj.cfg, "left")
    return abs(lhs - rhs) / (abs(lhs) + abs(rhs) + 1e-30)
