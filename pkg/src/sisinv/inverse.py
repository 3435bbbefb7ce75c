"""Regularized cost, adjoint gradient and projected gradient descent."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch
from .forward import ModelConfig, Parameters, Trajectory, _powers, solve_forward
from .grid import Grid, implicit_solver, inner_l2, laplacian_neumann, norm_l2, seminorm_h1
from .sensitivity import AdjointTrajectory, solve_adjoint

log = logging.getLogger(__name__)

STEP_UNDERFLOW = 1e-14


@dataclass(frozen=True)
class InverseConfig:
    delta: float = 1e-6
    max_iters: int = 500
    grad_tol: float = 1e-8
    step0: float = 1.0
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    sobolev_smoothing: bool = False
    sobolev_mu: float = 0.01
    # Barzilai-Borwein trial step after the first iteration
    bb_steps: bool = True

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be a positive integer")
        for name in ("grad_tol", "step0", "sobolev_mu"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")
        for name in ("armijo_c", "backtrack"):
            if not 0.0 < getattr(self, name) < 1.0:
                raise ValueError(f"{name} must lie in (0,1)")


@dataclass
class Gradient:
    """L2 gradient: ``<gbeta, dbeta> + <ggamma, dgamma>`` is the directional derivative."""

    gbeta: np.ndarray
    ggamma: np.ndarray

    def dot(self, grid: Grid, dbeta, dgamma) -> float:
        return inner_l2(grid, self.gbeta, dbeta) + inner_l2(grid, self.ggamma, dgamma)


@dataclass
class IterationRecord:
    iter: int
    J: float
    misfit: float
    penalty: float
    pg_norm: float
    step: float


@dataclass
class InversionReport:
    records: list[IterationRecord]
    params: Parameters
    reason: str
    J: float
    misfit: float
    penalty: float
    gradient: Gradient | None = None
    extra: dict = field(default_factory=dict)

    @property
    def J_history(self) -> np.ndarray:
        return np.array([r.J for r in self.records])

    @property
    def iterations(self) -> int:
        return sum(1 for r in self.records if r.step > 0)


def evaluate_cost(traj: Trajectory, Sobs, Iobs, params: Parameters, delta: float):
    """Return ``(J, misfit, penalty)``."""
    grid = traj.grid
    if params.grid != grid:
        raise GridMismatch("parameters and trajectory live on different grids")
    rS = traj.S_final - grid.check(Sobs, "Sobs")
    rI = traj.I_final - grid.check(Iobs, "Iobs")
    misfit = 0.5 * (inner_l2(grid, rS, rS) + inner_l2(grid, rI, rI))
    penalty = 0.5 * delta * (seminorm_h1(grid, params.beta) + seminorm_h1(grid, params.gamma))
    return misfit + penalty, misfit, penalty


def reduced_gradient(traj: Trajectory, adj: AdjointTrajectory, params: Parameters, delta: float) -> Gradient:
    """Adjoint gradient of J.

    The time integrals run over levels ``0..K-1`` (left endpoint), the
    quadrature under which the discrete adjoint is the exact transpose of the
    forward scheme.
    """
    if len(adj.times) != len(traj.times) or not np.allclose(adj.times, traj.times, rtol=0, atol=1e-14):
        raise ValueError("adjoint and forward time grids differ")
    cfg = traj.cfg
    grid = traj.grid
    dt = traj.dt
    K = traj.steps
    _, _, sm_in = _powers(traj.S[:K], traj.I[:K], cfg)
    diff = adj.p2[:K] - adj.p1[:K]
    gbeta = dt * np.sum(sm_in * diff, axis=0)
    ggamma = -dt * np.sum(traj.I[:K] * diff, axis=0)
    if delta:
        gbeta = gbeta - delta * laplacian_neumann(grid, params.beta)
        ggamma = ggamma - delta * laplacian_neumann(grid, params.gamma)
    return Gradient(gbeta, ggamma)


def project_box(params: Parameters) -> Parameters:
    b = params.bounds
    return params.replace(
        beta=np.clip(params.beta, b.b_lo, b.b_hi),
        gamma=np.clip(params.gamma, b.r_lo, b.r_hi),
    )


def sobolev_smooth(grid: Grid, g: Gradient, mu: float) -> Gradient:
    """Apply ``(Id - mu lap)^-1`` to each component; preserves the mean."""
    if not mu > 0:
        raise ValueError("mu must be positive")
    solver = implicit_solver(grid, float(mu))
    return Gradient(solver.solve(g.gbeta), solver.solve(g.ggamma))


def projected_gradient_norm(params: Parameters, g: Gradient) -> float:
    """L2 norm of ``P(theta - g) - theta``."""
    trial = project_box(params.replace(params.beta - g.gbeta, params.gamma - g.ggamma))
    grid = params.grid
    return float(np.hypot(norm_l2(grid, trial.beta - params.beta), norm_l2(grid, trial.gamma - params.gamma)))


class Objective:
    """Bundles the data of one inverse problem and evaluates J and its gradient."""

    def __init__(self, S0, I0, Sobs, Iobs, cfg: ModelConfig, delta: float):
        self.S0, self.I0 = S0, I0
        self.Sobs, self.Iobs = Sobs, Iobs
        self.cfg = cfg
        self.delta = delta
        self.forward_solves = 0

    def solve(self, params: Parameters) -> Trajectory:
        self.forward_solves += 1
        return solve_forward(self.S0, self.I0, params, self.cfg, check_bounds=False)

    def cost(self, params: Parameters, traj: Trajectory | None = None):
        traj = traj if traj is not None else self.solve(params)
        return evaluate_cost(traj, self.Sobs, self.Iobs, params, self.delta)

    def gradient(self, params: Parameters, traj: Trajectory | None = None) -> Gradient:
        traj = traj if traj is not None else self.solve(params)
        adj = solve_adjoint(traj, self.Sobs, self.Iobs, params, self.cfg)
        return reduced_gradient(traj, adj, params, self.delta)


def invert(S0, I0, Sobs, Iobs, params0: Parameters, cfg: ModelConfig, icfg: InverseConfig) -> InversionReport:
    """Projected gradient descent with Armijo backtracking on J over the box.

    The Armijo test is evaluated at projected trial points:
    ``J(P(theta - s d)) <= J(theta) + c <g, P(theta - s d) - theta>``.
    """
    obj = Objective(S0, I0, Sobs, Iobs, cfg, icfg.delta)
    grid = params0.grid
    params = project_box(params0)
    traj = obj.solve(params)
    J, misfit, penalty = obj.cost(params, traj)
    records: list[IterationRecord] = []
    step = icfg.step0
    prev = None  # (params, direction) of the previous accepted iterate, for BB
    reason = "max_iters"
    g = None

    for it in range(icfg.max_iters + 1):
        g = obj.gradient(params, traj)
        pg = projected_gradient_norm(params, g)
        if pg <= icfg.grad_tol:
            records.append(IterationRecord(it, J, misfit, penalty, pg, 0.0))
            reason = "converged"
            break
        if it == icfg.max_iters:
            records.append(IterationRecord(it, J, misfit, penalty, pg, 0.0))
            break
        d = sobolev_smooth(grid, g, icfg.sobolev_mu) if icfg.sobolev_smoothing else g

        if icfg.bb_steps and prev is not None:
            p_old, d_old = prev
            sb = np.concatenate([params.beta - p_old.beta, params.gamma - p_old.gamma])
            yb = np.concatenate([d.gbeta - d_old.gbeta, d.ggamma - d_old.ggamma])
            sy = float(np.dot(sb, yb))
            step = float(np.dot(sb, sb)) / sy if sy > 0 else icfg.step0
        elif prev is not None:
            step = step / icfg.backtrack

        accepted = False
        while step >= STEP_UNDERFLOW:
            trial = project_box(params.replace(params.beta - step * d.gbeta, params.gamma - step * d.ggamma))
            decrease = g.dot(grid, trial.beta - params.beta, trial.gamma - params.gamma)
            t_traj = obj.solve(trial)
            Jt, mt, pt = obj.cost(trial, t_traj)
            if Jt <= J + icfg.armijo_c * decrease and decrease < 0:
                accepted = True
                break
            step *= icfg.backtrack
        records.append(IterationRecord(it, J, misfit, penalty, pg, step if accepted else 0.0))
        if not accepted:
            reason = "step_underflow"
            break
        prev = (params, d)
        params, traj = trial, t_traj
        J, misfit, penalty = Jt, mt, pt

    log.info("invert finished: %s after %d records, J=%.3e", reason, len(records), J)
    return InversionReport(
        records, params, reason, J, misfit, penalty, gradient=g, extra={"forward_solves": obj.forward_solves}
    )


def optimality_violation(params: Parameters, g: Gradient, n_samples: int = 20, seed: int = 0) -> float:
    """Worst value of ``-<g, theta_hat - theta> / ||theta_hat - theta||`` over random admissible points.

    Nonpositive values mean the first-order optimality inequality holds for
    every sample.
    """
    rng = np.random.default_rng(seed)
    b = params.bounds
    grid = params.grid
    worst = -np.inf
    for _ in range(n_samples):
        hb = rng.uniform(b.b_lo, b.b_hi, grid.size)
        hg = rng.uniform(b.r_lo, b.r_hi, grid.size)
        db, dg = hb - params.beta, hg - params.gamma
        size = np.hypot(norm_l2(grid, db), norm_l2(grid, dg))
        worst = max(worst, -g.dot(grid, db, dg) / size)
    return float(worst)


def gradient_fd_table(obj: Objective, params: Parameters, dbeta, dgamma, eps=None):
    """Central-difference check of the adjoint directional derivative.

    Returns ``(adjoint, rows)`` with rows ``(eps, fd, rel_err)``.
    """
    if eps is None:
        eps = 10.0 ** -np.arange(2, 8)
    grid = params.grid
    ad = obj.gradient(params).dot(grid, dbeta, dgamma)
    rows = []
    for e in eps:
        jp = obj.cost(params.replace(params.beta + e * dbeta, params.gamma + e * dgamma))[0]
        jm = obj.cost(params.replace(params.beta - e * dbeta, params.gamma - e * dgamma))[0]
        fd = (jp - jm) / (2 * e)
        rows.append((float(e), fd, abs(fd - ad) / max(abs(ad), 1e-300)))
    return ad, rows
