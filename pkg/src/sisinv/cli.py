"""Command line driver: ``sisinv <verb> --config <path> [--out DIR] [--seed N] [--slices K]``.

Verbs are ``forward``, ``adjoint-check``, ``invert`` and ``sweep``.  Exit status
is 0 on success, 1 when configuration or input data fail validation, and 2
when a solver fails.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io
from .config import ConfigSyntaxError, RunConfig, ValidationError, load_config
from .errors import (
    GridMismatch,
    InitialDataError,
    NonFiniteField,
    ProfileOutOfBounds,
    SISError,
)
from .forward import Parameters, conservation_report, solve_forward, validate_initial
from .grid import Grid, norm_l2, seminorm_h1
from .inverse import Objective, gradient_fd_table, invert, optimality_violation
from .sensitivity import discrete_duality_gap, duality_gap, solve_adjoint, solve_tangent
from .twin import TwinSpec, disagreement, make_truth, observe, random_admissible, score

log = logging.getLogger("sisinv")

VERBS = ("forward", "adjoint-check", "invert", "sweep")
EXIT_OK, EXIT_INVALID, EXIT_SOLVER = 0, 1, 2
_INVALID = (ConfigSyntaxError, ValidationError, InitialDataError, ProfileOutOfBounds, GridMismatch,
            NonFiniteField, FileNotFoundError)


@dataclasses.dataclass
class Problem:
    """Resolved inputs of a run: initial data, observations and optional truth."""

    grid: Grid
    S0: np.ndarray
    I0: np.ndarray
    truth: Parameters | None = None
    Sobs: np.ndarray | None = None
    Iobs: np.ndarray | None = None


def _field_from_file(cfg: RunConfig, name: str, grid: Grid) -> np.ndarray:
    path = Path(name)
    if not path.is_absolute():
        path = cfg.base / path
    fgrid, values = io.read_field(path)
    if fgrid != grid:
        raise GridMismatch(f"{path}: field grid {fgrid} differs from configured grid {grid}")
    return values


def prepare(cfg: RunConfig, verb: str) -> Problem:
    """Build initial data, truth and observations; fails fast before any solve."""
    grid = cfg.grid
    if verb == "invert" and cfg.twin is None and not cfg.has_observations:
        raise ValidationError("observations.s_obs", "invert needs observation files or a twin block")
    if cfg.s0_file is not None:
        S0 = _field_from_file(cfg, cfg.s0_file, grid)
        I0 = _field_from_file(cfg, cfg.i0_file, grid)
    else:
        S0, I0 = cfg.s0.evaluate(grid), cfg.i0.evaluate(grid)
    validate_initial(S0, I0)
    prob = Problem(grid, S0, I0)
    if cfg.has_observations:
        prob.Sobs = _field_from_file(cfg, cfg.s_obs, grid)
        prob.Iobs = _field_from_file(cfg, cfg.i_obs, grid)
    twin = cfg.twin
    if twin is None and verb == "adjoint-check" and not cfg.has_observations:
        twin = TwinSpec()
    if twin is not None:
        prob.truth = make_truth(twin, grid, cfg.bounds)
    return prob


def _observe(cfg: RunConfig, prob: Problem, seed: int):
    if prob.Sobs is not None:
        return
    traj = solve_forward(prob.S0, prob.I0, prob.truth, cfg.model)
    noise = cfg.twin.noise if cfg.twin is not None else 0.0
    prob.Sobs, prob.Iobs = observe(traj, noise, seed)


def _params0(cfg: RunConfig, seed: int) -> Parameters:
    if cfg.init == "random":
        return random_admissible(cfg.grid, cfg.bounds, seed)
    return Parameters.midpoint(cfg.grid, cfg.bounds)


def run_forward(cfg: RunConfig, prob: Problem, out: Path, seed: int) -> dict:
    params = prob.truth or Parameters.midpoint(cfg.grid, cfg.bounds)
    traj = solve_forward(prob.S0, prob.I0, params, cfg.model)
    io.write_trajectory(out / "trajectory", traj, cfg.slices)
    rep = conservation_report(traj)
    io.write_table(out / "conservation.csv", list(rep), [list(rep.values())], cfg.resolved)
    return rep


def run_adjoint_check(cfg: RunConfig, prob: Problem, out: Path, seed: int) -> dict:
    _observe(cfg, prob, seed)
    grid, model = cfg.grid, cfg.model
    theta = Parameters.midpoint(grid, cfg.bounds)
    obj = Objective(prob.S0, prob.I0, prob.Sobs, prob.Iobs, model, cfg.inverse.delta)
    rng = np.random.default_rng(cfg.check_seed)
    fd_rows, mins = [], []
    for j in range(cfg.check_directions):
        target = random_admissible(grid, cfg.bounds, int(rng.integers(2**32)))
        db, dg = target.beta - theta.beta, target.gamma - theta.gamma
        ad, rows = gradient_fd_table(obj, theta, db, dg)
        mins.append(min(r[2] for r in rows))
        fd_rows += [(j, e, fd, ad, err) for e, fd, err in rows]
    io.write_table(out / "gradient_fd.csv", ["direction", "eps", "fd", "adjoint", "rel_err"], fd_rows, cfg.resolved)

    db, dg = _smooth_direction(grid)
    traj = obj.solve(theta)
    adj = solve_adjoint(traj, prob.Sobs, prob.Iobs, theta, model)
    tan = solve_tangent(traj, db, dg, theta, model)
    gap = duality_gap(traj, adj, tan, db, dg, prob.Sobs, prob.Iobs)
    dgap = discrete_duality_gap(traj, adj, tan, db, dg, prob.Sobs, prob.Iobs)
    io.write_table(out / "duality.csv", ["K", "gap_trapezoid", "gap_discrete"], [(traj.steps, gap, dgap)], cfg.resolved)

    tan_rows = []
    for e in (1e-1, 1e-2, 1e-3, 1e-4):
        pert = obj.solve(theta.replace(theta.beta + e * db, theta.gamma + e * dg))
        fd = (pert.S_final - traj.S_final) / e
        tan_rows.append((e, norm_l2(grid, tan.z1[-1] - fd) / norm_l2(grid, tan.z1[-1])))
    io.write_table(out / "tangent.csv", ["eps", "rel_err_z1"], tan_rows, cfg.resolved)
    return {"worst_min_fd_rel_err": float(max(mins)), "duality_gap": gap, "discrete_duality_gap": dgap}


def _smooth_direction(grid: Grid):
    coords = grid.coordinates()
    db = 0.1 * np.prod([np.cos(np.pi * x / L) for x, L in zip(coords, grid.extent)], axis=0)
    dg = 0.05 * np.prod([np.sin(np.pi * x / L) for x, L in zip(coords, grid.extent)], axis=0)
    return db, dg


def _invert_job(args):
    cfg, prob, params0, delta = args
    icfg = dataclasses.replace(cfg.inverse, delta=delta)
    return invert(prob.S0, prob.I0, prob.Sobs, prob.Iobs, params0, cfg.model, icfg)


def _summarize(report, truth):
    grid = report.params.grid
    row = {
        "J": report.J,
        "misfit": report.misfit,
        "penalty": report.penalty,
        "seminorm": seminorm_h1(grid, report.params.beta) + seminorm_h1(grid, report.params.gamma),
        "reason": report.reason,
        "iterations": report.iterations,
        "optimality_violation": optimality_violation(report.params, report.gradient),
    }
    if truth is not None:
        sc = score(report.params, truth)
        row.update(rel_beta=sc.rel_beta, rel_gamma=sc.rel_gamma,
                   shifted_rel_beta=sc.shifted_rel_beta, shifted_rel_gamma=sc.shifted_rel_gamma)
    return row


def run_invert(cfg: RunConfig, prob: Problem, out: Path, seed: int) -> dict:
    _observe(cfg, prob, seed)
    report = _invert_job((cfg, prob, _params0(cfg, seed), cfg.inverse.delta))
    io.write_inversion(out, report, cfg.resolved)
    summary = _summarize(report, prob.truth)
    io.write_table(out / "summary.csv", list(summary), [list(summary.values())], cfg.resolved)
    if prob.truth is not None:
        io.write_field(out / "beta_true.csv", cfg.grid, prob.truth.beta)
        io.write_field(out / "gamma_true.csv", cfg.grid, prob.truth.gamma)
    return summary


def run_sweep(cfg: RunConfig, prob: Problem, out: Path, seed: int) -> dict:
    _observe(cfg, prob, seed)
    jobs = []
    for delta in cfg.sweep_deltas:
        jobs.append((cfg, prob, _params0(cfg, seed), delta))
        for s in range(cfg.sweep_starts):
            jobs.append((cfg, prob, random_admissible(cfg.grid, cfg.bounds, seed + 1 + s), delta))
    if cfg.sweep_jobs > 1:
        with ProcessPoolExecutor(cfg.sweep_jobs) as pool:
            reports = list(pool.map(_invert_job, jobs))
    else:
        reports = [_invert_job(j) for j in jobs]

    per = 1 + cfg.sweep_starts
    rows = []
    for i, delta in enumerate(cfg.sweep_deltas):
        main, starts = reports[i * per], reports[i * per + 1:(i + 1) * per]
        sub = out / f"delta_{delta:g}"
        io.write_inversion(sub, main, cfg.resolved)
        for s, rep in enumerate(starts):
            io.write_inversion(sub / f"start_{s}", rep, cfg.resolved)
        pairs = [disagreement(a.params, b.params) for k, a in enumerate(starts) for b in starts[k + 1:]]
        row = {"delta": delta, **_summarize(main, prob.truth)}
        row["agreement_raw"] = max(p[0] for p in pairs)
        row["agreement_shifted"] = max(p[1] for p in pairs)
        row["all_nonincreasing"] = all(bool(np.all(np.diff(r.J_history) <= 0)) for r in [main, *starts])
        rows.append(row)
    io.write_table(out / "sweep.csv", list(rows[0]), [list(r.values()) for r in rows], cfg.resolved)
    return {"rows": rows}


RUNNERS = {
    "forward": run_forward,
    "adjoint-check": run_adjoint_check,
    "invert": run_invert,
    "sweep": run_sweep,
}


def run(verb: str, cfg: RunConfig, out=None, seed=None, slices=None) -> int:
    """Execute one verb and return the exit status."""
    if verb not in RUNNERS:
        log.error("unknown verb %r; expected one of %s", verb, ", ".join(VERBS))
        return EXIT_INVALID
    if slices is not None:
        cfg = dataclasses.replace(cfg, slices=slices, resolved={**cfg.resolved, "output.slices": str(slices)})
    if seed is not None:
        twin = dataclasses.replace(cfg.twin, seed=seed) if cfg.twin is not None else None
        cfg = dataclasses.replace(cfg, twin=twin, resolved={**cfg.resolved, "twin.seed": str(seed)})
    seed = cfg.twin.seed if cfg.twin is not None else 0
    outdir = Path(out) if out is not None else cfg.base / cfg.out
    try:
        prob = prepare(cfg, verb)
    except _INVALID as exc:
        log.error("validation failed: %s", exc)
        return EXIT_INVALID
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.resolved").write_text("".join(f"{k} = {v}\n" for k, v in cfg.resolved.items()))
    try:
        result = RUNNERS[verb](cfg, prob, outdir, seed)
    except _INVALID as exc:
        log.error("validation failed: %s", exc)
        return EXIT_INVALID
    except SISError as exc:
        log.error("solver failure in %s: %s", verb, exc)
        return EXIT_SOLVER
    log.info("%s finished: %s", verb, result if verb != "sweep" else f"{len(result['rows'])} deltas")
    return EXIT_OK


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="sisinv", description=__doc__.splitlines()[0])
    parser.add_argument("verb", choices=VERBS)
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--out", type=Path, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--slices", type=int, default=None)
    parser.add_argument("-v", "--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        log.error("--seed must be an unsigned 64-bit integer")
        return EXIT_INVALID
    if args.slices is not None and args.slices < 1:
        log.error("--slices must be >= 1")
        return EXIT_INVALID
    try:
        cfg = load_config(args.config)
    except (ConfigSyntaxError, ValidationError, OSError) as exc:
        log.error("%s: %s", args.config, exc)
        return EXIT_INVALID
    return run(args.verb, cfg, args.out, args.seed, args.slices)


if __name__ == "__main__":
    sys.exit(main())
