import numpy as np
import pytest

from conftest import rk4_sis
from sisinv import Bounds, Grid, ModelConfig, Parameters, solve_forward
from sisinv.errors import GridMismatch, NegativeInitialData, ZeroInfectedMass, ZeroPopulationCell
from sisinv.forward import conservation_report, dt_max, mass, reaction, reaction_jacobian, step_forward, validate_initial
from sisinv.grid import norm_l2

from test_grid import dense_laplacian


def test_model_config_rounds_dt_and_validates():
    cfg = ModelConfig(T=1.0, dt=0.3)
    assert cfg.steps == 3 and cfg.dt == pytest.approx(1 / 3)
    assert cfg.times[-1] == pytest.approx(1.0)
    for bad in (dict(m=0.0), dict(n=1.0), dict(T=0), dict(dt=-1)):
        with pytest.raises(ValueError):
            ModelConfig(**bad)


def test_bounds_validation():
    with pytest.raises(ValueError):
        Bounds(b_lo=0.6, b_hi=0.5)
    with pytest.raises(ValueError):
        Bounds(r_hi=1.0)


def test_validate_initial_examples():
    assert validate_initial(np.full(4, 0.8), np.full(4, 0.2)) == pytest.approx(1.0)
    assert validate_initial([1.0, 0.0], [0.0, 0.5]) == 0.5
    with pytest.raises(ZeroInfectedMass):
        validate_initial(np.ones(3), np.zeros(3))
    with pytest.raises(NegativeInitialData):
        validate_initial([1.0, -0.1, 1.0], [0.1, 0.1, 0.1])
    with pytest.raises(ZeroPopulationCell):
        validate_initial([1.0, 0.0, 1.0], [0.1, 0.0, 0.1])


def test_reaction_examples():
    g = Grid.line(3)
    cfg0 = ModelConfig(m=0.5, n=0.5, floor=0.0)
    p = Parameters.constant(g, 0.5, 0.25)
    assert np.all(reaction(g.full(0.7), g.full(0.0), p, cfg0) == 0)
    np.testing.assert_allclose(reaction(g.full(1.0), g.full(1.0), p, cfg0), 0.25)
    q = Parameters.constant(g, 0.1, 0.2)
    np.testing.assert_allclose(reaction(g.full(4.0), g.full(9.0), q, cfg0), -1.2, rtol=1e-14)


def test_reaction_jacobian_matches_differences():
    g = Grid.line(4)
    cfg = ModelConfig(m=0.6, n=0.4)
    p = Parameters(g, np.array([0.2, 0.4, 0.6, 0.8]), np.array([0.3, 0.1, 0.5, 0.7]))
    S, I = np.array([0.5, 0.9, 0.3, 0.7]), np.array([0.2, 0.4, 0.6, 0.1])
    dS, dI = reaction_jacobian(S, I, p, cfg)
    e = 1e-6
    fdS = (reaction(S + e, I, p, cfg) - reaction(S - e, I, p, cfg)) / (2 * e)
    fdI = (reaction(S, I + e, p, cfg) - reaction(S, I - e, p, cfg)) / (2 * e)
    np.testing.assert_allclose(dS, fdS, rtol=1e-8)
    np.testing.assert_allclose(dI, fdI, rtol=1e-8)


def test_step_forward_heat_fixed_point():
    g = Grid.line(10)
    p = Parameters(g, np.zeros(10), np.zeros(10))
    S, _ = step_forward(g.full(0.4), g.full(0.1), p, ModelConfig(dt=0.05))
    np.testing.assert_allclose(S, 0.4, atol=1e-12)


@pytest.mark.parametrize("grid", [Grid.line(16, 2.0), Grid.rect(4, 4, 1.0, 1.0)])
def test_step_forward_matches_dense_backward_euler(grid):
    cfg = ModelConfig(dt=0.01, T=0.01)
    p = Parameters(grid, np.zeros(grid.size), np.zeros(grid.size))
    spike = np.zeros(grid.size)
    spike[grid.size // 3] = 1.0
    S, I = step_forward(spike, grid.full(0.2), p, cfg)
    A = np.eye(grid.size) - cfg.dt * dense_laplacian(grid)
    np.testing.assert_allclose(S, np.linalg.solve(A, spike), rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(I, 0.2, atol=1e-12)


def test_step_forward_rejects_wrong_grid():
    g = Grid.line(5)
    with pytest.raises(GridMismatch):
        step_forward(np.ones(4), np.ones(4), Parameters.constant(g, 0.5, 0.5), ModelConfig())


def test_constant_data_matches_rk4():
    g = Grid.line(8)
    cfg = ModelConfig(m=0.6, n=0.4, T=1.0, dt=1 / 256)
    p = Parameters.constant(g, 0.5, 0.25)
    traj = solve_forward(g.full(0.8), g.full(0.2), p, cfg)
    assert np.ptp(traj.S, axis=1).max() < 1e-13
    assert np.ptp(traj.I, axis=1).max() < 1e-13
    ref = rk4_sis(0.8, 0.2, 0.5, 0.25, 0.6, 0.4, 1.0, cfg.dt / 100)
    got = np.array([traj.S_final[0], traj.I_final[0]])
    assert np.linalg.norm(got - ref) / np.linalg.norm(ref) <= 1e-3


def test_decoupled_heat_conserves_each_mass():
    g = Grid.line(20)
    (x,) = g.coordinates()
    p = Parameters(g, np.zeros(20), np.zeros(20))
    S0, I0 = 0.5 + 0.4 * np.cos(3 * np.pi * x), 0.2 + 0.1 * x
    traj = solve_forward(S0, I0, p, ModelConfig(dt=1 / 32), check_bounds=False)
    assert abs(mass(g, traj.S_final) - mass(g, S0)) <= 1e-12 * mass(g, S0)
    assert abs(mass(g, traj.I_final) - mass(g, I0)) <= 1e-12 * mass(g, I0)


def test_mass_examples():
    assert mass(Grid.line(7), np.ones(7)) == pytest.approx(1.0, abs=1e-15)
    assert mass(Grid.line(3, 1.5), [1, 2, 3]) == pytest.approx(3.0, abs=1e-14)


def test_total_mass_and_population_floor(line32):
    d = line32
    traj = solve_forward(d["S0"], d["I0"], d["truth"], d["cfg"])
    rep = conservation_report(traj)
    assert rep["max_relative_mass_drift"] <= 1e-11
    assert rep["min_population"] >= rep["phi0"] - 1e-8
    assert rep["clamp_count"] == 0
    assert traj.S.shape == (d["cfg"].steps + 1, 32)


def test_solve_forward_refuses_out_of_box():
    g = Grid.line(4)
    p = Parameters.constant(g, 0.99, 0.5)
    with pytest.raises(ValueError):
        solve_forward(g.full(0.5), g.full(0.5), p, ModelConfig())


def test_dt_max_heuristic():
    g = Grid.line(4)
    p = Parameters.constant(g, 0.5, 0.5)
    assert dt_max(p, g.full(0.8), g.full(0.2), ModelConfig()) == pytest.approx(0.1 / (0.95 + 0.95))


def test_spatial_refinement_is_second_order():
    cfg = ModelConfig(m=0.5, n=0.5, T=0.25, dt=1 / 512)

    def final_S(n):
        g = Grid.line(n)
        (x,) = g.coordinates()
        p = Parameters(g, 0.5 + 0.2 * np.cos(np.pi * x), 0.3 + 0.1 * np.cos(np.pi * x))
        return solve_forward(0.7 + 0.2 * np.cos(np.pi * x), 0.3 + 0.1 * np.cos(2 * np.pi * x), p, cfg).S_final

    # cell centers of the coarse grid are averages of pairs of fine centers
    coarse = [final_S(n) for n in (16, 32, 64)]
    errs = []
    for a, b in zip(coarse[:-1], coarse[1:]):
        g = Grid.line(len(a))
        errs.append(norm_l2(g, a - 0.5 * (b[0::2] + b[1::2])))
    order = np.log2(errs[0] / errs[1])
    assert order >= 1.8
