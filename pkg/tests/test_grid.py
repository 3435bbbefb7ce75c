import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from sisinv.errors import GridMismatch, NonFiniteField
from sisinv.grid import Grid, implicit_solver, inner_l2, laplacian_neumann, norm_l2, seminorm_h1


def dense_laplacian(grid):
    """Neumann Laplacian assembled cell by cell with explicit ghost reflection."""
    shape = grid.cells
    L = np.zeros((grid.size, grid.size))
    for idx in np.ndindex(*shape):
        row = np.ravel_multi_index(idx, shape)
        for axis, h in enumerate(grid.spacing):
            for step in (-1, 1):
                nb = list(idx)
                nb[axis] += step
                if not 0 <= nb[axis] < shape[axis]:
                    continue  # ghost equals the cell itself: zero flux
                L[row, np.ravel_multi_index(tuple(nb), shape)] += 1 / h**2
                L[row, row] -= 1 / h**2
    return L


def test_grid_basics():
    g = Grid.rect(4, 3, 2.0, 1.5)
    assert g.size == 12
    assert g.spacing == (0.5, 0.5)
    assert g.cell_volume == 0.25
    x, y = g.coordinates()
    assert np.all((x > 0) & (x < 2.0)) and np.all((y > 0) & (y < 1.5))


@pytest.mark.parametrize("cells, extent", [((2,), (1.0,)), ((4,), (0.0,)), ((3, 3, 3), (1, 1, 1))])
def test_grid_rejects_bad_shapes(cells, extent):
    with pytest.raises(ValueError):
        Grid(cells, extent)


def test_laplacian_of_constant_is_zero():
    for g in (Grid.line(7, 3.0), Grid.rect(5, 6, 1.0, 2.0)):
        assert np.array_equal(laplacian_neumann(g, g.full(3.7)), np.zeros(g.size))


def test_laplacian_interior_stencil():
    g = Grid.line(5, 5.0)
    out = laplacian_neumann(g, [0, 0, 1, 0, 0])
    np.testing.assert_array_equal(out, [0, 1, -2, 1, 0])


def test_laplacian_mirror_boundary():
    g = Grid.line(3, 3.0)
    np.testing.assert_array_equal(laplacian_neumann(g, [1, 0, 0]), [-1, 1, 0])


@pytest.mark.parametrize("grid", [Grid.line(6, 1.3), Grid.rect(4, 5, 1.0, 0.7)])
def test_laplacian_matches_dense_assembly(grid):
    rng = np.random.default_rng(3)
    u = rng.standard_normal(grid.size)
    L = dense_laplacian(grid)
    np.testing.assert_allclose(laplacian_neumann(grid, u), L @ u, rtol=1e-13, atol=1e-12)
    np.testing.assert_allclose(grid.laplacian_matrix.toarray(), L, atol=1e-12)


def test_laplacian_rejects_wrong_length():
    with pytest.raises(GridMismatch):
        laplacian_neumann(Grid.line(4), np.zeros(5))
    with pytest.raises(NonFiniteField):
        laplacian_neumann(Grid.line(4), [0, np.nan, 0, 0])


def test_inner_l2_examples():
    g = Grid.line(10)
    assert inner_l2(g, g.full(1), g.full(1)) == pytest.approx(1.0, abs=1e-15)
    half = Grid.line(5, 0.5)
    assert inner_l2(half, half.full(2), half.full(3)) == pytest.approx(3.0, abs=1e-14)


def test_inner_l2_matches_summation():
    g = Grid.line(4, 2.0)
    rng = np.random.default_rng(0)
    u, v = rng.random(4), rng.random(4)
    expected = sum(a * b * 0.5 for a, b in zip(u, v))
    assert inner_l2(g, u, v) == pytest.approx(expected, rel=1e-14)


def test_inner_l2_grid_mismatch():
    with pytest.raises(GridMismatch):
        inner_l2(Grid.line(4), np.ones(4), np.ones(3))


def test_seminorm_examples():
    g = Grid.line(3, 3.0)
    assert seminorm_h1(g, [0, 1, 0]) == pytest.approx(2.0)
    assert seminorm_h1(g, g.full(0.3)) == 0.0
    u = np.array([0.1, 0.7, -0.2])
    assert seminorm_h1(g, 2 * u) == pytest.approx(4 * seminorm_h1(g, u), rel=1e-14)


@pytest.mark.parametrize("grid", [Grid.line(9, 2.0), Grid.rect(5, 4, 1.0, 3.0)])
def test_seminorm_equals_summation_by_parts(grid):
    u = np.random.default_rng(1).standard_normal(grid.size)
    sbp = -inner_l2(grid, u, laplacian_neumann(grid, u))
    assert seminorm_h1(grid, u) == pytest.approx(sbp, rel=1e-12)


grids = st.sampled_from([Grid.line(3), Grid.line(8, 2.5), Grid.rect(3, 4, 1.0, 0.5), Grid.rect(6, 5)])


@settings(max_examples=40, deadline=None)
@given(grid=grids, seed=st.integers(0, 2**32 - 1))
def test_laplacian_self_adjoint_and_conservative(grid, seed):
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, grid.size))
    lhs = inner_l2(grid, laplacian_neumann(grid, u), v)
    rhs = inner_l2(grid, u, laplacian_neumann(grid, v))
    scale = norm_l2(grid, u) * norm_l2(grid, v) * max(1 / h**2 for h in grid.spacing)
    assert abs(lhs - rhs) <= 1e-12 * scale
    total = inner_l2(grid, laplacian_neumann(grid, u), np.ones(grid.size))
    assert abs(total) <= 1e-12 * norm_l2(grid, u) * max(1 / h**2 for h in grid.spacing)


@settings(max_examples=40, deadline=None)
@given(u=arrays(float, 6, elements=st.floats(-1e3, 1e3)), c=st.floats(-10, 10))
def test_seminorm_nonnegative_and_shift_invariant(u, c):
    g = Grid.line(6)
    s = seminorm_h1(g, u)
    assert s >= 0
    assert seminorm_h1(g, u + c) == pytest.approx(s, rel=1e-9, abs=1e-9)
    assert seminorm_h1(g, g.full(c)) <= 1e-14


@pytest.mark.parametrize("grid", [Grid.line(7), Grid.rect(4, 4)])
def test_implicit_solver_matches_dense_solve(grid):
    coef = 0.3
    b = np.random.default_rng(5).random(grid.size)
    A = np.eye(grid.size) - coef * dense_laplacian(grid)
    np.testing.assert_allclose(implicit_solver(grid, coef).solve(b), np.linalg.solve(A, b), rtol=1e-9, atol=1e-12)
