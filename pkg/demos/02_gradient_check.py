"""
Checking the adjoint gradient
=============================

The adjoint march is the exact transpose of the discrete forward step, so the
directional derivative it produces matches central differences of the
discrete cost until roundoff takes over. The error first falls like eps**2,
then rises like 1/eps: the familiar V.
"""

# %%
import numpy as np

from sisinv import Bounds, Grid, ModelConfig, Parameters, solve_forward
from sisinv.inverse import Objective, gradient_fd_table
from sisinv.sensitivity import discrete_duality_gap, duality_gap, solve_adjoint, solve_tangent

grid = Grid.line(32)
(x,) = grid.coordinates()
cfg = ModelConfig(m=0.6, n=0.4, T=1.0, dt=1 / 64)
S0 = 0.7 + 0.2 * np.cos(np.pi * x)
I0 = 0.3 + 0.1 * np.sin(2 * np.pi * x) ** 2
truth = Parameters(grid, 0.5 + 0.2 * np.cos(np.pi * x), 0.3 + 0.1 * np.cos(2 * np.pi * x))
obs = solve_forward(S0, I0, truth, cfg)

theta = Parameters.midpoint(grid, Bounds())
db, dg = 0.1 * np.cos(np.pi * x) + 0.05, 0.05 * np.sin(np.pi * x)

# %%
obj = Objective(S0, I0, obs.S_final, obs.I_final, cfg, delta=1e-6)
adjoint, rows = gradient_fd_table(obj, theta, db, dg, eps=10.0 ** -np.arange(1, 10))
print(f"adjoint directional derivative: {adjoint:.12e}")
for eps, fd, err in rows:
    print(f"eps={eps:.0e}  fd={fd:.12e}  rel err={err:.1e}")

# %%
# The tangent-linear model gives the same number from the other side. With
# left-endpoint time quadrature the pairing is exact; the trapezoid rule
# leaves a first-order quadrature gap that halves with dt.
traj = solve_forward(S0, I0, theta, cfg)
adj = solve_adjoint(traj, obs.S_final, obs.I_final, theta)
tan = solve_tangent(traj, db, dg, theta)
print("discrete duality gap :", discrete_duality_gap(traj, adj, tan, db, dg, obs.S_final, obs.I_final))
print("trapezoid duality gap:", duality_gap(traj, adj, tan, db, dg, obs.S_final, obs.I_final))
