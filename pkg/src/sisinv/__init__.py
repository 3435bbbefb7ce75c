"""Direct and inverse solvers for the spatial SIS reaction-diffusion model.

Recover the transmission rate ``beta(x)`` and recovery rate ``gamma(x)`` from
terminal observations of ``S`` and ``I`` by adjoint-based, H1-regularized,
projected gradient descent.
"""
from .errors import (
    ForwardSolveError,
    GridMismatch,
    InitialDataError,
    LinearSolveDiverged,
    NegativeInitialData,
    ProfileOutOfBounds,
    SISError,
    TrajectoryIncomplete,
    ZeroInfectedMass,
    ZeroPopulationCell,
)
from .forward import (
    Bounds,
    ModelConfig,
    Parameters,
    Trajectory,
    conservation_report,
    mass,
    reaction,
    solve_forward,
    step_forward,
    validate_initial,
)
from .grid import Grid, inner_l2, laplacian_neumann, norm_l2, seminorm_h1
from .inverse import (
    Gradient,
    InverseConfig,
    InversionReport,
    Objective,
    evaluate_cost,
    invert,
    project_box,
    reduced_gradient,
    sobolev_smooth,
)
from .sensitivity import (
    AdjointTrajectory,
    TangentTrajectory,
    discrete_duality_gap,
    duality_gap,
    solve_adjoint,
    solve_tangent,
)
from .twin import Profile, TwinSpec, make_truth, observe, score

__version__ = "0.1.0"
