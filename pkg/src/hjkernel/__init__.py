"""Unconditionally stable kernel-based WENO solver for Hamilton-Jacobi equations.

The spatial derivatives are represented through exponential convolution
operators inverted in closed form and truncated composition sums, so the
explicit SSP Runge-Kutta update remains stable for any time step; the
per-cell integrals use an exponential-basis WENO quadrature that keeps
derivative kinks sharp on uniform, mapped and boundary-embedded grids.
"""

from .errors import HJKernelError
from .grid import (
    EmbeddedDomain2D,
    Grid1D,
    TensorGrid2D,
    build_grid_1d,
    embed_domain_2d,
    jacobian_fd4,
    make_grid_1d,
)
from .hamiltonian import HamiltonianModel, get_model, registry, user_model
from .integrate import RKScheme, TimeController, cfl_dt, select_beta, ssp_rk_step
from .kernel import BiasedDerivatives, KernelParams, LineKernel
from .problems import (
    ConvergenceReport,
    ProblemSpec,
    catalogue,
    convergence_study,
    error_norm,
    get_problem,
)
from .solver import RunResult, SolveState, conservation_check, run
from .weno import WenoConfig

__version__ = "1.0.0"

__all__ = [
    "BiasedDerivatives",
    "ConvergenceReport",
    "EmbeddedDomain2D",
    "Grid1D",
    "HJKernelError",
    "HamiltonianModel",
    "KernelParams",
    "LineKernel",
    "ProblemSpec",
    "RKScheme",
    "RunResult",
    "SolveState",
    "TensorGrid2D",
    "TimeController",
    "WenoConfig",
    "build_grid_1d",
    "catalogue",
    "cfl_dt",
    "conservation_check",
    "convergence_study",
    "embed_domain_2d",
    "error_norm",
    "get_model",
    "get_problem",
    "jacobian_fd4",
    "make_grid_1d",
    "registry",
    "run",
    "select_beta",
    "ssp_rk_step",
    "user_model",
]
