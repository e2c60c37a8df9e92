"""Spectral low-mode reduction for variable-coefficient diffusion on the unit square.

The five-point finite-difference operator is projected onto sampled
Dirichlet-Laplacian sine modes; the small dense Galerkin system is solved
and lifted back to the grid.  Direct, multigrid and Krylov baselines and a
dense Schur-complement oracle live alongside for comparison.
"""

__version__ = "0.1.0"

from .assembly import (
    Problem,
    assemble_operator,
    assemble_rhs,
    edge_coefficients,
    manufactured_problem,
    residual,
)
from .baselines import SolveReport, solve_cg, solve_deflated_cg, solve_direct
from .errors import (
    ConsistencyFailure,
    ConvergenceFailure,
    DefinitenessFailure,
    EllipticityViolation,
    EvaluationError,
    FeasibilityError,
    GridIncompatible,
    InvalidArgument,
    LowModeError,
    NyquistViolation,
)
from .grid import Grid2D, discrete_h1_seminorm, discrete_l2_norm, make_grid, sample_field
from .multigrid import build_mg_hierarchy, mg_iterate, mg_preconditioned_cg
from .reduced import (
    condition_number,
    energy_norm,
    lift,
    project_system,
    reduced_solve,
    solve_full_basis,
    solve_reduced,
)
from .schur import exact_schur, schur_decay_report, transform_full
from .spectral import SpectralBasis, build_basis, discrete_eigenvalue, eigenvalue, tail_weight
