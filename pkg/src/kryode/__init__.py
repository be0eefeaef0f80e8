"""kryode: restarted block Krylov solver for linear ODE systems.

Solves ``y' = -A y + g(t)``, ``y(0) = v`` on ``[0, T]`` in two stages: a
truncated-SVD polynomial model of the source term, then restartable block
Krylov correction cycles whose accuracy is limited only by the source-fit
error and the residual tolerance. See :func:`kryode.solve` for the main entry
point and ``kryode.cli`` for the command-line interface.
"""

from . import kernels
from .arnoldi import BlockArnoldiDecomposition, block_arnoldi
from .operators import Operator
from .oracle import OracleResult, constant_source_exact, rk4_solve
from .projected import (
    ProjectedProblem,
    ProjectedSolution,
    residual_coeff,
    residual_norm_on_grid,
    solve_projected,
)
from .solver import (
    AccuracyWarning,
    BreakdownError,
    CycleRecord,
    Solution,
    SolverConfig,
    evaluate_solution,
    shift_problem,
    solve,
)
from .source import (
    FitReport,
    PolySource,
    SourceTerm,
    TimeGrid,
    TruncatedSvd,
    build_poly_source,
    chebyshev_grid,
    evaluate_poly_source,
    fit_mode_polynomials,
    fit_values,
    sample_source,
    truncate_rank,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyWarning",
    "BlockArnoldiDecomposition",
    "BreakdownError",
    "CycleRecord",
    "FitReport",
    "Operator",
    "OracleResult",
    "PolySource",
    "ProjectedProblem",
    "ProjectedSolution",
    "Solution",
    "SolverConfig",
    "SourceTerm",
    "TimeGrid",
    "TruncatedSvd",
    "block_arnoldi",
    "build_poly_source",
    "chebyshev_grid",
    "constant_source_exact",
    "evaluate_poly_source",
    "evaluate_solution",
    "fit_mode_polynomials",
    "fit_values",
    "kernels",
    "residual_coeff",
    "residual_norm_on_grid",
    "rk4_solve",
    "sample_source",
    "shift_problem",
    "solve",
    "solve_projected",
    "truncate_rank",
    "__version__",
]
