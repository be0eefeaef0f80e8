"""Restarted block Krylov solver for ``y' = -A y + g(t)``, ``y(0) = v``.

The driver shifts the problem to a zero initial value, models the shifted
source as ``U p(t)`` with orthonormal modes and polynomial coefficients, and
then repeats correction cycles: build a block Krylov subspace from the
current residual modes, solve the projected IVP exactly, accumulate the
correction, and measure the closed-form residual. The residual after a cycle
again has the separable form, which is what makes restarting possible: its
modes are the trailing basis block and its coefficient function is refit by
polynomials on the same sample grid. The achievable accuracy is bounded below
by the source fit and refit errors, which are therefore recorded per cycle
and surfaced as a warning when they threaten the requested tolerance.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .arnoldi import block_arnoldi
from .projected import (
    ProjectedSolution,
    residual_coeff,
    residual_norm_on_grid,
    solve_projected,
)
from .source import (
    SourceTerm,
    chebyshev_grid,
    fit_values,
    poly_source_from_samples,
    sample_source,
)

__all__ = [
    "SolverConfig",
    "CycleRecord",
    "SolveCycle",
    "Solution",
    "BreakdownError",
    "AccuracyWarning",
    "shift_problem",
    "solve",
    "evaluate_solution",
]

# Below this source magnitude the problem is treated as the equilibrium case.
_ZERO_SOURCE_GUARD = 1e-300


class BreakdownError(RuntimeError):
    """Non-finite values appeared during an iteration cycle."""

    def __init__(self, cycle, message):
        super().__init__(f"numerical breakdown in cycle {cycle}: {message}")
        self.cycle = cycle


class AccuracyWarning(UserWarning):
    """A recorded fit error endangers the requested tolerance."""


@dataclass
class SolverConfig:
    """Tunable parameters of the solver.

    ``samples`` is the size of the time grid used for sampling, residual
    monitoring and refitting; ``rank_m`` (explicit) or ``rank_tol``
    (relative spectrum threshold) select how many source modes to keep;
    ``degree`` is the shared polynomial degree; ``block_steps`` the Krylov
    steps per cycle; ``max_restarts`` the total number of cycles allowed;
    ``tol`` the relative residual target. ``mode`` chooses between storing
    only grid snapshots ("grid") and additionally retaining the per-cycle
    bases for arbitrary-time evaluation ("evaluator").
    """

    samples: int = 40
    rank_m: int | None = None
    rank_tol: float = 1e-12
    degree: int = 10
    block_steps: int = 10
    max_restarts: int = 30
    tol: float = 1e-8
    output_grid_size: int = 101
    mode: str = "grid"
    deflation_tol: float = 1e-10

    def validate(self):
        if self.samples < 2:
            raise ValueError(f"samples must be at least 2, got {self.samples}")
        if self.rank_m is not None and self.rank_m < 1:
            raise ValueError(f"rank_m must be positive, got {self.rank_m}")
        if not self.rank_tol >= 0.0:
            raise ValueError(f"rank_tol must be non-negative, got {self.rank_tol}")
        if self.degree < 0:
            raise ValueError(f"degree must be non-negative, got {self.degree}")
        if self.degree + 1 > self.samples:
            raise ValueError(
                f"degree {self.degree} requires at least {self.degree + 1} samples, "
                f"got {self.samples}"
            )
        if self.block_steps < 1:
            raise ValueError(f"block_steps must be positive, got {self.block_steps}")
        if self.max_restarts < 1:
            raise ValueError(f"max_restarts must be positive, got {self.max_restarts}")
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.output_grid_size < 2:
            raise ValueError(
                f"output_grid_size must be at least 2, got {self.output_grid_size}"
            )
        if self.mode not in ("grid", "evaluator"):
            raise ValueError(f"mode must be 'grid' or 'evaluator', got {self.mode!r}")
        if not self.deflation_tol >= 0.0:
            raise ValueError(
                f"deflation_tol must be non-negative, got {self.deflation_tol}"
            )


@dataclass(frozen=True)
class CycleRecord:
    """One row of the convergence history.

    ``fit_residual`` is the polynomial (re)fit error of the source model the
    cycle ran with: the initial model fit for cycle 0, the residual refit for
    later cycles.
    """

    cycle: int
    max_rel_residual: float
    rank: int
    fit_residual: float


@dataclass(frozen=True)
class SolveCycle:
    """Basis and projected solution retained in evaluator mode."""

    basis: np.ndarray
    projected: ProjectedSolution


@dataclass(frozen=True)
class Solution:
    """Outcome of :func:`solve`.

    ``states[i]`` approximates ``y(times[i])`` with the initial value added
    back; ``states[0]`` equals the initial value exactly. In evaluator mode
    ``cycles`` retains the per-cycle bases and projected solutions so
    :meth:`evaluate` can reconstruct ``y(t)`` at arbitrary times.
    """

    shift: np.ndarray
    times: np.ndarray
    states: np.ndarray
    residual_history: tuple
    converged: bool
    t_end: float
    mode: str
    cycles: tuple | None = field(default=None, repr=False)

    def evaluate(self, t):
        return evaluate_solution(self, t)


def shift_problem(g, op, v):
    """Shifted source ``t -> g(t) - A v`` for solving with zero initial value.

    Solving the shifted problem and adding ``v`` back reproduces the solution
    of the original one. Returns ``g`` unchanged when ``v`` is zero.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (op.dimension,):
        raise ValueError(
            f"initial value shape {v.shape} incompatible with operator dimension "
            f"{op.dimension}"
        )
    if g.dimension != op.dimension:
        raise ValueError(
            f"source dimension {g.dimension} != operator dimension {op.dimension}"
        )
    if not v.any():
        return g
    av = op.apply(v)
    return SourceTerm(g.dimension, lambda t: g(t) - av, kind=f"shifted({g.kind})")


def solve(op, v, g, t_end, config=None):
    """Solve ``y' = -A y + g(t)``, ``y(0) = v`` on ``[0, t_end]``.

    Parameters
    ----------
    op : Operator
        The matrix ``A`` (dense, sparse, or matrix-free).
    v : (n,) array_like
        Initial value.
    g : SourceTerm
        Source term, evaluable on ``[0, t_end]``.
    t_end : float
    config : SolverConfig, optional

    Returns
    -------
    Solution
        Snapshots on a uniform output grid, the per-cycle residual history,
        and the convergence flag. Residuals are relative to the largest
        sampled norm of the shifted source.

    Raises
    ------
    ValueError
        On inconsistent dimensions or invalid configuration.
    BreakdownError
        When non-finite values appear mid-iteration.
    """
    cfg = config if config is not None else SolverConfig()
    cfg.validate()
    if not (np.isfinite(t_end) and t_end > 0):
        raise ValueError(f"t_end must be positive and finite, got {t_end}")
    n = op.dimension
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (n,):
        raise ValueError(f"initial value must have shape ({n},), got {v.shape}")
    if not np.isfinite(v).all():
        raise ValueError("initial value contains non-finite entries")

    shifted = shift_problem(g, op, v)
    grid = chebyshev_grid(cfg.samples, t_end)
    samples = sample_source(shifted, grid)
    denom = float(np.linalg.norm(samples, axis=0).max())

    times = np.linspace(0.0, t_end, cfg.output_grid_size)
    states = np.zeros((times.size, n))
    keep_cycles = cfg.mode == "evaluator"
    retained = [] if keep_cycles else None

    if denom <= _ZERO_SOURCE_GUARD:
        # Equilibrium: the shifted problem is identically zero.
        states += v
        return Solution(
            shift=v.copy(),
            times=times,
            states=states,
            residual_history=(CycleRecord(0, 0.0, 0, 0.0),),
            converged=True,
            t_end=float(t_end),
            mode=cfg.mode,
            cycles=tuple(retained) if keep_cycles else None,
        )

    model = poly_source_from_samples(
        samples, grid, cfg.degree, rank_m=cfg.rank_m,
        rank_tol=None if cfg.rank_m is not None else cfg.rank_tol,
    )
    modes = model.modes
    coeffs = model.coeffs
    fit_residual = model.fit_report.poly_fit_residual

    taus = grid.points / t_end
    vander = np.vander(taus, cfg.degree + 1, increasing=True)

    history = []
    converged = False
    for cycle in range(cfg.max_restarts):
        width = modes.shape[1]
        # Keep the requested subspace dimension within the state space; an
        # invariant subspace terminates the cycle early anyway.
        k_eff = min(cfg.block_steps, max(1, n // width))
        try:
            dec = block_arnoldi(op, modes, k_eff, cfg.deflation_tol)
            lifted = np.zeros((dec.dim, cfg.degree + 1))
            lifted[:width, :] = coeffs
            psol = solve_projected(dec.h_square, lifted, t_end)
        except ValueError as exc:
            # Inputs were validated up front, so in-loop value errors mean
            # the iteration itself degenerated (non-finite data).
            raise BreakdownError(cycle, str(exc)) from exc

        correction = dec.basis @ psol.evaluate_many(times)
        if not np.isfinite(correction).all():
            raise BreakdownError(cycle, "correction evaluated to non-finite values")
        states += correction.T
        if keep_cycles:
            retained.append(SolveCycle(basis=dec.basis, projected=psol))

        if dec.invariant:
            history.append(CycleRecord(cycle, 0.0, width, fit_residual))
            converged = True
            break

        max_norm, _ = residual_norm_on_grid(dec, psol, grid)
        if not np.isfinite(max_norm):
            raise BreakdownError(cycle, "residual evaluated to non-finite values")
        max_rel = max_norm / denom
        history.append(CycleRecord(cycle, max_rel, width, fit_residual))
        if max_rel <= cfg.tol:
            converged = True
            break
        if cycle == cfg.max_restarts - 1:
            break

        # Restart: the residual modes are the trailing basis block and the
        # coefficient samples are refit on the same grid at the same degree.
        q_samples = np.vstack([residual_coeff(dec, psol, t) for t in grid.points])
        coeffs_next, _ = fit_values(q_samples, grid, cfg.degree)
        refit_gap = np.linalg.norm(q_samples - vander @ coeffs_next.T, axis=1)
        refit_residual = float(refit_gap.max())
        # Residual continuity across the restart: the next cycle's source
        # must equal this cycle's residual up to the recorded refit error.
        assert (
            np.linalg.norm(
                dec.blocks[-1] @ (coeffs_next @ vander.T - q_samples.T), axis=0
            )
            <= refit_residual + 1e-12
        ).all()
        if not np.isfinite(refit_residual):
            raise BreakdownError(cycle, "residual refit produced non-finite values")
        if refit_residual > 0.1 * cfg.tol * denom:
            warnings.warn(
                f"cycle {cycle}: residual refit error {refit_residual:.3e} exceeds "
                f"0.1 * tol * source scale ({0.1 * cfg.tol * denom:.3e}); it bounds "
                "the achievable accuracy (raise degree or samples)",
                AccuracyWarning,
                stacklevel=2,
            )
        modes = dec.blocks[-1]
        coeffs = coeffs_next
        fit_residual = refit_residual

    states += v[np.newaxis, :]
    return Solution(
        shift=v.copy(),
        times=times,
        states=states,
        residual_history=tuple(history),
        converged=converged,
        t_end=float(t_end),
        mode=cfg.mode,
        cycles=tuple(retained) if keep_cycles else None,
    )


def evaluate_solution(solution, t):
    """Evaluate an evaluator-mode :class:`Solution` at an arbitrary time."""
    if solution.mode != "evaluator":
        raise ValueError(
            "arbitrary-time evaluation requires a solution computed with "
            "mode='evaluator'"
        )
    t = float(t)
    if t < 0.0 or t > solution.t_end:
        raise ValueError(f"t={t} outside [0, {solution.t_end}]")
    y = solution.shift.copy()
    for cyc in solution.cycles:
        y += cyc.basis @ cyc.projected.evaluate(t)
    return y
