"""Exact solution of the projected initial-value problem.

After projection onto the Krylov subspace the correction problem reads

    u'(t) = -H u(t) + b(t),   u(0) = 0,

with ``b(t)`` polynomial in the scaled time ``tau = t / T``. Embedding the
monomials into a nilpotent block turns this into a single matrix exponential:
for ``A_hat = [[-T H, B], [0, N]]`` with ``N`` the upper shift and column
``i`` of ``B`` equal to ``j! T c_j`` (``j = r - i`` the monomial power,
``c_j`` the corresponding coefficient column), the solution is the first
``d`` entries of ``exp(tau * A_hat)`` applied to the last unit vector. This
is exact up to the accuracy of ``expm``, with no time-stepping error.

The same module evaluates the closed-form residual of the Krylov iteration,
``q(t) = -H_tail @ (trailing block of u(t))``, whose 2-norm equals the
residual norm of the full problem because the basis is orthonormal.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = [
    "ProjectedProblem",
    "ProjectedSolution",
    "solve_projected",
    "residual_coeff",
    "residual_norm_on_grid",
]


@dataclass(frozen=True)
class ProjectedProblem:
    """Data of the projected IVP: matrix, source coefficients, horizon.

    ``source_coeffs`` has shape (d, r+1); column ``j`` multiplies ``tau**j``.
    Only the rows of the first basis block are nonzero when the problem comes
    from the solver pipeline.
    """

    H: np.ndarray
    source_coeffs: np.ndarray
    t_end: float


class ProjectedSolution:
    """Evaluator for ``u(t)`` with per-time memoization.

    Evaluation is a pure function of ``t`` after construction; the memo cache
    is a plain dict, which is safe under CPython for single-writer use. Use
    distinct instances per thread if evaluating concurrently.
    """

    def __init__(self, problem):
        self.problem = problem
        d = problem.H.shape[0]
        r = problem.source_coeffs.shape[1] - 1
        T = problem.t_end
        ahat = np.zeros((d + r + 1, d + r + 1))
        ahat[:d, :d] = -T * problem.H
        for i in range(r + 1):
            power = r - i
            ahat[:d, d + i] = math.factorial(power) * T * problem.source_coeffs[:, power]
        for i in range(r):
            ahat[d + i, d + i + 1] = 1.0
        self._ahat = ahat
        self._d = d
        self._cache = {}

    @property
    def augmented_matrix(self):
        return self._ahat

    @property
    def dim(self):
        return self._d

    def evaluate(self, t):
        """u(t) for t in [0, t_end]."""
        t = float(t)
        T = self.problem.t_end
        if t < 0.0 or t > T:
            raise ValueError(f"t={t} outside [0, {T}]")
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        if t == 0.0:
            u = np.zeros(self._d)
        else:
            u = kernels.expm((t / T) * self._ahat)[: self._d, -1].copy()
        self._cache[t] = u
        return u

    def evaluate_many(self, times):
        """Stack ``u(t)`` for each requested time as columns (d, len(times))."""
        return np.column_stack([self.evaluate(t) for t in np.asarray(times, dtype=np.float64)])


def solve_projected(H, coeffs, t_end):
    """Solve ``u' = -H u + b(t)``, ``u(0) = 0`` for a polynomial source.

    Parameters
    ----------
    H : (d, d) array_like
    coeffs : (d, r+1) array_like
        Monomial coefficients of ``b`` in ``tau = t / t_end``, one column per
        power.
    t_end : float
    """
    H = kernels.as_matrix(H, "H")
    coeffs = kernels.as_matrix(coeffs, "coeffs")
    d, d2 = H.shape
    if d != d2:
        raise ValueError(f"H must be square, got shape {H.shape}")
    if coeffs.shape[0] != d:
        raise ValueError(
            f"coefficient rows ({coeffs.shape[0]}) must match the dimension of H ({d})"
        )
    if not (np.isfinite(t_end) and t_end > 0):
        raise ValueError(f"t_end must be positive and finite, got {t_end}")
    return ProjectedSolution(ProjectedProblem(H=H.copy(), source_coeffs=coeffs.copy(), t_end=float(t_end)))


def residual_coeff(dec, sol, t):
    """Residual coefficient ``q(t)`` of a Krylov correction.

    The residual of the correction ``basis @ u(t)`` equals
    ``trailing_block @ q(t)`` with ``q(t) = -H_tail @ (last-block rows of
    u(t))``; its 2-norm is ``||q(t)||`` by orthonormality. Identically zero
    when the decomposition closed on an invariant subspace.
    """
    if dec.invariant:
        return np.zeros(0)
    if sol.dim != dec.dim:
        raise ValueError(
            f"projected solution dimension {sol.dim} does not match "
            f"decomposition dimension {dec.dim}"
        )
    u = sol.evaluate(t)
    w = dec.block_widths[dec.steps - 1]
    return -(dec.h_tail @ u[dec.dim - w :])


def residual_norm_on_grid(dec, sol, grid):
    """Max and per-point residual norms over a grid of times.

    Returns ``(max_norm, per_point)``.
    """
    pts = np.asarray(getattr(grid, "points", grid), dtype=np.float64)
    per_point = np.array([np.linalg.norm(residual_coeff(dec, sol, t)) for t in pts])
    max_norm = float(per_point.max()) if per_point.size else 0.0
    return max_norm, per_point
