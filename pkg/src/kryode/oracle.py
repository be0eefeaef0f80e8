"""Independent reference solvers used for verification.

Deliberately boring: a fixed-step classical fourth-order Runge-Kutta
integrator for the full problem, and the closed-form solution of the
constant-source case through one augmented matrix exponential. Both exist to
cross-check the Krylov solver and each other; neither shares code with the
iteration it validates.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = ["OracleResult", "rk4_solve", "constant_source_exact"]


@dataclass(frozen=True)
class OracleResult:
    """Snapshots of a reference integration."""

    times: np.ndarray
    states: np.ndarray
    step_count: int
    method: str


def rk4_solve(op, v, g, t_end, steps, output_times):
    """Integrate ``y' = -A y + g(t)``, ``y(0) = v`` with classical RK4.

    The base step is ``t_end / steps``; each interval between consecutive
    output times is subdivided into equal steps no larger than the base step,
    so snapshots land on the requested times exactly. Global error is fourth
    order in the base step.

    Raises a ``FloatingPointError`` naming the step index if the state stops
    being finite (e.g. the step size violates the stability limit).
    """
    if not (np.isfinite(t_end) and t_end > 0):
        raise ValueError(f"t_end must be positive and finite, got {t_end}")
    output_times = np.asarray(output_times, dtype=np.float64)
    if output_times.ndim != 1 or output_times.size < 1:
        raise ValueError("output_times must be a non-empty 1-D array")
    if (np.diff(output_times) <= 0).any():
        raise ValueError("output_times must be strictly increasing")
    if output_times[0] < 0 or output_times[-1] > t_end:
        raise ValueError("output_times must lie within [0, t_end]")
    steps = int(steps)
    if steps < max(1, output_times.size - 1):
        raise ValueError(
            f"steps ({steps}) must be at least the output resolution "
            f"({max(1, output_times.size - 1)})"
        )
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (op.dimension,):
        raise ValueError(f"initial value must have shape ({op.dimension},)")

    base = t_end / steps
    y = v.copy()
    t_prev = 0.0
    taken = 0
    snapshots = np.empty((output_times.size, op.dimension))
    for row, t_out in enumerate(output_times):
        span = t_out - t_prev
        if span > 0.0:
            nsub = max(1, int(np.ceil(span / base - 1e-12)))
            h = span / nsub
            t = t_prev
            for _ in range(nsub):
                k1 = -op.apply(y) + g(t)
                k2 = -op.apply(y + 0.5 * h * k1) + g(t + 0.5 * h)
                k3 = -op.apply(y + 0.5 * h * k2) + g(t + 0.5 * h)
                k4 = -op.apply(y + h * k3) + g(t + h)
                y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
                t += h
                taken += 1
                if not np.isfinite(y).all():
                    raise FloatingPointError(
                        f"reference integration blew up at step {taken} (t~{t:.6g})"
                    )
            t_prev = t_out
        snapshots[row] = y
    return OracleResult(
        times=output_times.copy(),
        states=snapshots,
        step_count=taken,
        method="rk4",
    )


def constant_source_exact(H, b, v, t):
    """Exact solution of ``y' = -H y + b``, ``y(0) = v`` at time ``t``.

    Uses one augmented exponential of size d+1: the top-right column of
    ``exp([[-t H, t b], [0, 0]])`` equals ``t * phi_1(-t H) b``, which added
    to ``exp(-t H) v`` gives ``y(t)``.
    """
    H = kernels.as_matrix(H, "H")
    d = H.shape[0]
    if H.shape != (d, d):
        raise ValueError(f"H must be square, got shape {H.shape}")
    b = np.asarray(b, dtype=np.float64).reshape(d)
    v = np.asarray(v, dtype=np.float64).reshape(d)
    t = float(t)
    M = np.zeros((d + 1, d + 1))
    M[:d, :d] = -t * H
    M[:d, d] = t * b
    E = kernels.expm(M)
    return E[:d, :d] @ v + E[:d, d]
