"""Low-rank polynomial model of a time-dependent source term.

Stage one of the solver: sample ``g(t)`` on a Chebyshev grid, compute a thin
SVD of the sample matrix, keep the leading modes, and fit one polynomial per
mode, yielding the separable approximation ``g(t) ~= U @ p(t)`` together with
an error report covering the discarded spectrum and the fit residuals.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_triangular

from . import kernels

# Monomial fits in tau = t / t_end degrade past this degree; refuse rather
# than return garbage coefficients.
MAX_DEGREE = 20

__all__ = [
    "MAX_DEGREE",
    "TimeGrid",
    "SourceTerm",
    "FitReport",
    "PolySource",
    "chebyshev_grid",
    "sample_source",
    "truncate_rank",
    "TruncatedSvd",
    "fit_mode_polynomials",
    "fit_values",
    "build_poly_source",
    "evaluate_poly_source",
]


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing sample times starting at 0."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a time grid needs at least two points")
        if not np.isfinite(pts).all():
            raise ValueError("time grid contains non-finite points")
        if pts[0] != 0.0:
            raise ValueError("time grid must start at t = 0")
        if not (np.diff(pts) > 0).all():
            raise ValueError("time grid points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def t_end(self):
        return float(self.points[-1])

    @property
    def size(self):
        return self.points.size


def chebyshev_grid(s, t_end):
    """Chebyshev-Lobatto nodes mapped to ``[0, t_end]``.

    Node ``i`` (0-based) sits at ``t_end * sin(pi * i / (2 (s-1)))**2``,
    which equals ``t_end/2 * (1 - cos(pi * i / (s-1)))`` with better relative
    accuracy near 0. Endpoints are pinned exactly.
    """
    s = int(s)
    if s < 2:
        raise ValueError(f"need at least 2 sample points, got {s}")
    if not (np.isfinite(t_end) and t_end > 0):
        raise ValueError(f"t_end must be positive and finite, got {t_end}")
    i = np.arange(s, dtype=np.float64)
    pts = t_end * np.sin(np.pi * i / (2.0 * (s - 1))) ** 2
    pts[0] = 0.0
    pts[-1] = t_end
    return TimeGrid(pts)


class SourceTerm:
    """Vector-valued source ``g : [0, T] -> R^n``.

    Wraps either an analytic rule or an interpolated table behind a common
    call interface. Instances are immutable and safe to share.
    """

    def __init__(self, dimension, fn, kind="callable"):
        dimension = int(dimension)
        if dimension < 1:
            raise ValueError(f"source dimension must be positive, got {dimension}")
        self._n = dimension
        self._fn = fn
        self.kind = kind

    @property
    def dimension(self):
        return self._n

    def __call__(self, t):
        value = np.asarray(self._fn(float(t)), dtype=np.float64)
        if value.shape != (self._n,):
            raise ValueError(
                f"source evaluator returned shape {value.shape}, expected ({self._n},)"
            )
        return value

    def __repr__(self):
        return f"SourceTerm(dimension={self._n}, kind={self.kind!r})"

    @classmethod
    def constant(cls, value):
        """g(t) = value."""
        c = np.asarray(value, dtype=np.float64).reshape(-1).copy()
        return cls(c.size, lambda t: c, kind="constant")

    @classmethod
    def sine(cls, amplitude, omega):
        """g(t) = sin(omega * t) * amplitude."""
        a = np.asarray(amplitude, dtype=np.float64).reshape(-1).copy()
        omega = float(omega)
        return cls(a.size, lambda t: math.sin(omega * t) * a, kind="sine")

    @classmethod
    def polynomial(cls, coefficients):
        """g(t) = sum_j coefficients[j] * t**j, one vector per power of t."""
        C = np.asarray(coefficients, dtype=np.float64)
        if C.ndim != 2 or C.shape[0] < 1:
            raise ValueError("polynomial coefficients must be a (degree+1, n) array")
        C = C.copy()

        def evaluate(t):
            acc = C[-1].copy()
            for row in C[-2::-1]:
                acc = acc * t + row
            return acc

        return cls(C.shape[1], evaluate, kind="polynomial")

    @classmethod
    def from_callable(cls, dimension, fn):
        return cls(dimension, fn, kind="callable")

    @classmethod
    def from_table(cls, times, values):
        """Piecewise-cubic interpolant of tabulated samples.

        Natural end conditions; evaluation is exact (bit for bit) at the
        tabulated times and refuses to extrapolate outside their range.
        """
        times = np.asarray(times, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if times.ndim != 1 or times.size < 2:
            raise ValueError("a table source needs at least two rows")
        if not (np.diff(times) > 0).all():
            raise ValueError("table times must be strictly increasing")
        if values.ndim != 2 or values.shape[0] != times.size:
            raise ValueError("table values must be a (len(times), n) array")
        if not (np.isfinite(times).all() and np.isfinite(values).all()):
            raise ValueError("table contains non-finite entries")
        values = values.copy()
        spline = CubicSpline(times, values, bc_type="natural")
        t_lo, t_hi = times[0], times[-1]

        def evaluate(t):
            if t < t_lo or t > t_hi:
                raise ValueError(
                    f"t={t} outside the tabulated range [{t_lo}, {t_hi}]"
                )
            idx = np.searchsorted(times, t)
            if idx < times.size and times[idx] == t:
                return values[idx]
            return spline(t)

        return cls(values.shape[1], evaluate, kind="table")


def sample_source(g, grid):
    """Sample ``g`` on a grid, one column per grid point."""
    pts = np.asarray(getattr(grid, "points", grid), dtype=np.float64)
    if pts.size == 0:
        raise ValueError("cannot sample on an empty grid")
    G = np.empty((g.dimension, pts.size))
    for i, t in enumerate(pts):
        col = g(t)
        if not np.isfinite(col).all():
            raise ValueError(f"source evaluated to non-finite values at t={t}")
        G[:, i] = col
    return G


@dataclass(frozen=True)
class TruncatedSvd:
    """Leading part of a thin SVD plus the norms of what was dropped."""

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    tail_2norm: float
    tail_fro: float


def truncate_rank(svd, m=None, tol=None):
    """Keep the ``m`` leading singular triplets of a thin SVD.

    Exactly one of ``m`` (explicit count) and ``tol`` (relative threshold on
    the spectrum: keep up to the first value at or below ``tol * sigma[0]``)
    must be given. The returned tail norms are the exact truncation errors:
    ``tail_2norm`` is the first discarded singular value (0 when nothing is
    discarded) and ``tail_fro`` the root sum of squares of all discarded
    ones.
    """
    sigma_full = np.asarray(svd.sigma, dtype=np.float64)
    q = sigma_full.size
    if (m is None) == (tol is None):
        raise ValueError("give exactly one of m= and tol=")
    if m is None:
        if not tol >= 0.0:
            raise ValueError(f"tol must be non-negative, got {tol}")
        cutoff = tol * sigma_full[0] if q else 0.0
        m = q
        for mm in range(1, q):
            if sigma_full[mm] <= cutoff:
                m = mm
                break
    m = int(m)
    if not 1 <= m <= q:
        raise ValueError(f"rank must satisfy 1 <= m <= {q}, got {m}")
    tail = sigma_full[m:]
    return TruncatedSvd(
        U=svd.U[:, :m].copy(),
        sigma=sigma_full[:m].copy(),
        V=svd.V[:, :m].copy(),
        tail_2norm=float(sigma_full[m]) if m < q else 0.0,
        tail_fro=float(np.sqrt(np.sum(tail**2))),
    )


def fit_values(values, grid, degree):
    """Least-squares polynomial fit of per-mode samples.

    Fits, for each column ``j`` of ``values`` (shape (s, m)), a degree-
    ``degree`` polynomial in the scaled time ``tau = t / t_end`` minimizing
    the sum of squares over the grid. The fit goes through a thin QR of the
    Vandermonde matrix; coefficients come back in the monomial basis.

    Returns ``(C, per_mode)`` where ``C`` has shape (m, degree+1), row ``j``
    holding the coefficients of mode ``j`` ordered by increasing power, and
    ``per_mode[j]`` is the attained residual norm for mode ``j``.
    """
    pts = np.asarray(getattr(grid, "points", grid), dtype=np.float64)
    t_end = pts[-1]
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != pts.size:
        raise ValueError(
            f"values must have one row per grid point, got {values.shape} "
            f"for {pts.size} points"
        )
    degree = int(degree)
    if degree < 0:
        raise ValueError(f"degree must be non-negative, got {degree}")
    if degree > MAX_DEGREE:
        raise ValueError(f"degree {degree} exceeds the supported maximum {MAX_DEGREE}")
    if degree + 1 > pts.size:
        raise ValueError(
            f"degree {degree} needs at least {degree + 1} sample points, "
            f"got {pts.size} (underdetermined fit)"
        )
    W = np.vander(pts / t_end, degree + 1, increasing=True)
    Q, R, kept = kernels.qr_thin(W, 0.0)
    if len(kept) != degree + 1:
        raise RuntimeError("Vandermonde matrix lost rank during the fit")
    C = solve_triangular(R, Q.T @ values)
    per_mode = np.linalg.norm(values - W @ C, axis=0)
    return np.ascontiguousarray(C.T), per_mode


def fit_mode_polynomials(sigma, V, grid, degree):
    """Polynomial fit of the scaled right singular vectors.

    Mode ``j`` is the sampled function ``sigma[j] * V[:, j]``; see
    :func:`fit_values` for the return convention.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    V = np.asarray(V, dtype=np.float64)
    return fit_values(V * sigma[np.newaxis, :], grid, degree)


@dataclass(frozen=True)
class FitReport:
    """Error budget of a :class:`PolySource`.

    ``sigma_tail_2norm`` and ``sigma_tail_fro`` are the spectral and
    Frobenius norms of the discarded SVD tail; ``poly_fit_residual`` is the
    worst pointwise 2-norm gap between the source samples and the model on
    the sample grid.
    """

    sigma_tail_2norm: float
    sigma_tail_fro: float
    poly_fit_residual: float
    per_mode_fit_residual: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class PolySource:
    """Separable model ``g(t) ~= modes @ p(t)`` with polynomial ``p``.

    ``coeffs`` holds one row per mode: the monomial coefficients of ``p_j``
    in the scaled variable ``tau = t / t_end``, ordered by increasing power.
    ``modes`` has orthonormal columns.
    """

    modes: np.ndarray
    coeffs: np.ndarray
    t_end: float
    fit_report: FitReport

    @property
    def dimension(self):
        return self.modes.shape[0]

    @property
    def num_modes(self):
        return self.modes.shape[1]

    @property
    def degree(self):
        return self.coeffs.shape[1] - 1

    def poly_values(self, t):
        """p(t) by Horner's rule in tau = t / t_end."""
        if t < 0.0 or t > self.t_end:
            raise ValueError(f"t={t} outside [0, {self.t_end}]")
        tau = t / self.t_end
        acc = self.coeffs[:, -1].copy()
        for i in range(self.coeffs.shape[1] - 2, -1, -1):
            acc = acc * tau + self.coeffs[:, i]
        return acc

    def evaluate(self, t):
        """Model value ``modes @ p(t)``."""
        return self.modes @ self.poly_values(t)

    def as_source_term(self):
        """View the model as a plain :class:`SourceTerm`."""
        return SourceTerm(self.dimension, self.evaluate, kind="poly-model")


def evaluate_poly_source(ps, t):
    """Evaluate a :class:`PolySource` at time ``t``."""
    return ps.evaluate(t)


def poly_source_from_samples(G, grid, degree, rank_m=None, rank_tol=None):
    """Build a :class:`PolySource` from precomputed samples ``G`` (n, s)."""
    if rank_m is None and rank_tol is None:
        rank_tol = 1e-12
    svd = kernels.thin_svd(G)
    trunc = truncate_rank(svd, m=rank_m, tol=rank_tol)
    C, per_mode = fit_mode_polynomials(trunc.sigma, trunc.V, grid, degree)
    ps = PolySource(
        modes=trunc.U,
        coeffs=C,
        t_end=grid.t_end,
        fit_report=FitReport(
            sigma_tail_2norm=trunc.tail_2norm,
            sigma_tail_fro=trunc.tail_fro,
            poly_fit_residual=0.0,
            per_mode_fit_residual=per_mode,
        ),
    )
    # Report the gap to the actual samples, truncation tail included.
    model = np.column_stack([ps.evaluate(t) for t in grid.points])
    residual = float(np.linalg.norm(G - model, axis=0).max())
    return PolySource(
        modes=ps.modes,
        coeffs=ps.coeffs,
        t_end=ps.t_end,
        fit_report=FitReport(
            sigma_tail_2norm=trunc.tail_2norm,
            sigma_tail_fro=trunc.tail_fro,
            poly_fit_residual=residual,
            per_mode_fit_residual=per_mode,
        ),
    )


def build_poly_source(g, samples, degree, t_end, rank_m=None, rank_tol=None):
    """Sample ``g`` on a Chebyshev grid and build its low-rank polynomial model.

    Parameters
    ----------
    g : SourceTerm
    samples : int
        Number of grid points (at least ``degree + 1``).
    degree : int
        Shared polynomial degree for all modes.
    t_end : float
        End of the time interval.
    rank_m, rank_tol : optional
        Rank selection, as in :func:`truncate_rank`. When neither is given a
        relative spectrum tolerance of 1e-12 is used.
    """
    grid = chebyshev_grid(samples, t_end)
    G = sample_source(g, grid)
    return poly_source_from_samples(G, grid, degree, rank_m=rank_m, rank_tol=rank_tol)
