"""Dense linear-algebra kernels: thin QR with deflation, thin SVD, expm.

Two interchangeable lanes implement the hot loops:

* ``_ckernels`` -- Cython, compiled at install time when a C toolchain is
  available;
* ``_pykernels`` -- pure NumPy, always available.

The compiled lane is preferred when present. Set the environment variable
``KRYODE_KERNEL_BACKEND`` to ``python`` or ``compiled`` to pin the choice at
import time, or call :func:`use_backend` at runtime. Input validation and the
SVD post-processing (snapping, sorting, basis completion) are shared here so
both lanes satisfy identical contracts.

Conventions: public entry points accept any real array-like; arrays are
converted to ``float64`` (kernels work on column-major copies internally) and
results are returned C-contiguous. Constructors and entry points reject
non-finite input.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_env = os.environ.get("KRYODE_KERNEL_BACKEND", "").strip().lower()
if _env:
    if _env not in _BACKENDS:
        raise ImportError(
            f"KRYODE_KERNEL_BACKEND={_env!r} is not available; "
            f"choices: {sorted(_BACKENDS)}"
        )
    _active_name = _env
else:
    _active_name = "compiled" if _ckernels is not None else "python"
_impl = _BACKENDS[_active_name]

_EPS = np.finfo(np.float64).eps


def available_backends():
    """Names of the kernel lanes importable in this environment."""
    return sorted(_BACKENDS)


def active_backend():
    """Name of the lane currently answering kernel calls."""
    return _active_name


def use_backend(name):
    """Switch the kernel lane at runtime ("python" or "compiled")."""
    global _impl, _active_name
    if name not in _BACKENDS:
        raise ValueError(f"unknown kernel backend {name!r}; choices: {sorted(_BACKENDS)}")
    _active_name = name
    _impl = _BACKENDS[name]


def as_matrix(arr, name="matrix"):
    """Validate and convert ``arr`` to a finite float64 2-D array."""
    M = np.asarray(arr, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={M.ndim}")
    if not np.isfinite(M).all():
        raise ValueError(f"{name} contains non-finite entries")
    return M


@dataclass(frozen=True)
class ThinSvd:
    """Thin singular value decomposition ``M = U @ diag(sigma) @ V.T``.

    For an (n, p) input, ``U`` is (n, q) and ``V`` is (p, q) with
    ``q = min(n, p)``, both column-orthonormal; ``sigma`` is non-increasing
    and non-negative, with exact zeros at the tail when the numerical rank is
    below ``q``.
    """

    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray


def qr_thin(M, rank_tol):
    """Thin QR factorization with rank detection.

    Parameters
    ----------
    M : (n, b) array_like, b <= n
        Matrix whose columns are to be orthonormalized.
    rank_tol : float
        Non-negative deflation threshold: a column is dropped when its
        remainder after orthogonalization is at most
        ``rank_tol * ||M||_F``.

    Returns
    -------
    Q : (n, b') ndarray
        Column-orthonormal basis, ``b' <= b``.
    R : (b', b) ndarray
        Upper trapezoidal coefficients with ``M[:, kept] ~= Q @ R[:, kept]``.
    kept : list of int
        Indices of the columns of ``M`` that produced a basis vector.
    """
    M = as_matrix(M, "M")
    n, b = M.shape
    if n == 0 or b == 0:
        raise ValueError("qr_thin requires a non-empty matrix")
    if b > n:
        raise ValueError(f"qr_thin requires b <= n, got shape {M.shape}")
    if not rank_tol >= 0.0:
        raise ValueError(f"rank_tol must be non-negative, got {rank_tol}")
    # Lanes may work in place; never hand them a view of caller data.
    Q, R, kept = _impl.qr_mgs(np.array(M, order="F", copy=True), float(rank_tol))
    return Q, R, list(kept)


def thin_svd(M):
    """Thin SVD of a real matrix.

    Computed by one-sided Jacobi rotations. When the input has more columns
    than rows it is transposed internally and the factors are swapped, so the
    returned shapes always follow ``q = min(n, p)``. Singular values at
    roundoff level (relative to the largest) are snapped to exact zeros and
    the corresponding columns of ``U`` are completed to an orthonormal set.
    """
    M = as_matrix(M, "M")
    n, p = M.shape
    if n == 0 or p == 0:
        raise ValueError("thin_svd requires a non-empty matrix")
    if p > n:
        flipped = thin_svd(M.T)
        return ThinSvd(U=flipped.V, sigma=flipped.sigma, V=flipped.U)

    A = np.array(M, order="F", copy=True)
    V = np.asfortranarray(np.eye(p))
    _impl.jacobi_sweeps(A, V)

    sigma = np.linalg.norm(A, axis=0)
    smax = sigma.max(initial=0.0)
    # Snap values indistinguishable from zero at working precision so exact
    # rank deficiency in the input yields exact zeros in the spectrum.
    snap = max(n, p) * _EPS * smax
    sigma = np.where(sigma <= snap, 0.0, sigma)

    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    A = A[:, order]
    V = V[:, order]

    U = np.empty((n, p))
    for j in range(p):
        if sigma[j] > 0.0:
            U[:, j] = A[:, j] / sigma[j]
        else:
            U[:, j] = _complete_column(U[:, :j])
    return ThinSvd(
        U=np.ascontiguousarray(U),
        sigma=np.ascontiguousarray(sigma),
        V=np.ascontiguousarray(V),
    )


def _complete_column(B):
    """Unit vector orthogonal to the orthonormal columns of ``B``."""
    n = B.shape[0]
    # The coordinate direction least represented in B has the largest
    # projection residual; 1 - ||row||^2 measures exactly that.
    idx = int(np.argmin(np.einsum("ij,ij->i", B, B))) if B.size else 0
    w = np.zeros(n)
    w[idx] = 1.0
    for _ in range(2):
        w -= B @ (B.T @ w)
    nrm = np.linalg.norm(w)
    if nrm == 0.0:
        raise RuntimeError("failed to complete an orthonormal basis")
    return w / nrm


def expm(M):
    """Matrix exponential of a small dense square matrix.

    Scaling and squaring with a degree-13 Pade kernel; the scaling exponent
    is chosen so the scaled 1-norm is at most 0.5.
    """
    M = as_matrix(M, "M")
    d, d2 = M.shape
    if d == 0:
        raise ValueError("expm requires a non-empty matrix")
    if d != d2:
        raise ValueError(f"expm requires a square matrix, got shape {M.shape}")
    return np.ascontiguousarray(_impl.expm_ss(np.array(M, order="F", copy=True)))
