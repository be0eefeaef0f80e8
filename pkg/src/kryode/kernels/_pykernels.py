"""NumPy implementations of the dense kernels.

This is the portable fallback lane. ``kryode.kernels._ckernels`` implements
the same three entry points in Cython; both lanes run identical algorithms so
that results agree to roundoff and benchmarks compare like with like. Input
validation and shared post-processing live in :mod:`kryode.kernels`, so the
functions here may assume well-formed float64 Fortran-ordered arrays.
"""

import numpy as np

# Coefficients of the degree-13 Pade approximant to exp(x).
_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)


def qr_mgs(M, rank_tol):
    """Thin QR of ``M`` by modified Gram-Schmidt with deflation.

    Each column is orthogonalized twice against the basis built so far; the
    second pass keeps the loss of orthogonality at machine level. Columns
    whose remainder falls at or below ``rank_tol * ||M||_F`` are dropped.

    Returns ``(Q, R, kept)`` with ``Q`` of shape (n, b'), ``R`` of shape
    (b', b) upper trapezoidal, and ``kept`` the list of surviving column
    indices of ``M``.
    """
    n, b = M.shape
    threshold = rank_tol * np.linalg.norm(M)
    Q = np.empty((n, b))
    R = np.zeros((b, b))
    kept = []
    cur = 0
    for j in range(b):
        w = np.array(M[:, j])
        for _ in range(2):
            for i in range(cur):
                h = Q[:, i] @ w
                w -= h * Q[:, i]
                R[i, j] += h
        nrm = np.linalg.norm(w)
        if nrm <= threshold:
            continue
        Q[:, cur] = w / nrm
        R[cur, j] = nrm
        kept.append(j)
        cur += 1
    return np.ascontiguousarray(Q[:, :cur]), np.ascontiguousarray(R[:cur, :]), kept


def jacobi_sweeps(A, V, tol=1e-14, max_sweeps=60):
    """Run one-sided Jacobi rotations on the columns of ``A`` in place.

    ``V`` (identity on entry) accumulates the right rotations, so that on
    exit ``A_in = A_out @ V.T`` with the columns of ``A_out`` mutually
    orthogonal: cosines between distinct columns are at most ``tol``.
    """
    n, p = A.shape
    if p < 2:
        return
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(p - 1):
            for j in range(i + 1, p):
                ai = A[:, i]
                aj = A[:, j]
                alpha = ai @ ai
                beta = aj @ aj
                gamma = ai @ aj
                if gamma == 0.0 or alpha == 0.0 or beta == 0.0:
                    continue
                rel = abs(gamma) / np.sqrt(alpha * beta)
                if rel > off:
                    off = rel
                if rel <= tol:
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0.0 else -1.0) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                new_i = c * ai - s * aj
                new_j = s * ai + c * aj
                A[:, i] = new_i
                A[:, j] = new_j
                vi = np.array(V[:, i])
                vj = np.array(V[:, j])
                V[:, i] = c * vi - s * vj
                V[:, j] = s * vi + c * vj
        if off <= tol:
            return
    raise RuntimeError(f"one-sided Jacobi sweep limit ({max_sweeps}) exceeded")


def expm_ss(M):
    """Matrix exponential by scaling and squaring with a Pade-13 kernel.

    The input is scaled so its 1-norm is at most 0.5 before the rational
    approximant is evaluated, trading a few extra squarings for headroom in
    the kernel accuracy.
    """
    d = M.shape[0]
    norm = np.linalg.norm(M, 1)
    squarings = 0
    if norm > 0.5:
        squarings = int(np.ceil(np.log2(norm / 0.5)))
    A = M / (2.0**squarings)
    b = _PADE13
    eye = np.eye(d)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (
        A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
        + b[7] * A6
        + b[5] * A4
        + b[3] * A2
        + b[1] * eye
    )
    V = (
        A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
        + b[6] * A6
        + b[4] * A4
        + b[2] * A2
        + b[0] * eye
    )
    # (V - U)^-1 (V + U) = I + (V - U)^-1 (2 U): solving for the deviation
    # from the identity keeps exp(0) = I exact.
    R = eye + np.linalg.solve(V - U, 2.0 * U)
    for _ in range(squarings):
        R = R @ R
    return R
