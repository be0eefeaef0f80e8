# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the dense kernels (compiled lane).

Algorithms mirror ``_pykernels`` exactly; the win is removing the Python
dispatch per column and per rotation from the inner loops. BLAS/LAPACK
primitives come from SciPy's Cython bindings, so no extra link-time
dependencies are introduced.
"""

from libc.math cimport ceil, fabs, hypot, log2, sqrt

import numpy as np

from scipy.linalg.cython_blas cimport ddot, dgemm, dnrm2, drot
from scipy.linalg.cython_lapack cimport dgesv

# Coefficients of the degree-13 Pade approximant to exp(x).
cdef double[14] _PADE13
_PADE13[0] = 64764752532480000.0
_PADE13[1] = 32382376266240000.0
_PADE13[2] = 7771770303897600.0
_PADE13[3] = 1187353796428800.0
_PADE13[4] = 129060195264000.0
_PADE13[5] = 10559470521600.0
_PADE13[6] = 670442572800.0
_PADE13[7] = 33522128640.0
_PADE13[8] = 1323241920.0
_PADE13[9] = 40840800.0
_PADE13[10] = 960960.0
_PADE13[11] = 16380.0
_PADE13[12] = 182.0
_PADE13[13] = 1.0


def qr_mgs(double[::1, :] M, double rank_tol):
    """Thin QR by modified Gram-Schmidt with reorthogonalization and deflation.

    See ``_pykernels.qr_mgs`` for the contract.
    """
    cdef int n = M.shape[0]
    cdef int b = M.shape[1]
    cdef int one = 1
    cdef int i, j, p, cur
    cdef double h, nrm, fro, threshold

    fro = 0.0
    for j in range(b):
        for i in range(n):
            fro += M[i, j] * M[i, j]
    threshold = rank_tol * sqrt(fro)

    Q_arr = np.zeros((n, b), order="F")
    R_arr = np.zeros((b, b), order="F")
    w_arr = np.empty(n)
    cdef double[::1, :] Q = Q_arr
    cdef double[::1, :] R = R_arr
    cdef double[::1] w = w_arr
    kept = []

    cur = 0
    for j in range(b):
        for i in range(n):
            w[i] = M[i, j]
        for p in range(2):
            for i in range(cur):
                h = ddot(&n, &Q[0, i], &one, &w[0], &one)
                # w -= h * Q[:, i]
                _axpy(n, -h, &Q[0, i], &w[0])
                R[i, j] += h
        nrm = dnrm2(&n, &w[0], &one)
        if nrm <= threshold:
            continue
        for i in range(n):
            Q[i, cur] = w[i] / nrm
        R[cur, j] = nrm
        kept.append(j)
        cur += 1
    return (
        np.ascontiguousarray(Q_arr[:, :cur]),
        np.ascontiguousarray(R_arr[:cur, :]),
        kept,
    )


cdef inline void _axpy(int n, double a, double* x, double* y) noexcept nogil:
    cdef int i
    for i in range(n):
        y[i] += a * x[i]


def jacobi_sweeps(double[::1, :] A, double[::1, :] V, double tol=1e-14, int max_sweeps=60):
    """One-sided Jacobi rotations on the columns of ``A``, in place.

    ``V`` accumulates the right rotations. See ``_pykernels.jacobi_sweeps``.
    """
    cdef int n = A.shape[0]
    cdef int p = A.shape[1]
    cdef int one = 1
    cdef int i, j, sweep
    cdef double alpha, beta, gamma, rel, zeta, t, c, s, neg_s, off

    if p < 2:
        return
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(p - 1):
            for j in range(i + 1, p):
                alpha = ddot(&n, &A[0, i], &one, &A[0, i], &one)
                beta = ddot(&n, &A[0, j], &one, &A[0, j], &one)
                gamma = ddot(&n, &A[0, i], &one, &A[0, j], &one)
                if gamma == 0.0 or alpha == 0.0 or beta == 0.0:
                    continue
                rel = fabs(gamma) / sqrt(alpha * beta)
                if rel > off:
                    off = rel
                if rel <= tol:
                    continue
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0.0 else -1.0) / (fabs(zeta) + hypot(1.0, zeta))
                c = 1.0 / hypot(1.0, t)
                s = c * t
                # BLAS drot maps (x, y) to (c x + s y, c y - s x); negating s
                # yields the update (c x - s y, c y + s x) used here.
                neg_s = -s
                drot(&n, &A[0, i], &one, &A[0, j], &one, &c, &neg_s)
                drot(&p, &V[0, i], &one, &V[0, j], &one, &c, &neg_s)
        if off <= tol:
            return
    raise RuntimeError(f"one-sided Jacobi sweep limit ({max_sweeps}) exceeded")


cdef void _matmul(int d, double* a, double* b, double* c) noexcept nogil:
    """c = a @ b for column-major d x d buffers."""
    cdef double alpha = 1.0
    cdef double beta = 0.0
    cdef char no = b'N'
    dgemm(&no, &no, &d, &d, &d, &alpha, a, &d, b, &d, &beta, c, &d)


def expm_ss(double[::1, :] M):
    """Scaling-and-squaring matrix exponential with a Pade-13 kernel.

    Scales so the 1-norm is at most 0.5, evaluates the approximant with five
    matrix products and one linear solve, then squares back.
    """
    cdef int d = M.shape[0]
    cdef int i, j, k, squarings
    cdef int info = 0
    cdef double norm1, colsum, scale
    cdef double* b = _PADE13

    norm1 = 0.0
    for j in range(d):
        colsum = 0.0
        for i in range(d):
            colsum += fabs(M[i, j])
        if colsum > norm1:
            norm1 = colsum
    squarings = 0
    if norm1 > 0.5:
        squarings = <int>ceil(log2(norm1 / 0.5))
    scale = 2.0 ** (-squarings)
    for j in range(d):
        for i in range(d):
            M[i, j] *= scale

    A2_arr = np.empty((d, d), order="F")
    A4_arr = np.empty((d, d), order="F")
    A6_arr = np.empty((d, d), order="F")
    Z_arr = np.empty((d, d), order="F")
    U_arr = np.empty((d, d), order="F")
    P_arr = np.empty((d, d), order="F")
    Q_arr = np.empty((d, d), order="F")
    ipiv_arr = np.empty(d, dtype=np.intc)
    cdef double[::1, :] A = M
    cdef double[::1, :] A2 = A2_arr
    cdef double[::1, :] A4 = A4_arr
    cdef double[::1, :] A6 = A6_arr
    cdef double[::1, :] Z = Z_arr
    cdef double[::1, :] U = U_arr
    cdef double[::1, :] P = P_arr
    cdef double[::1, :] Q = Q_arr
    cdef int[::1] ipiv = ipiv_arr

    _matmul(d, &A[0, 0], &A[0, 0], &A2[0, 0])
    _matmul(d, &A2[0, 0], &A2[0, 0], &A4[0, 0])
    _matmul(d, &A4[0, 0], &A2[0, 0], &A6[0, 0])

    # Odd part: U = A @ (A6 @ Z + W) with Z, W polynomial combinations.
    for j in range(d):
        for i in range(d):
            Z[i, j] = b[13] * A6[i, j] + b[11] * A4[i, j] + b[9] * A2[i, j]
    _matmul(d, &A6[0, 0], &Z[0, 0], &P[0, 0])
    for j in range(d):
        for i in range(d):
            P[i, j] += b[7] * A6[i, j] + b[5] * A4[i, j] + b[3] * A2[i, j]
        P[j, j] += b[1]
    _matmul(d, &A[0, 0], &P[0, 0], &U[0, 0])

    # Even part: V = A6 @ Z + W, assembled into Q.
    for j in range(d):
        for i in range(d):
            Z[i, j] = b[12] * A6[i, j] + b[10] * A4[i, j] + b[8] * A2[i, j]
    _matmul(d, &A6[0, 0], &Z[0, 0], &Q[0, 0])
    for j in range(d):
        for i in range(d):
            Q[i, j] += b[6] * A6[i, j] + b[4] * A4[i, j] + b[2] * A2[i, j]
        Q[j, j] += b[0]

    # (V - U)^-1 (V + U) = I + (V - U)^-1 (2 U): solving for the deviation
    # from the identity keeps exp(0) = I exact. P holds the right-hand side
    # 2 U, then the solution, then the approximant itself.
    for j in range(d):
        for i in range(d):
            P[i, j] = 2.0 * U[i, j]
            Q[i, j] = Q[i, j] - U[i, j]
    dgesv(&d, &d, &Q[0, 0], &d, &ipiv[0], &P[0, 0], &d, &info)
    if info != 0:
        raise RuntimeError(f"Pade denominator solve failed (dgesv info={info})")
    for j in range(d):
        P[j, j] += 1.0

    for k in range(squarings):
        _matmul(d, &P[0, 0], &P[0, 0], &Z[0, 0])
        P, Z = Z, P
        P_arr, Z_arr = Z_arr, P_arr
    return np.ascontiguousarray(P_arr)
