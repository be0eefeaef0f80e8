"""Independent brute-force oracles used by the test suite.

Everything here recomputes quantities by a different route than the library
under test: Jacobi eigensolve instead of the SVD kernel, power iteration for
2-norms, plain Taylor summation for the exponential, a textbook single-vector
Arnoldi loop, and extended-precision normal equations for polynomial fits.
"""

import mpmath
import numpy as np


def jacobi_eigh(S, tol=1e-14, max_sweeps=100):
    """Eigenvalues (descending) and eigenvectors of a symmetric matrix.

    Classical two-sided Jacobi rotations; fine for the small matrices used in
    tests.
    """
    A = np.array(S, dtype=float)
    n = A.shape[0]
    Q = np.eye(n)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off <= tol * max(1.0, np.abs(np.diag(A)).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if A[p, q] == 0.0:
                    continue
                theta = 0.5 * np.arctan2(2.0 * A[p, q], A[q, q] - A[p, p])
                c, s = np.cos(theta), np.sin(theta)
                J = np.eye(n)
                J[p, p] = c
                J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                A = J.T @ A @ J
                Q = Q @ J
    order = np.argsort(-np.diag(A))
    return np.diag(A)[order], Q[:, order]


def power_norm2(M, iters=20000, tol=1e-13, seed=0):
    """Spectral norm of ``M`` by power iteration on ``M.T @ M``."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(M.shape[1])
    x /= np.linalg.norm(x)
    sigma = 0.0
    stable = 0
    for _ in range(iters):
        y = M.T @ (M @ x)
        nrm = np.linalg.norm(y)
        if nrm == 0.0:
            return 0.0
        x = y / nrm
        new = np.sqrt(nrm)
        if abs(new - sigma) <= tol * max(new, 1e-300):
            stable += 1
            if stable >= 3:
                return new
        else:
            stable = 0
        sigma = new
    return sigma


def taylor_expm(M, terms=60):
    """exp(M) by scaling, truncated Taylor summation, and squaring."""
    M = np.asarray(M, dtype=float)
    norm = np.linalg.norm(M, 1)
    squarings = 0
    if norm > 0.5:
        squarings = int(np.ceil(np.log2(norm / 0.5)))
    A = M / 2.0**squarings
    E = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms + 1):
        term = term @ A / k
        E = E + term
    for _ in range(squarings):
        E = E @ E
    return E


def arnoldi_single(A, v, k):
    """Textbook single-vector Arnoldi: returns V (n, k+1) and H (k+1, k)."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    V = np.zeros((n, k + 1))
    H = np.zeros((k + 1, k))
    V[:, 0] = v / np.linalg.norm(v)
    for j in range(k):
        w = A @ V[:, j]
        for i in range(j + 1):
            H[i, j] = V[:, i] @ w
            w = w - H[i, j] * V[:, i]
        for i in range(j + 1):  # reorthogonalize
            c = V[:, i] @ w
            H[i, j] += c
            w = w - c * V[:, i]
        H[j + 1, j] = np.linalg.norm(w)
        if H[j + 1, j] == 0.0:
            return V[:, : j + 1], H[: j + 1, : j + 1]
        V[:, j + 1] = w / H[j + 1, j]
    return V, H


def krylov_block_projector(A, U, k):
    """Orthogonal projector onto span{U, AU, ..., A^(k-1) U} via LAPACK QR."""
    A = np.asarray(A, dtype=float)
    blocks = [np.asarray(U, dtype=float)]
    for _ in range(k - 1):
        blocks.append(A @ blocks[-1])
    Q, R = np.linalg.qr(np.hstack(blocks))
    keep = np.abs(np.diag(R)) > 1e-10 * max(1.0, np.abs(np.diag(R)).max())
    Q = Q[:, keep]
    return Q @ Q.T


def polyfit_mp(taus, data, degree, dps=50):
    """Least-squares polynomial fit by normal equations in 50-digit arithmetic.

    Returns the coefficient vector (increasing powers) and the residual norm,
    both as floats.
    """
    with mpmath.workdps(dps):
        s = len(taus)
        W = mpmath.matrix(s, degree + 1)
        for i in range(s):
            for j in range(degree + 1):
                W[i, j] = mpmath.mpf(taus[i]) ** j
        y = mpmath.matrix([mpmath.mpf(v) for v in data])
        G = W.T * W
        rhs = W.T * y
        c = mpmath.lu_solve(G, rhs)
        resid = W * c - y
        norm = mpmath.sqrt(sum(r**2 for r in resid))
        return np.array([float(ci) for ci in c]), float(norm)


def laplacian_1d(n, scale=1.0):
    """Dense 1D Laplacian stencil (-1, 2, -1) times ``scale``."""
    A = 2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    return scale * A


def phi_scalar(k, z, terms=80):
    """phi_k(z) = sum_{i>=0} z^i / (i+k)! by direct series summation."""
    with mpmath.workdps(60):
        acc = mpmath.mpf(0)
        for i in range(terms):
            acc += mpmath.mpf(z) ** i / mpmath.factorial(i + k)
        return float(acc)
