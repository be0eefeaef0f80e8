"""Linear operator abstraction used throughout the solver.

Wraps dense arrays, sparse matrices, or matrix-free callables behind a single
``apply`` method that accepts vectors and blocks, so the Krylov machinery
never needs to know how the matrix is stored.
"""

import numpy as np
import scipy.sparse as sp


class Operator:
    """Real linear map ``x -> A @ x`` on R^n."""

    def __init__(self, dimension, apply_fn, symmetric=False, label="operator"):
        dimension = int(dimension)
        if dimension < 1:
            raise ValueError(f"operator dimension must be positive, got {dimension}")
        self._n = dimension
        self._apply = apply_fn
        self.symmetric = bool(symmetric)
        self.label = label

    @property
    def dimension(self):
        return self._n

    def apply(self, x):
        """Apply to a vector (n,) or block (n, b)."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim not in (1, 2) or x.shape[0] != self._n:
            raise ValueError(
                f"operand shape {x.shape} incompatible with operator dimension {self._n}"
            )
        y = np.asarray(self._apply(x), dtype=np.float64)
        if y.shape != x.shape:
            raise ValueError(
                f"operator returned shape {y.shape} for operand shape {x.shape}"
            )
        return y

    def __repr__(self):
        return f"Operator(dimension={self._n}, symmetric={self.symmetric}, label={self.label!r})"

    @classmethod
    def from_dense(cls, A, symmetric=None):
        A = np.asarray(A, dtype=np.float64)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"dense operator must be square, got shape {A.shape}")
        if not np.isfinite(A).all():
            raise ValueError("dense operator contains non-finite entries")
        A = A.copy()
        if symmetric is None:
            symmetric = bool(np.array_equal(A, A.T))
        return cls(A.shape[0], lambda x: A @ x, symmetric=symmetric, label="dense")

    @classmethod
    def from_sparse(cls, A, symmetric=None):
        A = sp.csr_matrix(A)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"sparse operator must be square, got shape {A.shape}")
        if not np.isfinite(A.data).all():
            raise ValueError("sparse operator contains non-finite entries")
        if symmetric is None:
            symmetric = (A - A.T).nnz == 0
        return cls(A.shape[0], lambda x: A @ x, symmetric=symmetric, label="sparse")

    @classmethod
    def from_callable(cls, dimension, fn, symmetric=False, label="callable"):
        return cls(dimension, fn, symmetric=symmetric, label=label)
