"""Block Arnoldi process with deflation.

Builds an orthonormal basis of the block Krylov subspace
``span{U, A U, ..., A^(k-1) U}`` one block at a time, producing blocks
``V_1 = U, V_2, ..., V_{k+1}`` and a block upper Hessenberg matrix ``H``
satisfying ``A @ V[k] = V[k+1] @ H`` where ``V[j]`` stacks the first ``j``
blocks. Columns that become numerically dependent during orthogonalization
are deflated, so later blocks may be narrower than the first; if a whole new
block deflates, the basis spans an invariant subspace and the decomposition
is exact.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels

__all__ = ["BlockArnoldiDecomposition", "block_arnoldi"]


@dataclass(frozen=True)
class BlockArnoldiDecomposition:
    """Result of :func:`block_arnoldi`.

    ``blocks`` holds the orthonormal basis blocks. In the regular case there
    are ``steps + 1`` of them and ``H`` has shape ``(d + w, d)`` where ``d``
    is the total width of the first ``steps`` blocks and ``w`` the width of
    the last. When ``invariant`` is true the subspace closed under the
    operator after ``steps`` blocks: there are exactly ``steps`` blocks, ``H``
    is square of size ``d`` and the relation ``A @ basis == basis @ H`` holds
    to roundoff.
    """

    blocks: tuple
    H: np.ndarray
    block_widths: tuple
    steps: int
    invariant: bool

    @property
    def dim(self):
        """Total column count of the first ``steps`` blocks."""
        return int(sum(self.block_widths[: self.steps]))

    @property
    def basis(self):
        """Stacked basis of the Krylov subspace (n, dim)."""
        return np.hstack(self.blocks[: self.steps])

    @property
    def basis_ext(self):
        """All generated blocks stacked, including the trailing one."""
        return np.hstack(self.blocks)

    @property
    def h_square(self):
        """Projection of the operator onto the subspace (dim, dim)."""
        d = self.dim
        return self.H[:d, :d]

    @property
    def h_tail(self):
        """Coupling block to the trailing basis block, or None if invariant."""
        if self.invariant:
            return None
        d = self.dim
        return self.H[d:, d - self.block_widths[self.steps - 1] :]

    def validate(self, op):
        """Recompute the defining relations; returns a diagnostics dict."""
        Vext = self.basis_ext
        gram = Vext.T @ Vext - np.eye(Vext.shape[1])
        Vk = self.basis
        residual = op.apply(Vk) - Vext @ self.H
        scale = max(
            np.linalg.norm(op.apply(B)) / max(np.linalg.norm(B), 1e-300)
            for B in self.blocks
        )
        return {
            "orthonormality": float(np.linalg.norm(gram)),
            "residual": float(np.linalg.norm(residual)),
            "operator_scale": float(scale),
        }


def block_arnoldi(op, U, steps, deflation_tol=1e-10):
    """Run ``steps`` block Arnoldi steps starting from the orthonormal block ``U``.

    Each new block is orthogonalized against all previous ones by block
    modified Gram-Schmidt with one full reorthogonalization pass, then
    factored by a thin QR that drops columns whose remainder falls below
    ``deflation_tol`` times the Frobenius norm of the block before
    orthogonalization.

    Parameters
    ----------
    op : Operator
    U : (n, m) array_like
        Starting block with orthonormal columns (checked to 1e-10).
    steps : int
        Number of block steps ``k``; ``k * m`` must not exceed ``n``.
    deflation_tol : float
        Relative threshold for dropping dependent directions.
    """
    U = np.asarray(U, dtype=np.float64)
    if U.ndim != 2 or U.shape[1] < 1:
        raise ValueError(f"starting block must be a 2-D matrix, got shape {U.shape}")
    n, m = U.shape
    if not np.isfinite(U).all():
        raise ValueError("starting block contains non-finite entries")
    ortho_defect = np.linalg.norm(U.T @ U - np.eye(m))
    if ortho_defect > 1e-10:
        raise ValueError(
            f"starting block is not orthonormal (defect {ortho_defect:.2e})"
        )
    steps = int(steps)
    if steps < 1:
        raise ValueError(f"need at least one block step, got {steps}")
    if steps * m > n:
        raise ValueError(
            f"requested subspace dimension {steps}*{m} exceeds operator dimension {n}"
        )
    if not deflation_tol >= 0.0:
        raise ValueError(f"deflation_tol must be non-negative, got {deflation_tol}")

    blocks = [U.copy()]
    widths = [m]
    h_blocks = {}
    invariant = False
    completed = steps

    for i in range(steps):
        W = op.apply(blocks[i])
        if not np.isfinite(W).all():
            raise ValueError(f"operator produced non-finite entries at block step {i}")
        pre_norm = np.linalg.norm(W)
        for _ in range(2):
            for j in range(i + 1):
                coeff = blocks[j].T @ W
                W = W - blocks[j] @ coeff
                if (j, i) in h_blocks:
                    h_blocks[(j, i)] += coeff
                else:
                    h_blocks[(j, i)] = coeff
        post_norm = np.linalg.norm(W)
        if post_norm == 0.0 or pre_norm == 0.0:
            invariant = True
            completed = i + 1
            break
        # qr_thin thresholds against its own input; rescale so columns are
        # dropped relative to the block norm before orthogonalization.
        Q, R, kept = kernels.qr_thin(W, deflation_tol * pre_norm / post_norm)
        if not kept:
            invariant = True
            completed = i + 1
            break
        h_blocks[(i + 1, i)] = R
        blocks.append(Q)
        widths.append(Q.shape[1])

    offsets = np.concatenate(([0], np.cumsum(widths)))
    n_rows = offsets[len(blocks)]
    n_cols = offsets[completed]
    H = np.zeros((n_rows, n_cols))
    for (j, i), val in h_blocks.items():
        if i < completed:
            H[offsets[j] : offsets[j] + val.shape[0], offsets[i] : offsets[i] + val.shape[1]] = val

    return BlockArnoldiDecomposition(
        blocks=tuple(blocks),
        H=H,
        block_widths=tuple(widths),
        steps=completed,
        invariant=invariant,
    )
