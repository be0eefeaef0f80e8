"""Command-line front end.

Reads the matrix (Matrix Market coordinate format), the source term (a small
spec grammar), and optionally the initial value from files, runs the solver,
and writes the solution snapshots and the residual history as CSV. Exit
status: 0 on convergence, 2 when the restart budget is exhausted, 1 on input
errors.

Source specification grammar::

    builtin:constant:<vecfile>          g(t) = c
    builtin:sin:<vecfile>:<omega>       g(t) = sin(omega t) * c
    builtin:poly:<coeff-table>          g(t) = sum_j row_j * t**j
    table:<csvfile>                     piecewise-cubic interpolation

Vector files hold one value per line. The poly coefficient table is a CSV
whose row ``j`` is the vector coefficient of ``t**j``. Table sources are CSV
rows ``t, g_1, ..., g_n`` with strictly increasing ``t`` (header optional).
"""

import argparse
import sys
import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .operators import Operator
from .solver import SolverConfig, solve
from .source import SourceTerm

__all__ = [
    "MatrixMarketParseError",
    "UnsupportedMatrixFormatError",
    "RunManifest",
    "parse_matrix_market",
    "load_vector",
    "parse_source_spec",
    "run_solve",
    "main",
]


class MatrixMarketParseError(ValueError):
    """Malformed Matrix Market content."""


class UnsupportedMatrixFormatError(ValueError):
    """Well-formed Matrix Market content this tool does not handle."""


def parse_matrix_market(path):
    """Parse a Matrix Market coordinate file into a sparse-backed Operator.

    Supports the ``real`` field with ``general`` or ``symmetric`` symmetry
    (symmetric storage is expanded); duplicate coordinate entries are summed.
    Parse errors carry the offending line number; ``complex``/``pattern``
    fields raise :class:`UnsupportedMatrixFormatError`.
    """
    rows, cols, vals = [], [], []
    n = None
    expected = None
    entry_lines = 0
    symmetric = False
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("%%MatrixMarket"):
            raise MatrixMarketParseError(f"{path}:1: missing %%MatrixMarket header")
        tokens = header.strip().lower().split()
        if len(tokens) != 5 or tokens[1] != "matrix":
            raise MatrixMarketParseError(
                f"{path}:1: header must read '%%MatrixMarket matrix <format> <field> <symmetry>'"
            )
        _, _, fmt, fieldname, symmetry = tokens
        if fmt != "coordinate":
            raise UnsupportedMatrixFormatError(
                f"{path}: only the coordinate format is supported, got {fmt!r}"
            )
        if fieldname != "real":
            raise UnsupportedMatrixFormatError(
                f"{path}: only the real field is supported, got {fieldname!r}"
            )
        if symmetry not in ("general", "symmetric"):
            raise UnsupportedMatrixFormatError(
                f"{path}: only general or symmetric symmetry is supported, got {symmetry!r}"
            )
        symmetric = symmetry == "symmetric"

        for lineno, raw in enumerate(fh, start=2):
            line = raw.strip()
            if not line or line.startswith("%"):
                continue
            parts = line.split()
            if n is None:
                if len(parts) != 3:
                    raise MatrixMarketParseError(
                        f"{path}:{lineno}: size line must hold 'rows cols nnz'"
                    )
                try:
                    nrows, ncols, expected = (int(p) for p in parts)
                except ValueError as exc:
                    raise MatrixMarketParseError(
                        f"{path}:{lineno}: malformed size line: {exc}"
                    ) from None
                if nrows != ncols:
                    raise MatrixMarketParseError(
                        f"{path}:{lineno}: operator matrix must be square, "
                        f"got {nrows}x{ncols}"
                    )
                n = nrows
                continue
            if len(parts) != 3:
                raise MatrixMarketParseError(
                    f"{path}:{lineno}: entry must hold 'i j value'"
                )
            try:
                i, j = int(parts[0]), int(parts[1])
                value = float(parts[2])
            except ValueError as exc:
                raise MatrixMarketParseError(
                    f"{path}:{lineno}: malformed entry: {exc}"
                ) from None
            if not (1 <= i <= n and 1 <= j <= n):
                raise MatrixMarketParseError(
                    f"{path}:{lineno}: index ({i}, {j}) outside 1..{n}"
                )
            if not np.isfinite(value):
                raise MatrixMarketParseError(
                    f"{path}:{lineno}: non-finite value {parts[2]}"
                )
            entry_lines += 1
            rows.append(i - 1)
            cols.append(j - 1)
            vals.append(value)
            if symmetric and i != j:
                rows.append(j - 1)
                cols.append(i - 1)
                vals.append(value)

    if n is None:
        raise MatrixMarketParseError(f"{path}: missing size line")
    if entry_lines != expected:
        raise MatrixMarketParseError(
            f"{path}: expected {expected} entries, found {entry_lines}"
        )
    matrix = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    return Operator.from_sparse(matrix, symmetric=symmetric or None)


def load_vector(path):
    """Load a vector from a text file with one value per line."""
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                values.append(float(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not a number: {line!r}") from None
    if not values:
        raise ValueError(f"{path}: empty vector file")
    return np.array(values)


def _load_csv_rows(path):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p for p in line.replace(",", " ").split() if p]
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                if lineno == 1:
                    continue  # optional header
                raise ValueError(f"{path}:{lineno}: malformed CSV row") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError(f"{path}: inconsistent column count")
    return np.array(rows)


def parse_source_spec(spec):
    """Build a :class:`SourceTerm` from a CLI source specification string."""
    head, _, rest = spec.partition(":")
    if head == "table":
        if not rest:
            raise ValueError(f"source spec {spec!r}: missing table path")
        data = _load_csv_rows(rest)
        if data.shape[1] < 2:
            raise ValueError(f"{rest}: table rows need 't, g_1, ..., g_n'")
        return SourceTerm.from_table(data[:, 0], data[:, 1:])
    if head != "builtin":
        raise ValueError(f"source spec {spec!r}: unknown kind {head!r}")
    name, _, args = rest.partition(":")
    if name == "constant":
        if not args:
            raise ValueError(f"source spec {spec!r}: missing vector file")
        return SourceTerm.constant(load_vector(args))
    if name == "sin":
        vecfile, _, omega = args.rpartition(":")
        if not vecfile or not omega:
            raise ValueError(f"source spec {spec!r}: expected builtin:sin:<vecfile>:<omega>")
        try:
            omega = float(omega)
        except ValueError:
            raise ValueError(f"source spec {spec!r}: omega must be a number") from None
        return SourceTerm.sine(load_vector(vecfile), omega)
    if name == "poly":
        if not args:
            raise ValueError(f"source spec {spec!r}: missing coefficient table")
        return SourceTerm.polynomial(_load_csv_rows(args))
    raise ValueError(f"source spec {spec!r}: unknown builtin {name!r}")


@dataclass
class RunManifest:
    """Everything one solver run needs, resolved from the command line."""

    matrix_path: str
    source_spec: str
    t_end: float
    v0_path: str | None = None
    solution_path: str = "solution.csv"
    residuals_path: str = "residuals.csv"
    config: SolverConfig = field(default_factory=SolverConfig)


def _write_solution_csv(path, solution):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t, row in zip(solution.times, solution.states):
            fh.write(",".join(f"{x:.16e}" for x in (t, *row)))
            fh.write("\n")


def _write_residuals_csv(path, solution):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in solution.residual_history:
            fh.write(
                f"{rec.cycle},{rec.max_rel_residual:.16e},{rec.rank},"
                f"{rec.fit_residual:.16e}\n"
            )


def run_solve(manifest):
    """Execute a manifest; returns the process exit status (0, 1, or 2)."""
    started = time.perf_counter()
    try:
        op = parse_matrix_market(manifest.matrix_path)
        g = parse_source_spec(manifest.source_spec)
        if manifest.v0_path is not None:
            v = load_vector(manifest.v0_path)
        else:
            v = np.zeros(op.dimension)
        if g.dimension != op.dimension:
            raise ValueError(
                f"source dimension {g.dimension} does not match matrix dimension "
                f"{op.dimension}"
            )
        if v.shape != (op.dimension,):
            raise ValueError(
                f"initial value length {v.size} does not match matrix dimension "
                f"{op.dimension}"
            )
        if not (np.isfinite(manifest.t_end) and manifest.t_end > 0):
            raise ValueError(f"--tmax must be positive, got {manifest.t_end}")
        manifest.config.validate()
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        solution = solve(op, v, g, manifest.t_end, manifest.config)
    except (ValueError, RuntimeError, FloatingPointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    _write_solution_csv(manifest.solution_path, solution)
    _write_residuals_csv(manifest.residuals_path, solution)
    elapsed = time.perf_counter() - started

    cfg = manifest.config
    initial_rank = solution.residual_history[0].rank
    print(
        f"n={op.dimension} s={cfg.samples} m={initial_rank} r={cfg.degree} "
        f"k={cfg.block_steps} cycles={len(solution.residual_history)} "
        f"converged={solution.converged} wall_time={elapsed:.3f}s"
    )
    return 0 if solution.converged else 2


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="kryode",
        description=(
            "Solve y' = -A y + g(t), y(0) = v on [0, tmax] with a restarted "
            "block Krylov exponential integrator."
        ),
    )
    defaults = SolverConfig()
    parser.add_argument("--matrix", required=True, help="Matrix Market coordinate file for A")
    parser.add_argument("--source", required=True, help="source spec (see module docstring)")
    parser.add_argument("--v0", default=None, help="initial value file, one number per line (default: zero)")
    parser.add_argument("--tmax", required=True, type=float, help="end of the time interval")
    parser.add_argument("--tol", type=float, default=defaults.tol, help="relative residual tolerance")
    parser.add_argument("--samples", type=int, default=defaults.samples, help="sample grid size")
    parser.add_argument("--rank", type=int, default=None, help="explicit number of source modes")
    parser.add_argument("--rank-tol", type=float, default=defaults.rank_tol,
                        help="relative singular value cutoff for the source rank")
    parser.add_argument("--degree", type=int, default=defaults.degree, help="polynomial degree of the source fit")
    parser.add_argument("--block-steps", type=int, default=defaults.block_steps, help="Krylov block steps per cycle")
    parser.add_argument("--max-restarts", type=int, default=defaults.max_restarts, help="maximum number of cycles")
    parser.add_argument("--out", default="solution.csv", help="solution snapshot CSV path")
    parser.add_argument("--residuals", default="residuals.csv", help="residual history CSV path")
    parser.add_argument("--mode", choices=("grid", "evaluator"), default=defaults.mode,
                        help="snapshot-only or retain per-cycle bases")
    args = parser.parse_args(argv)

    config = SolverConfig(
        samples=args.samples,
        rank_m=args.rank,
        rank_tol=args.rank_tol,
        degree=args.degree,
        block_steps=args.block_steps,
        max_restarts=args.max_restarts,
        tol=args.tol,
        mode=args.mode,
    )
    manifest = RunManifest(
        matrix_path=args.matrix,
        source_spec=args.source,
        t_end=args.tmax,
        v0_path=args.v0,
        solution_path=args.out,
        residuals_path=args.residuals,
        config=config,
    )
    return run_solve(manifest)


if __name__ == "__main__":
    sys.exit(main())
