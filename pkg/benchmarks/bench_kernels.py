"""Benchmark the compiled kernel lane against the NumPy fallback.

Times the three kernels on representative shapes and one end-to-end solve,
printing a table with the speedup of the compiled lane. Run as::

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np
import scipy.sparse as sp

from kryode import Operator, SolverConfig, SourceTerm, kernels, solve


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(label, make_args, fn, repeats):
    rows = []
    for backend in kernels.available_backends():
        kernels.use_backend(backend)
        args = make_args()
        fn(*args)  # warm up (JIT-free, but fills caches)
        rows.append((backend, best_of(lambda: fn(*args), repeats)))
    return label, dict(rows)


def solve_once():
    n = 400
    A = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n)).tocsr()
    op = Operator.from_sparse(A)
    rng = np.random.default_rng(7)
    w = rng.standard_normal(n)
    w /= np.linalg.norm(w)
    z = rng.standard_normal(n)
    z /= np.linalg.norm(z)
    g = SourceTerm.from_callable(n, lambda t: np.sin(t) * w + np.cos(2 * t) * z)
    sol = solve(op, np.zeros(n), g, 1.0, SolverConfig())
    assert sol.converged


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    if "compiled" not in kernels.available_backends():
        print("compiled lane not available; build it with:")
        print("    pip install -e . --no-build-isolation")
        return

    rng = np.random.default_rng(0)
    cases = []

    for n, b in ((400, 8), (2000, 8), (400, 24)):
        M = rng.standard_normal((n, b))
        cases.append(
            bench_case(
                f"qr_thin {n}x{b}",
                lambda M=M: (M, 1e-10),
                kernels.qr_thin,
                args.repeats,
            )
        )
    for n, s in ((200, 20), (400, 40), (2000, 40)):
        M = rng.standard_normal((n, s))
        cases.append(
            bench_case(
                f"thin_svd {n}x{s}", lambda M=M: (M,), kernels.thin_svd, args.repeats
            )
        )
    for d in (31, 120, 240):
        M = rng.standard_normal((d, d))
        cases.append(
            bench_case(f"expm {d}x{d}", lambda M=M: (M,), kernels.expm, args.repeats)
        )
    cases.append(bench_case("solve laplacian n=400", lambda: (), solve_once, max(1, args.repeats // 2)))

    width = max(len(label) for label, _ in cases)
    print(f"{'case':<{width}}  {'python':>10}  {'compiled':>10}  {'speedup':>8}")
    for label, rows in cases:
        py = rows["python"]
        cy = rows["compiled"]
        print(f"{label:<{width}}  {py * 1e3:9.3f}ms  {cy * 1e3:9.3f}ms  {py / cy:7.2f}x")


if __name__ == "__main__":
    main()
