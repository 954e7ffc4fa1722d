"""Time the compiled kernels against the pure-Python fallback.

Usage::

    python benchmarks/bench_kernels.py [--grid 24] [--repeat 3]

Both backends factorize the same quasi-definite Newton-type matrix built from
a Poisson control instance, so the timings cover ordering, numeric LDL^T and
triangular solves.
"""
import argparse
import time

import numpy as np
import scipy.sparse as sp

from ssnpmm.generators import ControlInstanceSpec, generate
from ssnpmm.linalg import backend, compiled_available, factorize_quasidef, get_kernels


def test_matrix(grid):
    p = generate(ControlInstanceSpec("poisson", grid))
    H = p.Q + sp.identity(p.n) * 1e-2
    return sp.bmat([[-H, p.A.T], [p.A, sp.identity(p.m) * 1e-4]], format="csr")


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def run(name, M, rhs, repeat):
    backend.kernels = get_kernels(name)
    t_fact, fac = best_of(lambda: factorize_quasidef(M), repeat)
    t_solve, x = best_of(lambda: fac.solve(rhs), repeat)
    return t_fact, t_solve, x


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--grid", type=int, default=24)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if not compiled_available():
        raise SystemExit("compiled kernels not built; run `pip install -e . --no-build-isolation`")

    M = test_matrix(args.grid)
    rhs = np.random.default_rng(0).standard_normal(M.shape[0])
    print(f"matrix size {M.shape[0]}, nnz {M.nnz}")
    saved = backend.kernels
    try:
        results = {name: run(name, M, rhs, args.repeat) for name in ("compiled", "python")}
    finally:
        backend.kernels = saved
    for name, (tf, ts, _) in results.items():
        print(f"{name:9s} factorize {tf * 1e3:10.2f} ms   solve {ts * 1e3:9.2f} ms")
    (cf, cs, xc), (pf, ps, xp) = results["compiled"], results["python"]
    print(f"speedup   factorize {pf / cf:10.1f} x    solve {ps / cs:9.1f} x")
    print(f"max |x_compiled - x_python| = {np.abs(xc - xp).max():.1e}")


if __name__ == "__main__":
    main()
