"""Compare the compiled and numpy band-LU kernels on shifted Helmholtz matrices.

    python3 benchmarks/bench_bandlu.py [--sizes 32 64 96] [--repeat 3]

Times factorization and one solve per backend, with scipy's SuperLU as a
reference, and checks that both kernels return the same solution.
"""

import argparse
import time

import numpy as np
import scipy.sparse.linalg as spla

from pade_mor import _kernels
from pade_mor.grid import square_dirichlet_grid
from pade_mor.linalg import BandLU, as_sparse


def best_of(repeat, fn):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[32, 64, 96])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = _kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default {_kernels.BACKEND})")
    print(f"{'cells':>6} {'unknowns':>9} {'band':>5} {'backend':>8} {'factor s':>10} {'solve s':>10} {'rel diff':>10}")
    for n in args.sizes:
        g = square_dirichlet_grid(n)
        A = as_sparse(g.restrict(g.stiffness) - (47 + 0.5j) * g.restrict(g.mass))
        b = np.random.default_rng(0).normal(size=A.shape[0]) + 0j
        ref = None
        for name in backends:
            tf, lu = best_of(args.repeat, lambda: BandLU(A, backend=name))
            ts, x = best_of(args.repeat, lambda: lu.solve(b))
            ref = x if ref is None else ref
            diff = np.linalg.norm(x - ref) / np.linalg.norm(ref)
            print(f"{n:>6} {A.shape[0]:>9} {lu.kl:>5} {name:>8} {tf:>10.4f} {ts:>10.4f} {diff:>10.1e}")
        tf, slu = best_of(args.repeat, lambda: spla.splu(A.tocsc()))
        ts, x = best_of(args.repeat, lambda: slu.solve(b))
        diff = np.linalg.norm(x - ref) / np.linalg.norm(ref)
        print(f"{n:>6} {A.shape[0]:>9} {'-':>5} {'superlu':>8} {tf:>10.4f} {ts:>10.4f} {diff:>10.1e}")


if __name__ == "__main__":
    main()
