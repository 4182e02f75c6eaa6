"""Time the Jacobi kernels against LAPACK on random Hermitian matrices.

Usage: ``python benchmarks/bench_eigensolver.py [--sizes 4 8 16 32 64] [--repeat 5]``
"""
import argparse
import timeit

import numpy as np

from noiseless import linalg
from noiseless.linalg import _jacobi

try:
    from noiseless.linalg import _jacobi_ext
except ImportError:
    _jacobi_ext = None


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"selected backend: {linalg.BACKEND}")
    print(f"{'d':>4} {'python [ms]':>12} {'cython [ms]':>12} {'lapack [ms]':>12} {'max |dw|':>10}")
    for d in args.sizes:
        a = linalg.random_hermitian(d, rng)
        ref = np.linalg.eigvalsh(a)
        t_py = best_of(lambda: _jacobi.jacobi_eigh(a), args.repeat)
        err = float(np.max(np.abs(np.sort(_jacobi.jacobi_eigh(a)[0]) - ref)))
        if _jacobi_ext is not None:
            t_c = best_of(lambda: _jacobi_ext.jacobi_eigh(a), args.repeat)
            err = max(err, float(np.max(np.abs(np.sort(_jacobi_ext.jacobi_eigh(a)[0]) - ref))))
            c_txt = f"{1e3 * t_c:12.3f}"
        else:
            c_txt = f"{'n/a':>12}"
        t_np = best_of(lambda: np.linalg.eigh(a), args.repeat)
        print(f"{d:4d} {1e3 * t_py:12.3f} {c_txt} {1e3 * t_np:12.3f} {err:10.2e}")


if __name__ == "__main__":
    main()
