"""Compare the numba and numpy pullback kernels.

    python benchmarks/bench_kernels.py [--points 20000] [--repeat 5]

Both paths are timed in-process; the numba kernel is warmed up first so
compilation is not counted. Outputs are checked to agree before timing.
"""
import argparse
import itertools
import time

import numpy as np

from degcw.exprgeom import kernels


def make_case(n_points, dim, q, seed=0):
    rng = np.random.default_rng(seed)
    idx = np.array(list(itertools.combinations(range(dim), q)), dtype=np.int64)
    coef = rng.standard_normal((n_points, len(idx)))
    jac = rng.standard_normal((n_points, dim, dim))
    return coef, jac, idx, idx


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        print("numba unavailable (or DEGCW_DISABLE_NUMBA set); timing numpy only")
    print(f"{'dim':>3} {'q':>2} {'numpy [s]':>11} {'numba [s]':>11} {'speedup':>8}")
    for dim, q in ((2, 1), (2, 2), (4, 2), (4, 3), (4, 4)):
        case = make_case(args.points, dim, q)
        t_np = best_of(lambda: kernels.pullback_coeffs_numpy(*case), args.repeat)
        if kernels.HAVE_NUMBA:
            ref = kernels.pullback_coeffs_numpy(*case)
            got = kernels.pullback_coeffs_numba(*case)
            assert np.allclose(ref, got, rtol=1e-10, atol=1e-12)
            t_nb = best_of(lambda: kernels.pullback_coeffs_numba(*case), args.repeat)
            print(f"{dim:>3} {q:>2} {t_np:>11.4f} {t_nb:>11.4f} {t_np / t_nb:>8.2f}")
        else:
            print(f"{dim:>3} {q:>2} {t_np:>11.4f} {'-':>11} {'-':>8}")


if __name__ == "__main__":
    main()
