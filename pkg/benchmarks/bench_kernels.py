"""Time the numba kernels against their pure-numpy fallbacks.

Run:  python benchmarks/bench_kernels.py [--n 2] [--h 0.05] [--r-max 4]

Both implementations are imported directly from vacmin._kernels, so this
works regardless of the VACMIN_NO_NUMBA dispatch setting (numba results are
skipped when numba is unavailable).
"""

import argparse
import time

import numpy as np

from vacmin import _kernels
from vacmin.boundary import angular, initial_field
from vacmin.field import Grid
from vacmin.potentials import power


def bench(fn, *args, repeat=5):
    fn(*args)  # warm-up / JIT compile
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=2, choices=(2, 3))
    ap.add_argument("--h", type=float, default=0.05)
    ap.add_argument("--r-max", type=float, default=4.0)
    ap.add_argument("--m", type=int, default=2)
    args = ap.parse_args()

    grid = Grid(args.n, args.h, args.r_max)
    pot = power([0.0] * args.m, 4)
    u = initial_field(grid, pot, angular(pot, 0.6), ramp_width=1.0)
    vals, mask, h = u.values, grid.mask, grid.h
    print(f"grid: n={args.n} h={args.h} r_max={args.r_max} "
          f"shape={grid.shape} interior={grid.interior_count} m={args.m}")
    print(f"numba available: {_kernels.NUMBA_ENABLED}")

    rows = [
        ("laplacian", _kernels.laplacian_numpy,
         getattr(_kernels, "laplacian_numba", None), (vals, mask, h)),
        ("energy_only", _kernels.energy_only_numpy,
         getattr(_kernels, "energy_only_numba", None), (vals, mask, h, pot)),
        ("energy_and_grad", _kernels.energy_and_grad_numpy,
         getattr(_kernels, "energy_and_grad_numba", None), (vals, mask, h, pot)),
        ("energy_density", lambda v, hh, p: _kernels.energy_density_numpy(v, hh, p),
         getattr(_kernels, "energy_density_numba", None), (vals, h, pot)),
    ]
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, f_np, f_nb, a in rows:
        t_np = bench(f_np, *a) * 1e3
        if f_nb is None:
            print(f"{name:<18}{t_np:>12.3f}{'-':>12}{'-':>10}")
            continue
        t_nb = bench(f_nb, *a) * 1e3
        print(f"{name:<18}{t_np:>12.3f}{t_nb:>12.3f}{t_np / t_nb:>10.1f}x")


if __name__ == "__main__":
    main()
