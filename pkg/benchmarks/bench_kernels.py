"""
Time the sweep kernel backends on the figure 2 grid.

Usage::

    python benchmarks/bench_kernels.py [--repeat N] [--object-points N]

The object-level path (operator expansions and element maps per point) is
timed on a subset of points and extrapolated.
"""

import argparse
import time

import numpy as np

from spdcavity import kernels
from spdcavity.analysis import k_factor, photon_numbers
from spdcavity.cavity import CavityParams
from spdcavity.sweep import figure_preset


def grid_columns():
    fixed, axes = figure_preset(2)
    t, phi = np.meshgrid(axes["t"].grid("t"), axes["phi"].grid("phi"), indexing="ij")
    n = t.size
    return (
        np.full(n, fixed.G),
        np.full(n, fixed.R),
        t.ravel(),
        phi.ravel(),
        np.full(n, fixed.theta),
    )


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--object-points", type=int, default=200)
    args = parser.parse_args(argv)

    cols = grid_columns()
    n = cols[0].size
    rows = []
    for name in sorted(kernels.BACKENDS):
        elapsed = best_of(lambda: kernels.evaluate_points(*cols, backend=name), args.repeat)
        rows.append((name, elapsed, elapsed / n))

    idx = np.linspace(0, n - 1, args.object_points).astype(int)

    def object_path():
        for i in idx:
            p = CavityParams(G=cols[0][i], R=cols[1][i], t=cols[2][i], phi=cols[3][i], theta=cols[4][i])
            photon_numbers(p)
            k_factor(p)

    per_point = best_of(object_path, 1) / len(idx)
    rows.append(("object (extrapolated)", per_point * n, per_point))

    print(f"figure 2 grid: {n} points, best of {args.repeat}")
    print(f"{'backend':<24s}{'total [s]':>12s}{'per point [us]':>18s}{'vs compiled':>14s}")
    ref = dict((r[0], r[1]) for r in rows).get("compiled")
    for name, total, per in rows:
        ratio = f"{total / ref:.1f}x" if ref else "-"
        print(f"{name:<24s}{total:>12.4f}{per * 1e6:>18.1f}{ratio:>14s}")


if __name__ == "__main__":
    main()
