"""Compare the numba and numpy kernel backends.

    python benchmarks/bench_backends.py [--repeat 5] [--workers N]

The first numba call pays JIT compilation (cached on disk afterwards), so it
is timed separately from the steady-state best-of-N.
"""

import argparse
import os
import time

import numpy as np

from dsmff import kernels
from dsmff.filter import fit_filter_polynomial
from dsmff.geometry import Scatterer, WaveContext, born_farfield, make_directions, quadrature_nodes
from dsmff.indicators import IndicatorData, SamplingGrid, evaluate_grid
from dsmff.spectral import svd


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(workers):
    ctx2, dirs32 = WaveContext(2, 10.0), make_directions(2, 32)
    pear = Scatterer("pear", 0.5)
    pts, w = quadrature_nodes(pear, 48)
    F = born_farfield(pear, ctx2, dirs32)
    d = svd(F)
    data2 = IndicatorData(ctx2, dirs32, matrix=F.entries, decomp=d, poly=fit_filter_polynomial(1e-2, d.norm))
    grid2 = SamplingGrid.parse("-1,1,-1,1,100,100")

    ctx3, dirs258 = WaveContext(3, 2.0), make_directions(3, 258)
    ball = Scatterer("ball", 0.5, R=1.0)
    F3 = born_farfield(ball, ctx3, dirs258, quad_level=16)
    d3 = svd(F3)
    data3 = IndicatorData(ctx3, dirs258, matrix=F3.entries, decomp=d3)
    grid3 = SamplingGrid.parse("-2,2,-2,2,100,100", axes=(1, 2))
    dd = dirs32.directions
    return {
        "born_sum 2D (M=32, 4608 nodes)": lambda: kernels.born_sum(dd, dd, pts, w, 10.0, workers),
        "grid dsm 2D (100x100, M=32)": lambda: evaluate_grid("dsm", data2, grid2, workers),
        "grid tdsm 2D (100x100, M=32)": lambda: evaluate_grid("tdsm", data2, grid2, workers),
        "grid dsm 3D (100x100, M=258)": lambda: evaluate_grid("dsm", data3, grid3, workers),
        "grid fdsm 3D (100x100, M=258)": lambda: evaluate_grid("fdsm", data3, grid3, workers),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--workers", type=int, default=os.cpu_count())
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if kernels.NUMBA_AVAILABLE else [])
    results = {}
    for name in backends:
        with kernels.use_backend(name):
            for label, fn in cases(args.workers).items():
                t0 = time.perf_counter()
                fn()
                first = time.perf_counter() - t0
                results[label, name] = (first, best_of(fn, args.repeat))
    print(f"workers={args.workers} repeat={args.repeat}")
    print(f"{'case':34s} " + " ".join(f"{b + ' first':>12s} {b + ' best':>12s}" for b in backends))
    for label in dict.fromkeys(k for k, _ in results):
        row = " ".join(f"{results[label, b][0]:12.4f} {results[label, b][1]:12.4f}" for b in backends)
        print(f"{label:34s} {row}")


if __name__ == "__main__":
    main()
