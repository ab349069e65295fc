"""Time the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--size 64] [--repeat 3]

Each row is the best of ``--repeat`` runs of one workload per backend.
"""

import argparse
import time

import numpy as np

from treeils import _backend
from treeils.graph import build_grid
from treeils.inference import loopy_bp
from treeils.ising import generate_ising
from treeils.models import make_stereo
from treeils.search import icm, ticm
from treeils.trees import comb_schedule, row_column_schedule


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def workloads(size):
    g, ising = generate_ising(size, size, 1.0, 0)
    rng = np.random.default_rng(0)
    gs = build_grid(size, size)
    left, right = rng.integers(0, 256, (2, size, size))
    stereo = make_stereo(left, right, 16, 20.0)
    x0 = rng.integers(0, 2, g.n_sites)
    xs = rng.integers(0, 16, gs.n_sites)
    rowcol, comb = row_column_schedule(g), comb_schedule(g)
    stereo_rowcol = row_column_schedule(gs)
    return {
        "icm sweep (ising)": lambda: icm(g, ising, x0, max_sweeps=1),
        "t-icm rowcol sweep (ising)": lambda: ticm(g, ising, rowcol, x0, max_sweeps=1),
        "t-icm comb sweep (ising)": lambda: ticm(g, ising, comb, x0, max_sweeps=1),
        "t-icm rowcol sweep (stereo S=16)": lambda: ticm(gs, stereo, stereo_rowcol, xs, max_sweeps=1),
        "loopy bp 20 sweeps (ising)": lambda: loopy_bp(g, ising, max_iters=20, tol=0),
        "loopy bp 20 sweeps (stereo S=16)": lambda: loopy_bp(gs, stereo, max_iters=20, tol=0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64, help="grid side length")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    names = sorted(_backend.BACKENDS)
    if "compiled" not in names:
        print("compiled extension not built; only the fallback is timed")
    previous = _backend.name
    rows = []
    jobs = workloads(args.size)
    for label, fn in jobs.items():
        timing = {}
        for name in names:
            _backend.use(name)
            fn()  # warm caches
            timing[name] = _best(fn, args.repeat)
        rows.append((label, timing))
    _backend.use(previous)

    print(f"{'workload':36s}" + "".join(f"{n:>12s}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for label, timing in rows:
        line = f"{label:36s}" + "".join(f"{1e3 * timing[n]:10.2f}ms" for n in names)
        if len(names) > 1:
            line += f"{timing['python'] / timing['compiled']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
