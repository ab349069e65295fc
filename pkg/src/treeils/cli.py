"""Command-line entry point: ``treeils {ising,stereo,denoise,oracle} ...``.

Exit status is 0 on success, 1 on invalid arguments or inputs and 2 on I/O
failures. The energy printed at the end is always recomputed from the
returned labeling with :func:`treeils.graph.total_energy`.
"""

from __future__ import annotations

import argparse
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .graph import build_grid, random_labeling, total_energy
from .inference import loopy_bp, scanline
from .instance import read_instance
from .ising import generate_ising
from .models import make_denoise, make_stereo
from .oracle import brute_force_map
from .pgm import PgmError, PgmImage, read_pgm, write_pgm
from .search import IlsConfig, icm, ticm, tils
from .trace import RunTrace, write_trace
from .trees import make_schedule

ALGOS = ["icm", "ticm", "tils", "loopybp", "scanline"]


class CliError(Exception):
    """Invalid arguments or inconsistent inputs (exit status 1)."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _shared(p, algo_default="tils"):
    p.add_argument("--algo", choices=ALGOS, default=algo_default)
    p.add_argument("--schedule", choices=["rowcol", "comb"], default="rowcol")
    p.add_argument("--rho-max", type=float, default=10.0)
    p.add_argument("--t-inner", type=int, default=1)
    p.add_argument("--backtracks", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=None,
                   help="T-ILS outer iterations, (T-)ICM sweeps or loopy BP sweeps")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per solve")
    p.add_argument("--nu", type=float, default=1.0, help="singleton scale for scan-line")
    p.add_argument("--trace", default=None, help="write a CSV trace here")
    p.add_argument("--repeat", type=int, default=1, help="independent seeded solves")


def build_parser():
    parser = _Parser(prog="treeils", description="MAP inference for grid MRFs")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ising", help="random Ising benchmark")
    p.add_argument("--width", type=int, default=50)
    p.add_argument("--height", type=int, default=50)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    _shared(p)

    p = sub.add_parser("stereo", help="Potts stereo matching on a PGM pair")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--labels", type=int, default=16)
    p.add_argument("--lambda", dest="lam", type=float, default=20.0)
    p.add_argument("--init", default="random", help="random, scanline or a PGM label map")
    p.add_argument("--out", default=None)
    _shared(p)

    p = sub.add_parser("denoise", help="truncated-linear Potts denoising of a PGM")
    p.add_argument("--input", required=True)
    p.add_argument("--labels", type=int, default=256)
    p.add_argument("--lambda", dest="lam", type=float, default=25.0)
    p.add_argument("--trunc", type=float, default=100.0)
    p.add_argument("--init", default="random", help="random, scanline or a PGM label map")
    p.add_argument("--out", default=None)
    _shared(p)

    p = sub.add_parser("oracle", help="brute-force MAP of a small instance file")
    p.add_argument("--instance", required=True)
    _shared(p, algo_default=None)
    return parser


def _config(args, seed):
    return IlsConfig(
        rho_max=args.rho_max,
        t_outer=args.max_iters or 1000,
        t_inner=args.t_inner,
        max_backtracks=args.backtracks,
        seed=seed,
        time_limit=args.time_limit,
    )


def solve(graph, model, args, seed, init=None):
    """Run ``args.algo``; returns ``(labels, trace)``."""
    algo = args.algo
    S = model.label_count
    rng = np.random.default_rng(seed)
    trace = RunTrace()
    start = time.perf_counter()

    def ms():
        return 1e3 * (time.perf_counter() - start)

    if algo == "loopybp":
        res = loopy_bp(graph, model, max_iters=args.max_iters or 1000,
                       time_limit=args.time_limit, record=args.trace is not None)
        for it, (e, t) in enumerate(zip(res.energies, res.elapsed_ms), 1):
            trace.append(it, t, e, True, 0.0)
        return res.labels, trace
    if algo == "scanline":
        x = scanline(graph, model, args.nu)
        trace.append(1, ms(), total_energy(graph, model, x), True, 0.0)
        return x, trace

    schedule = make_schedule(graph, args.schedule) if algo != "icm" else None
    if algo == "tils":
        result = tils(graph, model, schedule, _config(args, seed), init=init)
        return result.labels, result.trace

    x0 = init if init is not None else random_labeling(graph, S, rng)
    sweeps = args.max_iters or 1000
    if algo == "icm":
        counter = iter(range(1, sweeps + 1))
        x = icm(graph, model, x0, max_sweeps=sweeps,
                on_sweep=lambda y: trace.append(next(counter), ms(), total_energy(graph, model, y), True, 0.0))
        return x, trace

    visits = [0]

    def on_update(tree, y):
        visits[0] += 1
        if visits[0] % len(schedule) == 0:
            trace.append(visits[0] // len(schedule), ms(), total_energy(graph, model, y), True, 0.0)

    x = ticm(graph, model, schedule, x0, max_sweeps=sweeps, on_update=on_update)
    return x, trace


def _label_map(x, graph, S):
    vals = np.zeros_like(x) if S == 1 else (x.astype(np.int64) * 255) // (S - 1)
    return PgmImage.from_array(vals.reshape(graph.height, graph.width))


def _labels_from_pgm(path, graph, S):
    img = read_pgm(path)
    if (img.width, img.height) != (graph.width, graph.height):
        raise CliError(f"{path}: label map is {img.width}x{img.height}, expected {graph.width}x{graph.height}")
    if S == 1:
        return np.zeros(graph.n_sites, dtype=np.int32)
    return np.rint(img.pixels.reshape(-1).astype(np.float64) * (S - 1) / 255).astype(np.int32)


def _initial(args, graph, model):
    init = getattr(args, "init", "random")
    if init == "random" or args.algo in ("loopybp", "scanline"):
        return None
    if init == "scanline":
        return scanline(graph, model, args.nu)
    return _labels_from_pgm(init, graph, model.label_count)


def _load(args):
    if args.command == "ising":
        if args.width < 1 or args.height < 1:
            raise CliError("width and height must be positive")
        if not args.lam > 0:
            raise CliError("--lambda must be positive")
        return generate_ising(args.width, args.height, args.lam, args.seed)
    if args.command == "stereo":
        left, right = read_pgm(args.left), read_pgm(args.right)
        if left.pixels.shape != right.pixels.shape:
            raise CliError(f"left image is {left.width}x{left.height}, right is {right.width}x{right.height}")
        if args.labels < 1 or args.lam < 0:
            raise CliError("--labels must be positive and --lambda nonnegative")
        graph = build_grid(left.width, left.height)
        return graph, make_stereo(left.pixels, right.pixels, args.labels, args.lam)
    if args.command == "denoise":
        img = read_pgm(args.input)
        if args.labels < 1 or args.lam < 0 or args.trunc < 0:
            raise CliError("--labels must be positive, --lambda and --trunc nonnegative")
        graph = build_grid(img.width, img.height)
        return graph, make_denoise(img.pixels, args.labels, args.lam, args.trunc)
    return read_instance(args.instance)


def _check_args(args):
    if args.repeat < 1:
        raise CliError("--repeat must be at least 1")
    if args.max_iters is not None and args.max_iters < 1:
        raise CliError("--max-iters must be at least 1")
    if not 0 <= args.rho_max < 100:
        raise CliError("--rho-max must lie in [0, 100)")
    if args.t_inner < 1 or args.backtracks < 1:
        raise CliError("--t-inner and --backtracks must be at least 1")
    if not 0 <= args.nu <= 1:
        raise CliError("--nu must lie in [0, 1]")


def _solve_job(job):
    args, seed = job
    graph, model = _load(args)
    init = _initial(args, graph, model)
    x, trace = solve(graph, model, args, seed, init)
    return x, trace, total_energy(graph, model, x)


def _trace_path(path, k, repeat):
    if repeat == 1:
        return path
    stem, dot, ext = path.rpartition(".")
    return f"{stem}_{k}.{ext}" if dot else f"{path}_{k}"


def run(args):
    _check_args(args)
    graph, model = _load(args)

    if args.command == "oracle":
        x, energy = brute_force_map(graph, model)
        print(f"oracle energy {energy!r}")
        print("labels " + " ".join(str(int(v)) for v in x))
        if args.algo is None:
            return 0
        y, trace = solve(graph, model, args, args.seed)
        solved = total_energy(graph, model, y)
        print(f"{args.algo} energy {solved!r}")
        if args.trace:
            write_trace(args.trace, trace)
        return 0 if solved >= energy else 1

    if args.repeat == 1:
        seeds = [args.seed]
    else:
        seeds = np.random.SeedSequence(args.seed).spawn(args.repeat)
    jobs = [(args, s) for s in seeds]
    if len(jobs) == 1:
        results = [_solve_job(jobs[0])]
    else:
        with ProcessPoolExecutor() as pool:
            results = list(pool.map(_solve_job, jobs))

    for k, (x, trace, energy) in enumerate(results):
        if args.trace:
            write_trace(_trace_path(args.trace, k, len(results)), trace)
        if len(results) > 1:
            print(f"run {k} energy {energy!r}")
    x, _, energy = results[0]
    if getattr(args, "out", None):
        write_pgm(args.out, _label_map(x, graph, model.label_count))
    if len(results) > 1:
        print(f"median energy {statistics.median(r[2] for r in results)!r}")
    else:
        print(f"energy {energy!r}")
    return 0


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return run(args)
    except CliError as exc:
        print(f"treeils: error: {exc}", file=sys.stderr)
        return 1
    except (PgmError, ValueError) as exc:
        print(f"treeils: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"treeils: I/O error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
