"""Min-sum belief propagation: exact on conditional trees, heuristic on grids.

Every message buffer is registered with :data:`message_stats` so tests can
check how many message entries are alive at once.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .graph import LABEL_DTYPE
from .models import scale_singleton
from .problem import compile_problem
from .trees import ConditionalTree


@dataclass
class MessageStats:
    live: int = 0  # message entries currently allocated
    peak: int = 0
    allocated: int = 0  # entries allocated over the lifetime of the counter
    computed: int = 0  # message vectors computed

    def reset(self):
        self.live = self.peak = self.allocated = self.computed = 0


message_stats = MessageStats()


@contextmanager
def _message_buffer(rows, S):
    n = rows * S
    buf = np.empty((max(rows, 0), S))
    message_stats.live += n
    message_stats.allocated += n
    message_stats.peak = max(message_stats.peak, message_stats.live)
    try:
        yield buf
    finally:
        message_stats.live -= n


@contextmanager
def track_messages():
    """Reset :data:`message_stats` and yield it."""
    message_stats.reset()
    yield message_stats


def tree_bp_map(tree, absorbed, model, normalize=True):
    """Exact minimiser of the conditional tree energy, lowest labels on ties.

    The upward pass sends min-sum messages from the leaves to the root. The
    downward pass fixes the root to its best label and sends each child the
    pairwise energy against its parent's chosen label, so the decoded
    labeling is jointly optimal even when several optima tie.
    """
    problem = compile_problem(tree.graph, model)
    absorbed = np.asarray(absorbed, dtype=np.float64)
    if absorbed.shape != (tree.size, model.label_count):
        raise ValueError("absorbed energies do not match the tree")
    return _tree_bp(problem, tree, absorbed, normalize)


def _tree_bp(problem, tree, absorbed, normalize=True):
    m, S = tree.size, problem.label_count
    h = np.array(absorbed, dtype=np.float64, order="C")
    out = np.empty(m, dtype=LABEL_DTYPE)
    with _message_buffer(m - 1, S) as up, _message_buffer(m - 1, S) as down:
        message_stats.computed += _backend.kernels.tree_bp(
            h, tree.parent, tree.pedge, tree.pflip, *problem.pairwise,
            problem.potts, up, down, normalize, out)
    return out


@dataclass
class LoopyResult:
    labels: np.ndarray
    iterations: int
    converged: bool
    max_change: float
    energies: list = field(default_factory=list)  # per sweep, when recorded
    elapsed_ms: list = field(default_factory=list)


def loopy_bp(graph, model, max_iters=1000, tol=1e-4, normalize=True,
             time_limit=None, record=False):
    """Synchronous min-sum BP over every directed edge of ``graph``.

    Stops once no message entry moves by more than ``tol``, after
    ``max_iters`` sweeps, or when ``time_limit`` seconds have elapsed. The
    labeling is decoded from the final beliefs. With ``record=True`` the
    energy of the decoding after every sweep is kept in the result.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    problem = compile_problem(graph, model)
    k = _backend.kernels
    N, S = problem.n_sites, problem.label_count
    belief = np.empty((N, S))
    tmp = np.empty((2, S))
    result = LoopyResult(labels=None, iterations=0, converged=False, max_change=np.inf)
    start = time.perf_counter()
    with _message_buffer(2 * graph.n_edges, S) as msgs:
        msgs[:] = 0.0
        for it in range(1, max_iters + 1):
            change = k.loopy_sweep(problem.unary, *problem.adjacency, *problem.pairwise,
                                   problem.potts, msgs, belief, tmp, normalize)
            message_stats.computed += 2 * graph.n_edges
            result.iterations = it
            result.max_change = change
            if record:
                k.beliefs(problem.unary, *problem.adjacency, msgs, belief)
                result.energies.append(problem.energy(belief.argmin(axis=1)))
                result.elapsed_ms.append(1e3 * (time.perf_counter() - start))
            if change <= tol:
                result.converged = True
                break
            if time_limit is not None and time.perf_counter() - start >= time_limit:
                break
        k.beliefs(problem.unary, *problem.adjacency, msgs, belief)
    result.labels = belief.argmin(axis=1).astype(LABEL_DTYPE)
    return result


def scanline(graph, model, nu=1.0):
    """Independent exact chain BP on every row with singletons scaled by ``nu``.

    Rows ignore each other entirely: no absorption from neighbouring rows.
    """
    scaled = scale_singleton(model, nu)
    problem = compile_problem(graph, scaled)
    W, H = graph.width, graph.height
    x = np.empty(graph.n_sites, dtype=LABEL_DTYPE)
    for r in range(H):
        row = ConditionalTree.from_chains(graph, [range(r * W, (r + 1) * W)])
        x[row.sites] = _tree_bp(problem, row, problem.unary[row.sites])
    return x
