"""Exhaustive MAP search, used to check the solvers on small instances."""

import numpy as np

from . import _backend
from .problem import compile_problem

MAX_STATES = 2 ** 26


def brute_force_map(graph, model, max_states=MAX_STATES):
    """Enumerate all labelings and return ``(labels, energy)`` of the best.

    Ties go to the lexicographically smallest label vector. Candidates found
    by the enumeration are re-scored with the same routine as
    :func:`~treeils.graph.total_energy`, so the returned energy is directly
    comparable with any solver's.
    """
    S, N = model.label_count, graph.n_sites
    if S ** N > max_states:
        raise ValueError(f"{S}^{N} labelings exceed the brute-force limit of {max_states}")
    problem = compile_problem(graph, model)
    scale = float(np.abs(problem.unary).sum() + np.abs(problem.tscale).sum()
                  * np.abs(problem.tables).max(initial=0.0))
    tol = 1e-9 * (1.0 + scale)
    _, candidates = _backend.kernels.brute_force(
        problem.unary, *problem.adjacency, *problem.pairwise, tol)
    best, best_energy = None, np.inf
    for x in candidates:
        e = problem.energy(x)
        if e < best_energy:
            best, best_energy = x, e
    return np.asarray(best, dtype=np.int32), best_energy
