import numpy as np
import pytest

from treeils import _backend
from treeils.graph import Graph, build_grid
from treeils.models import TableModel


@pytest.fixture(params=sorted(_backend.BACKENDS))
def backend(request):
    previous = _backend.use(request.param)
    yield request.param
    _backend.use(previous)


def random_table_model(graph, S, rng, low=-1.0, high=1.0):
    unary = rng.uniform(low, high, (graph.n_sites, S))
    pair = rng.uniform(low, high, (graph.n_edges, S, S))
    return TableModel(graph, unary, pair)


def random_tree_graph(m, rng):
    """Random tree on ``m`` sites; returns the graph and parent site array."""
    parent = np.full(m, -1)
    for k in range(1, m):
        parent[k] = rng.integers(0, k)
    perm = rng.permutation(m)  # scramble site numbering
    edges = [(perm[k], perm[parent[k]]) for k in range(1, m)]
    graph = Graph(m, edges)
    sites = perm
    parent_pos = parent.copy()
    return graph, sites, parent_pos


def enumerate_min(graph, model):
    """Independent oracle: itertools enumeration with per-labeling scalar energies."""
    import itertools

    S = model.label_count
    best, best_x = np.inf, None
    for x in itertools.product(range(S), repeat=graph.n_sites):
        e = sum(model.singleton(i, a) for i, a in enumerate(x))
        e += sum(model.pairwise(int(i), int(j), x[i], x[j]) for i, j in graph.edges)
        if e < best:
            best, best_x = e, x
    return np.array(best_x), best


# one line per acceptance criterion, echoed after the run
ACCEPTANCE = []


def report(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
