"""Plain-text MRF instances for the brute-force oracle.

Layout::

    MRF W H S
    <N lines, S singleton energies each>
    <|E| lines: i j followed by S*S pairwise energies, row a = label of i>

Edges may be listed in any order but must be exactly the grid's edges.
"""

import numpy as np

from .graph import build_grid
from .models import TableModel


class InstanceFormatError(ValueError):
    pass


def read_instance(path):
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or lines[0][0] != "MRF" or len(lines[0]) != 4:
        raise InstanceFormatError("first line must be 'MRF W H S'")
    try:
        W, H, S = (int(v) for v in lines[0][1:])
    except ValueError:
        raise InstanceFormatError("W, H and S must be integers") from None
    if min(W, H, S) < 1:
        raise InstanceFormatError("W, H and S must be positive")
    graph = build_grid(W, H)
    N, E = graph.n_sites, graph.n_edges
    if len(lines) != 1 + N + E:
        raise InstanceFormatError(f"expected {N} singleton and {E} edge lines, found {len(lines) - 1} lines")
    try:
        unary = np.array([[float(v) for v in ln] for ln in lines[1:1 + N]])
        if unary.shape != (N, S):
            raise InstanceFormatError(f"each singleton line needs {S} values")
        pair = np.empty((E, S, S))
        seen = set()
        for ln in lines[1 + N:]:
            if len(ln) != 2 + S * S:
                raise InstanceFormatError(f"each edge line needs 2 + {S * S} values")
            i, j = int(ln[0]), int(ln[1])
            if not (0 <= i < N and 0 <= j < N) or not graph.has_edge(i, j):
                raise InstanceFormatError(f"({i}, {j}) is not a grid edge")
            e = graph.edge_id(i, j)
            if e in seen:
                raise InstanceFormatError(f"edge ({i}, {j}) listed twice")
            seen.add(e)
            table = np.array([float(v) for v in ln[2:]]).reshape(S, S)
            pair[e] = table if i < j else table.T
    except ValueError as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"bad number: {exc}") from None
    return graph, TableModel(graph, unary, pair)


def write_instance(path, graph, model):
    S = model.label_count
    unary = model.unary_table(graph)
    with open(path, "w") as fh:
        fh.write(f"MRF {graph.width} {graph.height} {S}\n")
        for row in unary:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        for i, j in graph.edges:
            vals = [model.pairwise(int(i), int(j), a, b) for a in range(S) for b in range(S)]
            fh.write(f"{i} {j} " + " ".join(repr(float(v)) for v in vals) + "\n")
