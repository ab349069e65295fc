"""Graph topology, labelings and energy evaluation for pairwise MRFs.

Sites are integers ``0..N-1``. Grid sites are numbered row-major, so site
``i`` sits at column ``i % W`` and row ``i // W``. Every edge is stored once as
``(i, j)`` with ``i < j``; for grids the edges are enumerated site by site,
right neighbour first and then down neighbour, which keeps the edge list
sorted lexicographically.
"""

from __future__ import annotations

import numpy as np

LABEL_DTYPE = np.int32


class Graph:
    """Undirected graph with a CSR adjacency structure.

    Parameters
    ----------
    n_sites : int
        Number of sites.
    edges : array_like, shape (E, 2)
        Unordered site pairs. Each pair is normalised to ``(min, max)``;
        duplicates and self loops are rejected.
    """

    def __init__(self, n_sites, edges):
        if n_sites < 1:
            raise ValueError("a graph needs at least one site")
        edges = np.asarray(edges, dtype=np.int32).reshape(-1, 2)
        if edges.size and (edges.min() < 0 or edges.max() >= n_sites):
            raise ValueError("edge endpoint out of range")
        if np.any(edges[:, 0] == edges[:, 1]):
            raise ValueError("self loops are not allowed")
        edges = np.sort(edges, axis=1)
        self.n_sites = int(n_sites)
        self.edges = np.ascontiguousarray(edges)
        self.edges.flags.writeable = False
        self._edge_ids = {(int(a), int(b)): e for e, (a, b) in enumerate(self.edges)}
        if len(self._edge_ids) != len(self.edges):
            raise ValueError("duplicate edge")
        self._build_adjacency()

    def _build_adjacency(self):
        n, edges = self.n_sites, self.edges
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        eid = np.concatenate([np.arange(len(edges))] * 2).astype(np.int32)
        # ascending neighbour order within each site
        order = np.lexsort((dst, src))
        self.nbr_site = np.ascontiguousarray(dst[order], dtype=np.int32)
        self.nbr_edge = np.ascontiguousarray(eid[order], dtype=np.int32)
        counts = np.bincount(src, minlength=n)
        self.nbr_ptr = np.zeros(n + 1, dtype=np.int32)
        np.cumsum(counts, out=self.nbr_ptr[1:])
        for arr in (self.nbr_site, self.nbr_edge, self.nbr_ptr):
            arr.flags.writeable = False

    @property
    def n_edges(self):
        return len(self.edges)

    def neighbors(self, i):
        """Markov blanket of site ``i`` in ascending site order."""
        self._check_site(i)
        return [int(j) for j in self.nbr_site[self.nbr_ptr[i]:self.nbr_ptr[i + 1]]]

    def degree(self, i):
        self._check_site(i)
        return int(self.nbr_ptr[i + 1] - self.nbr_ptr[i])

    def edge_id(self, i, j):
        """Index of edge ``{i, j}``; raises ``KeyError`` if absent."""
        return self._edge_ids[(i, j) if i < j else (j, i)]

    def has_edge(self, i, j):
        return ((i, j) if i < j else (j, i)) in self._edge_ids

    def _check_site(self, i):
        if not 0 <= i < self.n_sites:
            raise IndexError(f"site {i} out of range for {self.n_sites} sites")


class GridGraph(Graph):
    """4-connected ``W x H`` grid with row-major site numbering."""

    def __init__(self, width, height):
        if width < 1 or height < 1:
            raise ValueError(f"grid dimensions must be positive, got {width}x{height}")
        self.width = int(width)
        self.height = int(height)
        idx = np.arange(width * height, dtype=np.int32).reshape(height, width)
        right = np.full((height, width), -1, dtype=np.int32)
        down = np.full((height, width), -1, dtype=np.int32)
        right[:, :-1] = idx[:, 1:]
        down[:-1, :] = idx[1:, :]
        pairs = np.stack([np.stack([idx, right], -1), np.stack([idx, down], -1)], axis=2)
        pairs = pairs.reshape(-1, 2)
        super().__init__(width * height, pairs[pairs[:, 1] >= 0])

    def site(self, col, row):
        return row * self.width + col

    def coords(self, i):
        """``(col, row)`` of site ``i``."""
        self._check_site(i)
        return i % self.width, i // self.width

    def __repr__(self):
        return f"GridGraph(width={self.width}, height={self.height})"


def build_grid(width, height):
    return GridGraph(width, height)


def neighbors(graph, i):
    """Neighbours of ``i``; on grids this is up, left, right, down order."""
    return graph.neighbors(i)


def make_labeling(graph, label_count, labels=None):
    """Validated int32 label array for ``graph``.

    With ``labels=None`` an all-zero labeling is returned.
    """
    if labels is None:
        return np.zeros(graph.n_sites, dtype=LABEL_DTYPE)
    x = np.ascontiguousarray(labels, dtype=LABEL_DTYPE).reshape(-1)
    check_labeling(graph, label_count, x)
    return x


def check_labeling(graph, label_count, x):
    if len(x) != graph.n_sites:
        raise ValueError(f"labeling has {len(x)} entries, graph has {graph.n_sites} sites")
    if len(x) and (x.min() < 0 or x.max() >= label_count):
        raise ValueError(f"labels must lie in 0..{label_count - 1}")


def random_labeling(graph, label_count, rng):
    return rng.integers(0, label_count, size=graph.n_sites).astype(LABEL_DTYPE)


def total_energy(graph, model, x):
    """Sum of all singleton energies plus every edge's pairwise energy once."""
    from .problem import compile_problem

    x = np.asarray(x)
    check_labeling(graph, model.label_count, x)
    return compile_problem(graph, model).energy(x)


def local_conditional_energy(graph, model, x, i, a):
    """Energy of giving site ``i`` label ``a`` with every other label fixed."""
    graph._check_site(i)
    if not 0 <= a < model.label_count:
        raise IndexError(f"label {a} out of range")
    check_labeling(graph, model.label_count, np.asarray(x))
    e = model.singleton(i, a)
    for j in graph.neighbors(i):
        e += model.pairwise(i, j, a, int(x[j]))
    return float(e)
