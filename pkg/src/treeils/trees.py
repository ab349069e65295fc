"""Conditional trees: tree-shaped site subsets solved with their blanket fixed.

A tree stores its members in an order where every parent precedes its
children, so position 0 is the root. Each non-root member links to its
parent either through a real graph edge or through a dummy edge that
carries zero energy and only exists to join separate chains into one tree.
"""

from __future__ import annotations

import numpy as np

from . import _backend
from .problem import compile_problem


class MalformedTreeError(ValueError):
    pass


class ConditionalTree:
    """Members, parent links and Markov blanket of one conditional tree.

    Parameters
    ----------
    graph : Graph
    sites : sequence of int
        Member sites.
    parent : sequence of int
        For each member, the *position* in ``sites`` of its parent, or -1
        for the single root. Links between non-adjacent sites become dummy
        edges.
    """

    def __init__(self, graph, sites, parent):
        sites = np.asarray(sites, dtype=np.int32).reshape(-1)
        parent = np.asarray(parent, dtype=np.int32).reshape(-1)
        if len(sites) == 0 or len(sites) != len(parent):
            raise MalformedTreeError("need one parent entry per member")
        if len(np.unique(sites)) != len(sites):
            raise MalformedTreeError("duplicate member site")
        if sites.min() < 0 or sites.max() >= graph.n_sites:
            raise MalformedTreeError("member site out of range")
        order = _topological_order(parent)
        remap = np.empty(len(order), dtype=np.int32)
        remap[order] = np.arange(len(order), dtype=np.int32)
        self.graph = graph
        self.sites = sites[order]
        self.parent = np.where(parent[order] < 0, -1, remap[parent[order]]).astype(np.int32)
        self._link_edges()
        self._find_blanket()

    @classmethod
    def from_chains(cls, graph, chains):
        """Chains in the given order, each one's head hooked onto the previous tail."""
        sites, parent = [], []
        for chain in chains:
            for k, s in enumerate(chain):
                parent.append(len(sites) - 1 if (k > 0 or sites) else -1)
                sites.append(s)
        return cls(graph, sites, parent)

    def _link_edges(self):
        g = self.graph
        m = len(self.sites)
        self.pedge = np.full(m, -1, dtype=np.int32)
        self.pflip = np.zeros(m, dtype=np.uint8)
        tree_edges, dummy_edges = [], []
        for k in range(1, m):
            s, p = int(self.sites[k]), int(self.sites[self.parent[k]])
            if g.has_edge(s, p):
                self.pedge[k] = g.edge_id(s, p)
                self.pflip[k] = s > p
                tree_edges.append((p, s))
            else:
                dummy_edges.append((p, s))
        self.tree_edges = np.array(tree_edges, dtype=np.int32).reshape(-1, 2)
        self.dummy_edges = np.array(dummy_edges, dtype=np.int32).reshape(-1, 2)

    def _find_blanket(self):
        g = self.graph
        self.in_tree = np.zeros(g.n_sites, dtype=np.uint8)
        self.in_tree[self.sites] = 1
        internal = 0
        blanket = set()
        for s in self.sites:
            for j in g.nbr_site[g.nbr_ptr[s]:g.nbr_ptr[s + 1]]:
                if self.in_tree[j]:
                    internal += 1
                else:
                    blanket.add(int(j))
        if internal // 2 != len(self.tree_edges):
            raise MalformedTreeError(
                "members share graph edges that are not tree edges; "
                "the induced subgraph has a cycle"
            )
        self.blanket = np.array(sorted(blanket), dtype=np.int32)

    @property
    def size(self):
        return len(self.sites)

    def __len__(self):
        return len(self.sites)

    def __repr__(self):
        return (f"ConditionalTree(size={self.size}, tree_edges={len(self.tree_edges)}, "
                f"dummy_edges={len(self.dummy_edges)}, blanket={len(self.blanket)})")


def _topological_order(parent):
    m = len(parent)
    roots = np.flatnonzero(parent < 0)
    if len(roots) != 1:
        raise MalformedTreeError(f"expected exactly one root, found {len(roots)}")
    if np.any(parent >= m):
        raise MalformedTreeError("parent position out of range")
    children = [[] for _ in range(m)]
    for k, p in enumerate(parent):
        if p >= 0:
            children[p].append(k)
    order = [int(roots[0])]
    for k in order:
        order.extend(children[k])
    if len(order) != m:
        raise MalformedTreeError("parent links contain a cycle")
    return np.array(order, dtype=np.int64)


def _grid_dims(graph):
    try:
        return graph.width, graph.height
    except AttributeError:
        raise TypeError("tree schedules are defined for grid graphs only") from None


def row_column_schedule(graph):
    """H row chains (top to bottom) followed by W column chains (left to right)."""
    W, H = _grid_dims(graph)
    idx = np.arange(W * H).reshape(H, W)
    rows = [ConditionalTree.from_chains(graph, [idx[r]]) for r in range(H)]
    cols = [ConditionalTree.from_chains(graph, [idx[:, c]]) for c in range(W)]
    return rows + cols


def comb_schedule(graph):
    """Even rows, odd rows, even columns, odd columns, each joined by dummy edges."""
    W, H = _grid_dims(graph)
    if W < 2 or H < 2:
        raise ValueError("comb trees need a grid of at least 2x2")
    idx = np.arange(W * H).reshape(H, W)
    return [
        ConditionalTree.from_chains(graph, [idx[r] for r in range(0, H, 2)]),
        ConditionalTree.from_chains(graph, [idx[r] for r in range(1, H, 2)]),
        ConditionalTree.from_chains(graph, [idx[:, c] for c in range(0, W, 2)]),
        ConditionalTree.from_chains(graph, [idx[:, c] for c in range(1, W, 2)]),
    ]


def site_schedule(graph):
    """One single-site tree per site, in site order; T-ICM then reduces to ICM."""
    return [ConditionalTree(graph, [i], [-1]) for i in range(graph.n_sites)]


def make_schedule(graph, kind):
    builders = {"rowcol": row_column_schedule, "comb": comb_schedule, "site": site_schedule}
    try:
        return builders[kind](graph)
    except KeyError:
        raise ValueError(f"unknown schedule {kind!r}; choose from {sorted(builders)}") from None


def absorb(graph, model, tree, x):
    """Singleton energies of the members with blanket interactions folded in.

    Returns an ``(m, S)`` array whose row ``k`` belongs to ``tree.sites[k]``.
    Only blanket labels of ``x`` are read.
    """
    return _absorb(compile_problem(graph, model), tree, np.asarray(x, dtype=np.int32))


def _absorb(problem, tree, x, out=None):
    if out is None:
        out = np.empty((tree.size, problem.label_count))
    _backend.kernels.absorb(problem.unary, *problem.adjacency, *problem.pairwise,
                            tree.in_tree, x, tree.sites, out)
    return out


def conditional_tree_energy(tree, absorbed, model, x_tree):
    """Absorbed singleton energies plus the energies of real tree edges."""
    x_tree = np.ascontiguousarray(x_tree, dtype=np.int32)
    absorbed = np.ascontiguousarray(absorbed, dtype=np.float64)
    if x_tree.shape != (tree.size,) or absorbed.shape != (tree.size, model.label_count):
        raise ValueError("member labels and absorbed energies must match the tree size")
    problem = compile_problem(tree.graph, model)
    return _tree_energy(problem, tree, absorbed, x_tree)


def _tree_energy(problem, tree, absorbed, x_tree):
    return float(_backend.kernels.tree_energy(absorbed, tree.parent, tree.pedge, tree.pflip,
                                              *problem.pairwise, x_tree))
