"""Flat array view of a (graph, model) pair, as consumed by the kernels."""

from __future__ import annotations

import numpy as np

from . import _backend


class Problem:
    """Unary table, pairwise tables and adjacency arrays of one MRF."""

    def __init__(self, graph, model):
        S = model.label_count
        unary = np.ascontiguousarray(model.unary_table(graph), dtype=np.float64)
        if unary.shape != (graph.n_sites, S):
            raise ValueError(f"unary table has shape {unary.shape}, expected {(graph.n_sites, S)}")
        pw = model.pairwise_tables(graph)
        self.graph = graph
        self.model = model
        self.n_sites = graph.n_sites
        self.label_count = S
        self.unary = unary
        self.edges = np.ascontiguousarray(graph.edges, dtype=np.int32)
        self.nbr_ptr = graph.nbr_ptr
        self.nbr_site = graph.nbr_site
        self.nbr_edge = graph.nbr_edge
        self.tables = np.ascontiguousarray(pw.tables, dtype=np.float64)
        self.tindex = np.ascontiguousarray(pw.index, dtype=np.int32)
        self.tscale = np.ascontiguousarray(pw.scale, dtype=np.float64)
        self.potts = bool(pw.potts)
        if self.tables.shape[1:] != (S, S):
            raise ValueError("pairwise tables must be S x S")

    @property
    def adjacency(self):
        return self.nbr_ptr, self.nbr_site, self.nbr_edge, self.edges

    @property
    def pairwise(self):
        return self.tables, self.tindex, self.tscale

    def energy(self, x):
        x = np.ascontiguousarray(x, dtype=np.int32)
        return float(_backend.kernels.energy(self.unary, self.edges, *self.pairwise, x))

    def with_unary(self, unary):
        """Shallow copy sharing everything except the unary table."""
        p = object.__new__(Problem)
        p.__dict__.update(self.__dict__)
        p.unary = np.ascontiguousarray(unary, dtype=np.float64)
        return p


def compile_problem(graph, model):
    """Cached :class:`Problem` for ``(graph, model)``; models are immutable."""
    cache = model.__dict__.setdefault("_problem_cache", {})
    hit = cache.get(id(graph))
    if hit is not None and hit.graph is graph:
        return hit
    problem = Problem(graph, model)
    cache[id(graph)] = problem
    return problem
