"""Energy models: Ising, Potts stereo, truncated denoising and friends.

Kernels never call :meth:`EnergyModel.singleton` or
:meth:`EnergyModel.pairwise` per element. Every model also tabulates itself:

* ``unary_table(graph)`` gives an ``(N, S)`` array of singleton energies;
* ``pairwise_tables(graph)`` gives a :class:`PairwiseTables`, where edge ``e``
  costs ``scale[e] * tables[index[e], a, b]`` for labels ``a`` on
  ``edges[e, 0]`` and ``b`` on ``edges[e, 1]``.

Ising and Potts models share a single ``S x S`` table scaled per edge, so
large grids never materialise ``E * S * S`` numbers.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class PairwiseTables:
    tables: np.ndarray  # (K, S, S) float64
    index: np.ndarray  # (E,) int32
    scale: np.ndarray  # (E,) float64
    potts: bool = False  # every table is 1 - I and every scale >= 0

    def value(self, e, a, b):
        return float(self.scale[e] * self.tables[self.index[e], a, b])


def potts_table(S):
    return 1.0 - np.eye(S)


class EnergyModel(ABC):
    """Singleton and pairwise energies over ``label_count`` labels.

    Subclasses must implement :meth:`singleton` and :meth:`pairwise`; the
    tabulating methods fall back to calling them element by element.
    """

    label_count: int

    @abstractmethod
    def singleton(self, i, a):
        ...

    @abstractmethod
    def pairwise(self, i, j, a, b):
        ...

    def unary_table(self, graph):
        S = self.label_count
        return np.array(
            [[self.singleton(i, a) for a in range(S)] for i in range(graph.n_sites)],
            dtype=np.float64,
        ).reshape(graph.n_sites, S)

    def pairwise_tables(self, graph):
        S = self.label_count
        tables = np.array(
            [[[self.pairwise(int(i), int(j), a, b) for b in range(S)] for a in range(S)]
             for i, j in graph.edges],
            dtype=np.float64,
        ).reshape(graph.n_edges, S, S)
        return PairwiseTables(
            tables=tables,
            index=np.arange(graph.n_edges, dtype=np.int32),
            scale=np.ones(graph.n_edges),
        )


def _spin(a):
    return 2 * a - 1


class IsingModel(EnergyModel):
    """Binary spins; label 0 is spin -1 and label 1 is spin +1."""

    label_count = 2

    def __init__(self, graph, theta_site, theta_edge):
        theta_site = np.asarray(theta_site, dtype=np.float64)
        if theta_site.shape != (graph.n_sites,):
            raise ValueError(f"need {graph.n_sites} site fields, got shape {theta_site.shape}")
        if isinstance(theta_edge, dict):
            theta_edge = _edge_dict_to_array(graph, theta_edge)
        theta_edge = np.asarray(theta_edge, dtype=np.float64)
        if theta_edge.shape != (graph.n_edges,):
            raise ValueError(f"need {graph.n_edges} couplings, got shape {theta_edge.shape}")
        if not (np.all(np.isfinite(theta_site)) and np.all(np.isfinite(theta_edge))):
            raise ValueError("Ising parameters must be finite")
        self.graph = graph
        self.theta_site = theta_site
        self.theta_edge = theta_edge

    def singleton(self, i, a):
        return float(self.theta_site[i] * _spin(a))

    def pairwise(self, i, j, a, b):
        return float(self.theta_edge[self.graph.edge_id(i, j)] * (_spin(a) * _spin(b)))

    def unary_table(self, graph):
        return np.stack([-self.theta_site, self.theta_site], axis=1)

    def pairwise_tables(self, graph):
        spins = np.array([-1.0, 1.0])
        return PairwiseTables(
            tables=np.outer(spins, spins)[None],
            index=np.zeros(graph.n_edges, dtype=np.int32),
            scale=self.theta_edge.copy(),
        )


def _edge_dict_to_array(graph, theta_edge):
    out = np.empty(graph.n_edges)
    seen = set()
    for (i, j), v in theta_edge.items():
        if not graph.has_edge(i, j):
            raise ValueError(f"({i}, {j}) is not an edge of the graph")
        e = graph.edge_id(i, j)
        if e in seen:
            raise ValueError(f"edge ({i}, {j}) given twice")
        seen.add(e)
        out[e] = v
    if len(seen) != graph.n_edges:
        raise ValueError(f"missing couplings for {graph.n_edges - len(seen)} edges")
    return out


class _PottsPairwise:
    lam: float

    def pairwise(self, i, j, a, b):
        return self.lam if a != b else 0.0

    def pairwise_tables(self, graph):
        return PairwiseTables(
            tables=potts_table(self.label_count)[None],
            index=np.zeros(graph.n_edges, dtype=np.int32),
            scale=np.full(graph.n_edges, self.lam),
            potts=True,
        )


class StereoPottsModel(_PottsPairwise, EnergyModel):
    """Absolute intensity difference data term with Potts smoothness.

    Disparity ``d`` at pixel ``(x, y)`` compares ``left[y, x]`` with
    ``right[y, x - d]``; columns left of the frame clamp to column 0.
    """

    def __init__(self, left, right, label_count, lam):
        left = np.asarray(left)
        right = np.asarray(right)
        if left.ndim != 2 or left.shape != right.shape:
            raise ValueError(f"image shapes differ: {left.shape} vs {right.shape}")
        if label_count < 1:
            raise ValueError("need at least one disparity")
        if lam < 0:
            raise ValueError("lambda must be nonnegative")
        self.left = left.astype(np.uint8)
        self.right = right.astype(np.uint8)
        self.label_count = int(label_count)
        self.lam = float(lam)
        self.height, self.width = left.shape

    def singleton(self, i, a):
        y, x = divmod(i, self.width)
        return float(abs(int(self.left[y, x]) - int(self.right[y, max(x - a, 0)])))

    def unary_table(self, graph):
        self._check_graph(graph)
        H, W, S = self.height, self.width, self.label_count
        cols = np.maximum(np.arange(W)[:, None] - np.arange(S)[None, :], 0)  # (W, S)
        left = self.left.astype(np.float64)
        right = self.right.astype(np.float64)
        diff = np.abs(left[:, :, None] - right[:, cols])  # (H, W, S)
        return diff.reshape(H * W, S)

    def _check_graph(self, graph):
        if getattr(graph, "width", None) != self.width or getattr(graph, "height", None) != self.height:
            raise ValueError("graph does not match the image dimensions")


class DenoiseModel(_PottsPairwise, EnergyModel):
    """Truncated absolute deviation from the noisy intensity, Potts smoothness."""

    def __init__(self, noisy, label_count=256, lam=25.0, trunc=100.0):
        if label_count < 1:
            raise ValueError("need at least one intensity level")
        if lam < 0 or trunc < 0:
            raise ValueError("lambda and trunc must be nonnegative")
        self.noisy = np.asarray(noisy).reshape(-1).astype(np.float64)
        self.label_count = int(label_count)
        self.lam = float(lam)
        self.trunc = float(trunc)

    def singleton(self, i, a):
        return float(min(abs(a - self.noisy[i]), self.trunc))

    def unary_table(self, graph):
        if graph.n_sites != len(self.noisy):
            raise ValueError("graph does not match the image size")
        levels = np.arange(self.label_count, dtype=np.float64)
        return np.minimum(np.abs(levels[None, :] - self.noisy[:, None]), self.trunc)


class ScaledModel(EnergyModel):
    """Multiplies the singleton energies of ``inner`` by ``nu``."""

    def __init__(self, inner, nu):
        if not 0.0 <= nu <= 1.0:
            raise ValueError(f"nu must lie in [0, 1], got {nu}")
        self.inner = inner
        self.nu = float(nu)
        self.label_count = inner.label_count

    def singleton(self, i, a):
        return self.nu * self.inner.singleton(i, a)

    def pairwise(self, i, j, a, b):
        return self.inner.pairwise(i, j, a, b)

    def unary_table(self, graph):
        return self.nu * self.inner.unary_table(graph)

    def pairwise_tables(self, graph):
        return self.inner.pairwise_tables(graph)


class TableModel(EnergyModel):
    """Fully tabulated model: one singleton row per site, one matrix per edge.

    ``pair[e][a, b]`` is the energy of edge ``e = (i, j)``, ``i < j``, with
    ``x_i = a`` and ``x_j = b``.
    """

    def __init__(self, graph, unary, pair):
        unary = np.asarray(unary, dtype=np.float64)
        if unary.ndim != 2 or unary.shape[0] != graph.n_sites:
            raise ValueError("unary table must have shape (N, S)")
        S = unary.shape[1]
        pair = np.asarray(pair, dtype=np.float64).reshape(-1, S, S)
        if len(pair) != graph.n_edges:
            raise ValueError(f"need {graph.n_edges} pairwise tables, got {len(pair)}")
        if not (np.all(np.isfinite(unary)) and np.all(np.isfinite(pair))):
            raise ValueError("energies must be finite")
        self.graph = graph
        self.unary = unary
        self.pair = pair
        self.label_count = S

    def singleton(self, i, a):
        return float(self.unary[i, a])

    def pairwise(self, i, j, a, b):
        e = self.graph.edge_id(i, j)
        return float(self.pair[e, a, b] if i < j else self.pair[e, b, a])

    def unary_table(self, graph):
        return self.unary.copy()

    def pairwise_tables(self, graph):
        return PairwiseTables(
            tables=self.pair.copy(),
            index=np.arange(graph.n_edges, dtype=np.int32),
            scale=np.ones(graph.n_edges),
        )


def make_ising(graph, theta_site, theta_edge):
    return IsingModel(graph, theta_site, theta_edge)


def make_stereo(left, right, S, lam=20.0):
    return StereoPottsModel(left, right, S, lam)


def make_denoise(noisy, S=256, lam=25.0, trunc=100.0):
    return DenoiseModel(noisy, S, lam, trunc)


def scale_singleton(model, nu):
    return ScaledModel(model, nu)
