"""Random Ising benchmark instances."""

import numpy as np

from .graph import build_grid
from .models import IsingModel


def generate_ising(width, height, lam, seed):
    """Grid Ising model with U(-1, 1) fields and lam * U(-1, 1) couplings.

    Fields are drawn first (sites ascending), then couplings (edges
    ascending), from one PCG64 stream seeded with ``seed``.
    """
    if not lam > 0:
        raise ValueError("coupling strength must be positive")
    graph = build_grid(width, height)
    rng = np.random.default_rng(seed)
    theta_site = rng.uniform(-1.0, 1.0, graph.n_sites)
    theta_edge = lam * rng.uniform(-1.0, 1.0, graph.n_edges)
    return graph, IsingModel(graph, theta_site, theta_edge)
