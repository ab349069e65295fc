import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treeils.graph import (
    Graph,
    build_grid,
    local_conditional_energy,
    make_labeling,
    neighbors,
    total_energy,
)
from treeils.models import DenoiseModel, IsingModel, TableModel, make_stereo

from conftest import random_table_model


class TestBuildGrid:
    @pytest.mark.parametrize("W,H,n,e", [(1, 1, 1, 0), (2, 2, 4, 4), (3, 2, 6, 7)])
    def test_sizes(self, W, H, n, e):
        g = build_grid(W, H)
        assert (g.n_sites, g.n_edges) == (n, e)

    @pytest.mark.parametrize("W,H", [(0, 3), (3, 0), (0, 0)])
    def test_rejects_empty(self, W, H):
        with pytest.raises(ValueError):
            build_grid(W, H)

    @given(st.integers(1, 9), st.integers(1, 9))
    def test_invariants(self, W, H):
        g = build_grid(W, H)
        assert g.n_edges == W * (H - 1) + H * (W - 1)
        for i in range(g.n_sites):
            c, r = g.coords(i)
            border = (c in (0, W - 1)) + (r in (0, H - 1))
            expected = (c > 0) + (c < W - 1) + (r > 0) + (r < H - 1)
            assert g.degree(i) == expected
            if W > 2 and H > 2:
                assert g.degree(i) == {0: 4, 1: 3, 2: 2}[border]
            for j in g.neighbors(i):
                assert i in g.neighbors(j)

    def test_edges_sorted_right_then_down(self):
        g = build_grid(3, 2)
        assert g.edges.tolist() == [[0, 1], [0, 3], [1, 2], [1, 4], [2, 5], [3, 4], [4, 5]]


class TestNeighbors:
    def test_center_corner_isolated(self):
        g = build_grid(3, 3)
        assert neighbors(g, 4) == [1, 3, 5, 7]  # up, left, right, down
        assert neighbors(g, 0) == [1, 3]
        assert neighbors(build_grid(1, 1), 0) == []

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            neighbors(build_grid(2, 2), 4)


def test_general_graph_rejects_duplicates_and_loops():
    with pytest.raises(ValueError):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Graph(3, [(1, 1)])


class TestTotalEnergy:
    def test_zero_model(self):
        g = build_grid(3, 3)
        m = TableModel(g, np.zeros((9, 3)), np.zeros((g.n_edges, 3, 3)))
        x = np.random.default_rng(0).integers(0, 3, 9)
        assert total_energy(g, m, x) == 0.0

    def test_two_site_ising(self):
        g = build_grid(2, 1)
        m = IsingModel(g, [0.5, -0.5], [1.0])
        # spins (+1, -1): 0.5 + 0.5 - 1
        assert total_energy(g, m, [1, 0]) == 0.0

    def test_uniform_potts(self):
        g = build_grid(2, 2)
        rng = np.random.default_rng(1)
        left = rng.integers(0, 256, (2, 2))
        right = rng.integers(0, 256, (2, 2))
        m = make_stereo(left, right, 4, 20.0)
        x = np.full(4, 2)
        singles = sum(m.singleton(i, 2) for i in range(4))
        assert total_energy(g, m, x) == singles

    def test_size_mismatch(self):
        g = build_grid(2, 2)
        m = IsingModel(g, np.zeros(4), np.zeros(4))
        with pytest.raises(ValueError):
            total_energy(g, m, [0, 1, 0])
        with pytest.raises(ValueError):
            total_energy(g, m, [0, 1, 0, 2])


class TestLocalConditionalEnergy:
    def test_isolated_site(self):
        g = build_grid(1, 1)
        m = DenoiseModel([7], label_count=10, lam=5, trunc=100)
        assert local_conditional_energy(g, m, [0], 0, 3) == m.singleton(0, 3)

    def test_potts_center(self):
        g = build_grid(3, 3)
        m = DenoiseModel(np.arange(9) % 3, label_count=3, lam=1.0, trunc=100)
        x = np.full(9, 1)
        assert local_conditional_energy(g, m, x, 4, 1) == m.singleton(4, 1)
        assert local_conditional_energy(g, m, x, 4, 2) == m.singleton(4, 2) + 4

    def test_does_not_modify(self):
        g = build_grid(3, 3)
        m = random_table_model(g, 3, np.random.default_rng(0))
        x = make_labeling(g, 3, [0] * 9)
        local_conditional_energy(g, m, x, 4, 2)
        assert x.tolist() == [0] * 9

    def test_errors(self):
        g = build_grid(2, 2)
        m = random_table_model(g, 2, np.random.default_rng(0))
        with pytest.raises(IndexError):
            local_conditional_energy(g, m, [0] * 4, 4, 0)
        with pytest.raises(IndexError):
            local_conditional_energy(g, m, [0] * 4, 0, 2)


def _integer_model(g, S, rng):
    return TableModel(g, rng.integers(-9, 10, (g.n_sites, S)).astype(float),
                      rng.integers(-9, 10, (g.n_edges, S, S)).astype(float))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(2, 4), st.integers(0, 2**32 - 1))
def test_delta_energy_consistency(W, H, S, seed):
    rng = np.random.default_rng(seed)
    g = build_grid(W, H)
    m = _integer_model(g, S, rng)  # integer energies keep the identity exact
    x = rng.integers(0, S, g.n_sites)
    i = int(rng.integers(g.n_sites))
    a = int(rng.integers(S))
    y = x.copy()
    y[i] = a
    lhs = total_energy(g, m, y) - total_energy(g, m, x)
    rhs = local_conditional_energy(g, m, x, i, a) - local_conditional_energy(g, m, x, i, x[i])
    assert lhs == rhs


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_energy_independent_of_edge_order_and_orientation(W, H, seed):
    rng = np.random.default_rng(seed)
    g = build_grid(W, H)
    m = _integer_model(g, 3, rng)
    x = rng.integers(0, 3, g.n_sites)
    base = total_energy(g, m, x)
    perm = rng.permutation(g.n_edges)
    flipped = Graph(g.n_sites, g.edges[perm][:, ::-1])
    # the same energies, re-keyed on the shuffled edge list
    pair = np.array([m.pair[g.edge_id(*flipped.edges[e])] for e in range(g.n_edges)]).reshape(-1, 3, 3)
    m2 = TableModel(flipped, m.unary, pair)
    assert total_energy(flipped, m2, x) == base
    assert sum(m.pairwise(int(j), int(i), x[j], x[i]) for i, j in g.edges) + \
        sum(m.singleton(i, x[i]) for i in range(g.n_sites)) == base
