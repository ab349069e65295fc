import itertools

import numpy as np
import pytest

from treeils.graph import Graph, build_grid, total_energy
from treeils.inference import loopy_bp, scanline, track_messages, tree_bp_map
from treeils.ising import generate_ising
from treeils.models import TableModel, make_denoise, make_stereo, scale_singleton
from treeils.oracle import brute_force_map
from treeils.search import ticm
from treeils.trees import ConditionalTree, absorb, conditional_tree_energy, row_column_schedule

from conftest import enumerate_min, random_table_model, random_tree_graph


def _chain(m, S, unary, lam):
    g = build_grid(m, 1)
    model = TableModel(g, unary, np.array([lam * (1 - np.eye(S))] * (m - 1)))
    tree = ConditionalTree.from_chains(g, [range(m)])
    return g, model, tree


class TestTreeBP:
    def test_single_site(self, backend):
        g = Graph(1, [])
        m = TableModel(g, [[2.0, 0.0, 1.0]], np.zeros((0, 3, 3)))
        tree = ConditionalTree(g, [0], [-1])
        assert tree_bp_map(tree, m.unary, m).tolist() == [1]

    def test_three_chain(self, backend):
        unary = np.array([[0, 1], [1, 0], [0, 1]], dtype=float)
        g, m, tree = _chain(3, 2, unary, 2.0)
        x = tree_bp_map(tree, unary, m)
        assert x.tolist() == [0, 0, 0]
        assert conditional_tree_energy(tree, unary, m, x) == 1.0
        oracle_x, oracle_e = enumerate_min(g, m)
        assert oracle_x.tolist() == [0, 0, 0] and oracle_e == 1.0

    def test_all_zero_ties_to_lowest(self, backend):
        g = build_grid(4, 3)
        m = TableModel(g, np.zeros((12, 3)), np.zeros((g.n_edges, 3, 3)))
        from treeils.trees import comb_schedule
        for tree in row_column_schedule(g) + comb_schedule(g):
            ab = absorb(g, m, tree, np.zeros(12, dtype=int))
            assert np.all(tree_bp_map(tree, ab, m) == 0)

    def test_ties_decode_jointly(self, backend):
        # two optima (0, 1) and (1, 0); per-site decoding would mix them
        g = build_grid(2, 1)
        m = TableModel(g, np.zeros((2, 2)), [[[1.0, 0.0], [0.0, 1.0]]])
        tree = ConditionalTree.from_chains(g, [[0, 1]])
        x = tree_bp_map(tree, m.unary, m)
        assert total_energy(g, m, x) == 0.0

    def test_random_trees_match_enumeration(self, backend):
        rng = np.random.default_rng(11)
        for _ in range(60):
            m_sites = int(rng.integers(1, 8))
            S = int(rng.integers(1, 4))
            g, sites, parent = random_tree_graph(m_sites, rng)
            model = random_table_model(g, S, rng)
            tree = ConditionalTree(g, sites, parent)
            x = np.empty(m_sites, dtype=int)
            x[tree.sites] = tree_bp_map(tree, model.unary[tree.sites], model)
            _, best = enumerate_min(g, model)
            assert total_energy(g, model, x) == pytest.approx(best, abs=1e-12)

    def test_conditional_trees_in_grid(self, backend):
        """Absorbed row/comb trees: BP equals enumeration over member labels."""
        from treeils.trees import comb_schedule
        rng = np.random.default_rng(5)
        g = build_grid(4, 3)
        model = random_table_model(g, 2, rng)
        x = rng.integers(0, 2, 12)
        for tree in row_column_schedule(g) + comb_schedule(g):
            ab = absorb(g, model, tree, x)
            best = min(conditional_tree_energy(tree, ab, model, np.array(xt))
                       for xt in itertools.product(range(2), repeat=tree.size))
            got = tree_bp_map(tree, ab, model)
            assert conditional_tree_energy(tree, ab, model, got) == pytest.approx(best, abs=1e-12)

    def test_normalization_does_not_change_result(self, backend):
        rng = np.random.default_rng(8)
        for _ in range(50):
            g, sites, parent = random_tree_graph(int(rng.integers(2, 9)), rng)
            model = random_table_model(g, 3, rng, -5, 5)
            tree = ConditionalTree(g, sites, parent)
            ab = model.unary[tree.sites]
            a = tree_bp_map(tree, ab, model, normalize=True)
            b = tree_bp_map(tree, ab, model, normalize=False)
            assert conditional_tree_energy(tree, ab, model, a) == pytest.approx(
                conditional_tree_energy(tree, ab, model, b), abs=1e-12)

    @pytest.mark.parametrize("m_sites", [1, 2, 7, 10])
    def test_operation_count(self, backend, m_sites):
        rng = np.random.default_rng(m_sites)
        g, sites, parent = random_tree_graph(m_sites, rng)
        model = random_table_model(g, 3, rng)
        tree = ConditionalTree(g, sites, parent)
        with track_messages() as stats:
            tree_bp_map(tree, model.unary[tree.sites], model)
        assert stats.computed == 2 * (m_sites - 1)
        assert stats.peak == 2 * (m_sites - 1) * 3
        assert stats.live == 0

    def test_potts_fast_path_matches_generic(self, backend):
        rng = np.random.default_rng(9)
        g = build_grid(9, 1)
        potts = make_denoise(rng.integers(0, 12, 9), 12, lam=3.0, trunc=5.0)
        generic = TableModel(g, potts.unary_table(g), np.array([3.0 * (1 - np.eye(12))] * 8))
        tree = ConditionalTree.from_chains(g, [range(9)])
        ab = potts.unary_table(g)
        assert np.array_equal(tree_bp_map(tree, ab, potts), tree_bp_map(tree, ab, generic))


class TestLoopyBP:
    def test_exact_on_chain(self, backend):
        rng = np.random.default_rng(1)
        for _ in range(10):
            g = build_grid(7, 1)
            model = random_table_model(g, 3, rng)
            res = loopy_bp(g, model)
            tree = ConditionalTree.from_chains(g, [range(7)])
            x = tree_bp_map(tree, model.unary, model)
            assert res.converged
            assert total_energy(g, model, res.labels) == total_energy(g, model, x)

    def test_weak_coupling_2x2(self, backend):
        rng = np.random.default_rng(2024)
        hits = 0
        for _ in range(100):
            g = build_grid(2, 2)
            model = TableModel(g, rng.uniform(-1, 1, (4, 2)), rng.uniform(-0.2, 0.2, (4, 2, 2)))
            res = loopy_bp(g, model)
            _, best = enumerate_min(g, model)
            hits += total_energy(g, model, res.labels) == pytest.approx(best, abs=1e-12)
        assert hits >= 95

    def test_iteration_contract(self, backend):
        g, m = generate_ising(4, 4, 1.0, 0)
        with pytest.raises(ValueError):
            loopy_bp(g, m, max_iters=0)
        res = loopy_bp(g, m, max_iters=1, tol=0.0)
        assert res.iterations == 1 and not res.converged

    def test_potts_fast_path_matches_generic(self, backend):
        rng = np.random.default_rng(3)
        g = build_grid(5, 4)
        left, right = rng.integers(0, 256, (2, 4, 5))
        potts = make_stereo(left, right, 4, 20.0)
        generic = TableModel(g, potts.unary_table(g), np.array([20.0 * (1 - np.eye(4))] * g.n_edges))
        a = loopy_bp(g, potts, max_iters=30)
        b = loopy_bp(g, generic, max_iters=30)
        assert np.array_equal(a.labels, b.labels) and a.max_change == b.max_change

    def test_records_energies(self):
        g, m = generate_ising(5, 5, 0.5, 1)
        res = loopy_bp(g, m, max_iters=5, tol=0.0, record=True)
        assert len(res.energies) == 5
        assert res.energies[-1] == total_energy(g, m, res.labels)


class TestScanline:
    def test_single_row_is_exact(self, backend):
        rng = np.random.default_rng(4)
        g = build_grid(8, 1)
        m = make_stereo(rng.integers(0, 256, (1, 8)), rng.integers(0, 256, (1, 8)), 3, 20)
        _, best = brute_force_map(g, m)
        assert total_energy(g, m, scanline(g, m, 1.0)) == best

    def test_rows_independent(self, backend):
        rng = np.random.default_rng(5)
        g = build_grid(4, 3)
        left, right = rng.integers(0, 60, (2, 3, 4))
        m = make_stereo(left, right, 3, 20)
        nu = 0.4
        x = scanline(g, m, nu).reshape(3, 4)
        for r in range(3):
            rg = build_grid(4, 1)
            row_model = scale_singleton(make_stereo(left[r:r + 1], right[r:r + 1], 3, 20), nu)
            _, best = enumerate_min(rg, row_model)
            assert total_energy(rg, row_model, x[r]) == pytest.approx(best, abs=1e-9)

    def test_nu_zero_gives_flat_rows(self):
        rng = np.random.default_rng(6)
        g = build_grid(5, 2)
        m = make_stereo(rng.integers(0, 256, (2, 5)), rng.integers(0, 256, (2, 5)), 4, 20)
        assert np.all(scanline(g, m, 0.0) == 0)


class TestMemory:
    def test_row_column_sweep_peak(self, backend):
        g, m = generate_ising(12, 7, 1.0, 0)
        with track_messages() as stats:
            ticm(g, m, row_column_schedule(g), np.zeros(g.n_sites, dtype=int), max_sweeps=1)
        assert stats.peak == 2 * (12 - 1) * 2
        assert stats.live == 0

    def test_loopy_table(self, backend):
        g, m = generate_ising(12, 7, 1.0, 0)
        with track_messages() as stats:
            loopy_bp(g, m, max_iters=3)
        assert stats.allocated == 2 * g.n_edges * 2 == stats.peak
