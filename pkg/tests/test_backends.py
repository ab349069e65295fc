"""The compiled kernels and the NumPy fallback must agree bit for bit."""

import numpy as np
import pytest

from treeils import _backend, _fallback
from treeils.graph import build_grid
from treeils.ising import generate_ising
from treeils.models import make_denoise, make_stereo
from treeils.problem import Problem
from treeils.trees import comb_schedule, row_column_schedule

from conftest import random_table_model

compiled = _backend.BACKENDS.get("compiled")
pytestmark = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


def _problems():
    rng = np.random.default_rng(0)
    g = build_grid(7, 5)
    yield g, Problem(g, random_table_model(g, 4, rng))
    g, m = generate_ising(6, 6, 1.0, 1)
    yield g, Problem(g, m)
    g = build_grid(6, 4)
    left, right = rng.integers(0, 256, (2, 4, 6))
    yield g, Problem(g, make_stereo(left, right, 5, 20.0))
    yield g, Problem(g, make_denoise(rng.integers(0, 256, (4, 6)), 8, 25.0, 100.0))


PROBLEMS = list(_problems())


@pytest.fixture(params=range(len(PROBLEMS)), ids=["table", "ising", "stereo", "denoise"])
def case(request):
    return PROBLEMS[request.param]


def _labels(p, seed):
    return np.random.default_rng(seed).integers(0, p.label_count, p.n_sites).astype(np.int32)


def test_energy(case):
    g, p = case
    for seed in range(5):
        x = _labels(p, seed)
        args = (p.unary, p.edges, *p.pairwise, x)
        assert compiled.energy(*args) == _fallback.energy(*args)


def test_absorb_and_tree_energy(case):
    g, p = case
    x = _labels(p, 1)
    for tree in row_column_schedule(g) + comb_schedule(g):
        outs = []
        for k in (compiled, _fallback):
            out = np.empty((tree.size, p.label_count))
            k.absorb(p.unary, *p.adjacency, *p.pairwise, tree.in_tree, x, tree.sites, out)
            outs.append(out)
        assert np.array_equal(*outs)
        xt = x[tree.sites].copy()
        e = [k.tree_energy(outs[0], tree.parent, tree.pedge, tree.pflip, *p.pairwise, xt)
             for k in (compiled, _fallback)]
        assert e[0] == e[1]


@pytest.mark.parametrize("normalize", [True, False])
def test_tree_bp(case, normalize):
    g, p = case
    x = _labels(p, 2)
    for tree in row_column_schedule(g) + comb_schedule(g):
        absorbed = np.empty((tree.size, p.label_count))
        _fallback.absorb(p.unary, *p.adjacency, *p.pairwise, tree.in_tree, x, tree.sites, absorbed)
        results = []
        for k in (compiled, _fallback):
            h = absorbed.copy()
            up = np.empty((tree.size - 1, p.label_count))
            down = np.empty_like(up)
            out = np.empty(tree.size, dtype=np.int32)
            n = k.tree_bp(h, tree.parent, tree.pedge, tree.pflip, *p.pairwise, p.potts,
                          up, down, normalize, out)
            results.append((n, h, up, down, out))
        (n1, h1, u1, d1, o1), (n2, h2, u2, d2, o2) = results
        assert n1 == n2 == 2 * (tree.size - 1)
        for a, b in [(h1, h2), (u1, u2), (d1, d2), (o1, o2)]:
            assert np.array_equal(a, b)


def test_icm_sweep(case):
    g, p = case
    for seed in range(3):
        xs = [_labels(p, seed), _labels(p, seed)]
        changes = [k.icm_sweep(p.unary, *p.adjacency, *p.pairwise, x, np.empty(p.label_count))
                   for k, x in zip((compiled, _fallback), xs)]
        assert changes[0] == changes[1]
        assert np.array_equal(*xs)


@pytest.mark.parametrize("normalize", [True, False])
def test_loopy_sweeps(case, normalize):
    g, p = case
    state = []
    for k in (compiled, _fallback):
        msgs = np.zeros((2 * len(p.edges), p.label_count))
        belief = np.empty((p.n_sites, p.label_count))
        changes = [k.loopy_sweep(p.unary, *p.adjacency, *p.pairwise, p.potts, msgs, belief,
                                 np.empty((2, p.label_count)), normalize) for _ in range(15)]
        k.beliefs(p.unary, *p.adjacency, msgs, belief)
        state.append((changes, msgs, belief))
    assert state[0][0] == state[1][0]
    assert np.array_equal(state[0][1], state[1][1])
    assert np.array_equal(state[0][2], state[1][2])


def test_brute_force():
    rng = np.random.default_rng(3)
    for W, H, S in [(3, 3, 2), (2, 3, 3), (4, 4, 2), (5, 1, 4)]:
        g = build_grid(W, H)
        p = Problem(g, random_table_model(g, S, rng))
        r1 = compiled.brute_force(p.unary, *p.adjacency, *p.pairwise, 1e-9)
        r2 = _fallback.brute_force(p.unary, *p.adjacency, *p.pairwise, 1e-9)
        assert r1[0] == r2[0]
        assert sorted(map(tuple, r1[1])) == sorted(map(tuple, r2[1]))


def test_use_switches_and_restores():
    previous = _backend.use("python")
    try:
        assert _backend.kernels is _fallback
        with pytest.raises(ValueError):
            _backend.use("fortran")
    finally:
        _backend.use(previous)
