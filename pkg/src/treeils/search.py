"""Local and iterated local search over labelings.

``icm`` moves one site at a time, ``ticm`` one conditional tree at a time,
and ``tils`` wraps ``ticm`` in perturb / re-optimise / accept-or-backtrack
iterations with an inverse temperature tuned towards a 0.5 acceptance rate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import _backend
from .graph import LABEL_DTYPE, check_labeling, random_labeling
from .inference import _tree_bp
from .problem import compile_problem
from .trace import RunTrace
from .trees import _absorb, _tree_energy


def icm(graph, model, init, max_sweeps=1000, on_sweep=None):
    """Iterated conditional modes in site order.

    A site only changes label when another label is strictly better, taking
    the lowest such label. Stops after a sweep without changes.
    """
    problem = compile_problem(graph, model)
    x = _copy_labels(graph, model, init)
    cost = np.empty(problem.label_count)
    for _ in range(max_sweeps):
        changes = _backend.kernels.icm_sweep(problem.unary, *problem.adjacency,
                                             *problem.pairwise, x, cost)
        if on_sweep is not None:
            on_sweep(x)
        if changes == 0:
            break
    return x


def ticm(graph, model, schedule, init, max_sweeps=1000, rng=None, on_update=None):
    """Tree-based ICM: absorb, solve the tree exactly, write back.

    One sweep visits every tree of ``schedule`` once, in order, or in a fresh
    random order per sweep when ``rng`` is given. A tree's labels are
    replaced only when the solution strictly lowers its conditional energy,
    so the total energy never increases. Stops after a sweep without
    changes or after ``max_sweeps`` sweeps.

    ``on_update(tree, x)`` is called after every tree visit.
    """
    problem = compile_problem(graph, model)
    x = _copy_labels(graph, model, init)
    _ticm(problem, schedule, x, max_sweeps, rng, on_update)
    return x


def _ticm(problem, schedule, x, max_sweeps, rng=None, on_update=None):
    """In-place T-ICM on ``x``; returns the number of sweeps run."""
    for sweep in range(1, max_sweeps + 1):
        order = rng.permutation(len(schedule)) if rng is not None else range(len(schedule))
        changes = 0
        for t in order:
            tree = schedule[t]
            absorbed = _absorb(problem, tree, x)
            proposal = _tree_bp(problem, tree, absorbed)
            current = x[tree.sites]
            if not np.array_equal(proposal, current) and (
                _tree_energy(problem, tree, absorbed, proposal)
                < _tree_energy(problem, tree, absorbed, current)
            ):
                x[tree.sites] = proposal
                changes += 1
            if on_update is not None:
                on_update(tree, x)
        if changes == 0:
            return sweep
    return max_sweeps


def _copy_labels(graph, model, init):
    x = np.array(init, dtype=LABEL_DTYPE).reshape(-1)
    check_labeling(graph, model.label_count, x)
    return x


def perturb(x, rho_max, rng, label_count):
    """Copy of ``x`` with ``ceil(rho/100 * N)`` random sites relabelled.

    ``rho`` is drawn from U(0, rho_max). New labels are uniform over all
    labels and may repeat the old one.
    """
    if not 0 <= rho_max < 100:
        raise ValueError("rho_max must lie in [0, 100)")
    y = np.array(x, dtype=LABEL_DTYPE)
    rho = rng.uniform(0.0, rho_max)
    count = math.ceil(rho / 100.0 * len(y))
    sites = rng.choice(len(y), size=count, replace=False)
    y[sites] = rng.integers(0, label_count, size=count)
    return y


def acceptance_probability(delta_e, beta):
    if delta_e <= 0:
        return 1.0
    return math.exp(-beta * delta_e)


def accept(delta_e, beta, rng):
    """Metropolis-style test; always consumes exactly one uniform draw."""
    return rng.random() < acceptance_probability(delta_e, beta)


@dataclass
class IlsConfig:
    rho_max: float = 10.0  # percent of sites, upper bound of the jump size
    t_outer: int = 1000
    t_inner: int = 1  # T-ICM sweeps per local search
    max_backtracks: int = 50  # consecutive rejected jumps before stopping
    beta0: float = 1.0
    seed: int | np.random.SeedSequence = 0
    time_limit: float | None = None  # seconds; breaks bit-for-bit determinism

    def __post_init__(self):
        if not 0 <= self.rho_max < 100:
            raise ValueError("rho_max must lie in [0, 100)")
        if min(self.t_outer, self.t_inner, self.max_backtracks) < 1:
            raise ValueError("iteration and backtrack counts must be at least 1")
        if not self.beta0 > 0:
            raise ValueError("beta0 must be positive")


@dataclass
class IlsState:
    current: np.ndarray
    current_energy: float
    beta: float
    rng: np.random.Generator
    accepted_count: int = 0  # n
    step: int = 0  # t
    rate: float = 0.0  # r
    consecutive_backtracks: int = 0


def adjust_beta(state, accepted_last):
    """Update the acceptance statistics and nudge beta toward a 0.5 rate."""
    if state.step < 1:
        raise ValueError("adjust_beta needs step >= 1")
    state.accepted_count += int(accepted_last)
    state.rate = 0.9 * state.accepted_count / state.step + 0.1 * float(accepted_last)
    if state.rate < 0.45:
        state.beta *= 0.8
    elif state.rate > 0.55:
        state.beta /= 0.8
    return state.beta, state.rate


@dataclass
class IlsResult:
    labels: np.ndarray  # best labeling seen
    energy: float
    trace: RunTrace
    state: IlsState


def tils(graph, model, schedule, config=None, init=None):
    """Tree-based iterated local search.

    Starts from ``init`` (random when omitted), descends with T-ICM, then
    repeatedly jumps, re-descends and accepts or backtracks. Returns the
    best labeling ever seen together with a per-iteration trace whose
    energy column holds the best energy so far.
    """
    config = config or IlsConfig()
    problem = compile_problem(graph, model)
    S = problem.label_count
    seed = config.seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    rng = np.random.default_rng(seed)
    if init is None:
        x = random_labeling(graph, S, rng)
    else:
        x = _copy_labels(graph, model, init)

    start = time.perf_counter()
    _ticm(problem, schedule, x, config.t_inner)
    energy = problem.energy(x)
    state = IlsState(current=x, current_energy=energy, beta=config.beta0, rng=rng)
    best, best_energy = x.copy(), energy
    trace = RunTrace()
    trace.append(0, _ms(start), best_energy, True, state.beta)

    for t in range(1, config.t_outer + 1):
        if config.time_limit is not None and time.perf_counter() - start >= config.time_limit:
            break
        candidate = perturb(state.current, config.rho_max, rng, S)
        _ticm(problem, schedule, candidate, config.t_inner)
        cand_energy = problem.energy(candidate)
        accepted = accept(cand_energy - state.current_energy, state.beta, rng)
        if accepted:
            state.current, state.current_energy = candidate, cand_energy
            state.consecutive_backtracks = 0
            if cand_energy < best_energy:
                best, best_energy = candidate.copy(), cand_energy
        else:
            state.consecutive_backtracks += 1
        state.step = t
        adjust_beta(state, accepted)
        trace.append(t, _ms(start), best_energy, accepted, state.beta)
        if state.consecutive_backtracks >= config.max_backtracks:
            break
    return IlsResult(labels=best, energy=best_energy, trace=trace, state=state)


def _ms(start):
    return 1e3 * (time.perf_counter() - start)
