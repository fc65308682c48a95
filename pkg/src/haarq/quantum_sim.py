"""Exact statevector runs of the single-query Haar and Bernstein-Vazirani algorithms.

Measurements return the exact outcome distribution; sampling is a separate,
seeded step.  States are real since the oracle only applies +-1 phases.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, PromiseViolation
from .oracle_core import Oracle, detect_h_star, lowest_set_bit
from .wavelet import HaarIndex, haar_forward, level_of_positions, unlayout, walsh_hadamard

MAX_SIM_N = int(os.environ.get("HAARQ_MAX_SIM_N", 26))
NORM_TOL = 1e-12


@dataclass
class SimState:
    n: int
    amps: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "SimState":
        return SimState(self.n, self.amps.copy())


@dataclass
class Distribution:
    """Outcome probabilities indexed by position; ``labels`` maps position -> label."""

    probs: np.ndarray
    basis: str  # "haar" or "standard"
    n: int

    def label(self, position: int):
        return unlayout(self.n, position) if self.basis == "haar" else int(position)

    def support(self, tol: float = 1e-15):
        return [(self.label(int(p)), float(self.probs[p])) for p in np.flatnonzero(self.probs > tol)]

    def total(self) -> float:
        return float(self.probs.sum())

    def to_json(self, tol: float = 1e-15) -> list:
        rows = []
        for lab, p in self.support(tol):
            if self.basis == "haar":
                rows.append({"h": lab.h, "l": lab.l, "p": p})
            else:
                rows.append({"k": lab, "p": p})
        return rows


@dataclass
class HaarRun:
    h_out: int | None
    distribution: Distribution
    queries: int
    mass_by_level: np.ndarray = field(repr=False)
    outcome: HaarIndex | None = None

    def mass_on(self, h: int) -> float:
        return float(self.mass_by_level[h])


@dataclass
class BVRun:
    outcome: int
    h_from_k: int | None
    distribution: Distribution
    queries: int


def uniform_state(n: int, max_n: int | None = None) -> SimState:
    cap = MAX_SIM_N if max_n is None else max_n
    if not 1 <= n <= cap:
        raise InvalidParameter(f"n={n} outside 1..{cap}")
    return SimState(n, np.full(1 << n, 2.0 ** (-n / 2)))


def apply_phase_oracle(state: SimState, oracle: Oracle) -> SimState:
    """Multiply amplitude ``i`` by ``(-1)**x_i``; charges one query."""
    if oracle.n != state.n:
        raise InvalidParameter(f"oracle has n={oracle.n}, state has n={state.n}")
    return SimState(state.n, state.amps * oracle.phase_query())


def sample_outcome(distribution: Distribution, seed=None):
    """Inverse-CDF sample of one outcome label."""
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(distribution.probs)
    u = rng.random() * cdf[-1]
    pos = int(np.searchsorted(cdf, u, side="right"))
    if pos >= cdf.size:
        pos = int(np.flatnonzero(distribution.probs)[-1])
    return distribution.label(pos)


def _run_state(oracle: Oracle, max_n: int | None) -> SimState:
    before = oracle.queries
    state = apply_phase_oracle(uniform_state(oracle.n, max_n), oracle)
    assert oracle.queries - before == 1
    return state


def haar_algorithm(oracle: Oracle, seed=None, check_promise: bool = False, max_n: int | None = None) -> HaarRun:
    """Prepare the uniform state, apply one phase query, measure in the Haar basis."""
    if check_promise:
        detect_h_star(oracle.peek_all(), check_unique=True)
    state = _run_state(oracle, max_n)
    probs = haar_forward(state.amps) ** 2
    dist = Distribution(probs, "haar", oracle.n)
    by_level = np.bincount(level_of_positions(oracle.n), weights=probs, minlength=oracle.n + 1)
    outcome = sample_outcome(dist, seed)
    h_out = None if outcome.is_zero else outcome.h
    return HaarRun(h_out, dist, 1, by_level, outcome)


def bv_algorithm(oracle: Oracle, seed=None, max_n: int | None = None) -> BVRun:
    """Same state preparation, measured in the Hadamard basis.

    ``h_from_k`` is the 1-based position of the lowest set bit of the sampled
    outcome, or ``None`` when the outcome is 0.
    """
    state = _run_state(oracle, max_n)
    probs = walsh_hadamard(state.amps) ** 2
    dist = Distribution(probs, "standard", oracle.n)
    k = int(sample_outcome(dist, seed))
    return BVRun(k, lowest_set_bit(k) if k else None, dist, 1)


def bv_h_star(oracle: Oracle, seed=None) -> int:
    """Haar-problem answer via the Hadamard measurement; raises on outcome 0."""
    run = bv_algorithm(oracle, seed)
    if run.h_from_k is None:
        raise PromiseViolation("outcome 0: oracle is constant, h* undefined")
    return run.h_from_k
