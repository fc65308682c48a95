"""Classical query algorithms for the Haar Problem and fault trees.

Every algorithm talks to an :class:`~haarq.oracle_core.Oracle` and reports
the number of queries it spent, read off the oracle counter.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from functools import lru_cache
from itertools import product

import numpy as np

from .errors import InvalidParameter
from .oracle_core import MASK64, Oracle, instance_bits, lazy_oracle, make_instance, mix64


@dataclass
class RunReport:
    answer: int
    queries: int
    seed: int | None = None
    correct: bool | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def ceil_log2(x: float) -> int:
    return max(0, math.ceil(math.log2(x)))


def samples_per_step(n: int, c: float) -> int:
    """``ceil(log2(c * ceil(log2 n)))`` random queries per binary-search step."""
    if n < 2:
        return 0
    return ceil_log2(c * ceil_log2(n))


def search_query_bound(n: int, c: float) -> int:
    return ceil_log2(n) * samples_per_step(n, c) if n >= 2 else 0


def _prefix_looks_mixed(oracle: Oracle, h: int, m: int, rng: np.random.Generator) -> bool:
    # top h bits of a uniform 64-bit word: uniform index in [0, 2**h), with replacement
    raw = rng.bit_generator.random_raw(m)
    seen = {oracle.query(int(r) >> (64 - h)) for r in raw}
    return len(seen) > 1


def binary_search_h(oracle: Oracle, c: float = 10, seed=None) -> RunReport:
    """Randomised binary search for the smallest ``h`` whose prefix ``[0, 2**h)`` is mixed.

    A probe samples ``samples_per_step(n, c)`` indices of the prefix and calls
    it constant iff all sampled bits agree.  A mixed prefix is misread as
    constant with probability ``2 * 0.5**m`` per probe.
    """
    if c < 2:
        raise InvalidParameter("c must be at least 2")
    rng = np.random.default_rng(seed)
    start = oracle.queries
    m = samples_per_step(oracle.n, c)
    lo, hi = 1, oracle.n
    while lo < hi:
        mid = (lo + hi) // 2
        if _prefix_looks_mixed(oracle, mid, m, rng):
            hi = mid
        else:
            lo = mid + 1
    return RunReport(lo, oracle.queries - start, seed)


def classical_tree_eval(leaf_oracle: Oracle, c: float = 10, seed=None) -> RunReport:
    """Root of a one-fault-per-path NAND tree from the height of its leftmost fault."""
    found = binary_search_h(leaf_oracle, c, seed)
    n = leaf_oracle.n
    return RunReport((n - found.answer + 1) % 2, found.queries, seed)


def majority_sample_size(epsilon: float, delta: float) -> int:
    """Hoeffding sample count for the leaf-majority vote.

    A zero/one ratio outside ``(1 - epsilon, 1 + epsilon)`` puts the fraction
    of ones at least ``t = epsilon / (2 (2 + epsilon))`` away from 1/2, so
    ``m >= ln(1/delta) / (2 t**2)`` samples misjudge the majority with
    probability at most ``delta``.  Rounded up to an odd number.
    """
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise InvalidParameter("need 0 < epsilon < 1 and 0 < delta < 1")
    t = epsilon / (2 * (2 + epsilon))
    m = math.ceil(math.log(1 / delta) / (2 * t * t))
    return m if m % 2 else m + 1


def majority_eval(leaf_oracle: Oracle, epsilon: float = 0.5, delta: float = 0.01, seed=None) -> RunReport:
    """Evaluate a 1-fault NAND tree from the majority leaf value.

    Even depth trees take the majority value, odd depth trees its negation.
    """
    rng = np.random.default_rng(seed)
    start = leaf_oracle.queries
    m = majority_sample_size(epsilon, delta)
    depth = leaf_oracle.n
    raw = rng.bit_generator.random_raw(m)
    ones = sum(leaf_oracle.query(int(r) >> (64 - depth)) for r in raw)
    g = int(2 * ones > m)
    return RunReport(g if depth % 2 == 0 else 1 - g, leaf_oracle.queries - start, seed)


# -- exact deterministic complexity --------------------------------------------

BRUTE_FORCE_MAX_N = 3


def promise_oracles(n: int):
    """All Haar-promise bit vectors for ``n`` with their ``h*``."""
    rows, hs = [], []
    for h in range(1, n + 1):
        for b in product((0, 1), repeat=1 << (n - h)):
            rows.append(instance_bits(make_instance(n, h, b)))
            hs.append(h)
    return np.array(rows, dtype=np.uint8), np.array(hs)


def exact_det_query_complexity(n: int) -> int:
    """Minimax depth of the best deterministic adaptive strategy that outputs ``h*``.

    Exhaustive game-tree search; a knowledge state is the set of promise
    oracles consistent with the answers seen so far.
    """
    if not 1 <= n <= BRUTE_FORCE_MAX_N:
        raise InvalidParameter(f"brute force only supports 1 <= n <= {BRUTE_FORCE_MAX_N}")
    bits, hs = promise_oracles(n)
    positions = range(1 << n)

    @lru_cache(maxsize=None)
    def depth(alive: frozenset) -> int:
        idx = sorted(alive)
        if len(set(hs[idx])) <= 1:
            return 0
        best = math.inf
        for i in positions:
            col = bits[idx, i]
            if col.min() == col.max():
                continue
            zero = frozenset(k for k, v in zip(idx, col) if v == 0)
            one = alive - zero
            best = min(best, 1 + max(depth(zero), depth(one)))
        return best

    return int(depth(frozenset(range(len(hs)))))


# -- batch harness --------------------------------------------------------------

def trial_seed(base_seed: int, t: int) -> int:
    return mix64((base_seed + t) & MASK64)


def _one_search_trial(args) -> dict:
    n, c, seed = args
    h_star = 1 + seed % n
    oracle = lazy_oracle(n, h_star, seed)
    rep = binary_search_h(oracle, c, seed=mix64(seed))
    return {"seed": seed, "answer": rep.answer, "correct": rep.answer == h_star, "queries": rep.queries}


def search_batch(n: int, c: float, trials: int, seed: int = 0, jobs: int = 1) -> list[dict]:
    """Run ``trials`` independent searches on lazy oracles with ``h*`` drawn per trial."""
    tasks = [(n, c, trial_seed(seed, t)) for t in range(trials)]
    if jobs <= 1:
        return [_one_search_trial(a) for a in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_one_search_trial, tasks, chunksize=max(1, trials // (4 * jobs))))
