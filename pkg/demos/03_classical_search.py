"""
Classical baselines
===================

Randomised binary search for h*, its query budget, the majority trick on
1-fault trees, and the exact deterministic cost on tiny inputs.
"""

import numpy as np

from haarq.classical_algs import (
    exact_det_query_complexity,
    majority_eval,
    majority_sample_size,
    search_batch,
    search_query_bound,
)
from haarq.fault_trees import gen_one_fault_tree
from haarq.oracle_core import Oracle

rows = search_batch(64, 10, 1000, seed=7)
errors = sum(not r["correct"] for r in rows)
queries = np.array([r["queries"] for r in rows])
print(f"n=64, c=10: error rate {errors / len(rows):.3f}, queries max {queries.max()} "
      f"(bound {search_query_bound(64, 10)})")

for c in (2, 4, 10, 40):
    rows = search_batch(64, c, 1000, seed=7)
    print(f"  c={c:>2}: error {sum(not r['correct'] for r in rows) / 1000:.3f}, "
          f"queries {rows[0]['queries']}")

# %%
m = majority_sample_size(0.5, 0.01)
tree = gen_one_fault_tree(12, seed=3, p_fault=0.3)
rep = majority_eval(Oracle(12, tree.leaves), 0.5, 0.01, seed=3)
print(f"majority on 4096 leaves: {rep.answer} (true {tree.root}) with {rep.queries} = {m} queries")

# %%
for n in (1, 2, 3):
    print(f"deterministic query complexity, n={n}:", exact_det_query_complexity(n))
