"""
One query, one scale
====================

Build a promise oracle, hit the uniform state with a single phase query,
and look at where the Haar-basis mass lands.
"""

import numpy as np

from haarq import expand, haar_algorithm, make_instance, bv_algorithm
from haarq.wavelet import haar_forward

# the 8-bit oracle with blocks of size 4: b = (1, 0)
inst = make_instance(3, 2, [1, 0])
oracle = expand(inst)
print("bits:", "".join(map(str, oracle.peek_all())))

# the phase state is just (-1)**x / sqrt(8)
xi = (-1.0) ** oracle.peek_all() / np.sqrt(8)
print("phases:", np.round(xi * np.sqrt(8)).astype(int))
print("haar coefficients:", np.round(haar_forward(xi), 4))

run = haar_algorithm(oracle, seed=1)
for label, p in run.distribution.support(1e-12):
    print(f"  {label}: {p:.3f}")
print("h_out =", run.h_out, "queries =", oracle.queries)

# %%
# Same oracle measured in the Hadamard basis: the outcome's lowest set bit is h*.
oracle = expand(inst)
bv = bv_algorithm(oracle, seed=1)
print("bv outcome", bv.outcome, f"({bv.outcome:03b}) -> h =", bv.h_from_k)

# %%
# A bigger random instance, still one query.
rng = np.random.default_rng(0)
b = rng.integers(0, 2, size=2 ** (12 - 5))
big = expand(make_instance(12, 5, b))
run = haar_algorithm(big, seed=2)
print("n=12 mass per scale:", np.round(run.mass_by_level, 12))
