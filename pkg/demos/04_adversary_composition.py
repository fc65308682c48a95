"""
Adversary dual points and composition
=====================================

Solve the dual SDP for NAND, then glue two solutions into a certified point
for NAND o NAND and compare with a direct solve.
"""

import numpy as np

from haarq.adversary import check_feasible, compose_dual, compose_function, identity_fn, nand_fn, solve_adv

print("identity:", solve_adv(identity_fn(), seed=0).value)

nand = solve_adv(nand_fn(), seed=0)
inner = solve_adv(nand_fn(), seed=0, balanced=True)
print(f"NAND: {nand.value:.6f} (sqrt 2 = {np.sqrt(2):.6f}), residual {nand.residual:.1e}")

res = compose_dual(nand.point, inner.point, nand_fn(), nand_fn())
rep = check_feasible(res.fn, res.point, tol=1e-6)
print(f"composed point: objective {res.objective:.6f}, trace {res.trace:.6f}, "
      f"c {res.c:.4f}, min eig {rep.min_eig:.1e}")

# %%
# Partial outer function: NAND seen only on {01, 10, 11}.
f = nand_fn().restrict([(0, 1), (1, 0), (1, 1)])
fp = solve_adv(f, seed=0)
res = compose_dual(fp.point, inner.point, f, nand_fn())
print(f"partial outer: d_f {fp.value:.4f}, composed domain {res.fn.size}, objective {res.objective:.6f}")

# %%
# Direct solve of the 16-input composition (takes a few seconds).
direct = solve_adv(compose_function(nand_fn(), nand_fn()), seed=0)
print(f"NAND o NAND direct: {direct.value:.6f} >= {nand.value ** 2:.6f}")
