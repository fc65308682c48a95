"""
NAND trees with faults
======================

The same bit string read as tree leaves: faults, kappa, and the root parity.
"""

import numpy as np

from haarq import Oracle, eval_tree, gen_one_fault_per_path, haar_algorithm, haar_tree_from_instance, make_instance
from haarq.fault_trees import max_kappa, root_kappa, root_via_parity, verify_one_fault_per_path

t = eval_tree([0, 1, 1, 1])
print(t.report())  # root fault, kappa 1

t = eval_tree([0, 1, 1, 0, 1, 1, 1, 1])
print("kappa-2 example:", max_kappa(t), root_kappa(t))

# every Haar oracle is a tree whose faults all sit at height h*
for h in (1, 2, 3):
    inst = make_instance(3, h, [1] * (1 << (3 - h)))
    tree = haar_tree_from_instance(inst)
    print(f"h*={h}: root {tree.root}, parity rule {root_via_parity(3, h)}")

# %%
# Faults on mixed levels of one parity: the Haar measurement still only sees that parity.
tree = gen_one_fault_per_path(7, "all-odd", seed=4)
heights = verify_one_fault_per_path(tree)
print("fault heights used:", sorted(set(heights)))
run = haar_algorithm(Oracle(7, tree.leaves), seed=0)
print("mass by scale:", np.round(run.mass_by_level, 3))
