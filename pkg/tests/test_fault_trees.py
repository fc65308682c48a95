import itertools

import numpy as np
import pytest

from haarq.errors import InvalidParameter, PromiseViolation
from haarq.fault_trees import (
    eval_batch,
    eval_tree,
    gen_one_fault_per_path,
    gen_one_fault_tree,
    haar_tree_from_instance,
    is_k_fault,
    leftmost_fault_height,
    max_kappa,
    root_kappa,
    root_via_parity,
    verify_one_fault_per_path,
)
from haarq.oracle_core import make_instance


def kappa_by_recursion(leaves):
    """Independent reference: nested-list recursion returning (value, kappa, max_kappa)."""
    if len(leaves) == 1:
        return leaves[0], 0, 0
    half = len(leaves) // 2
    lv, lk, lm = kappa_by_recursion(leaves[:half])
    rv, rk, rm = kappa_by_recursion(leaves[half:])
    value = 0 if lv == rv == 1 else 1
    if lv != rv:
        k = 1 + (lk if lv == 0 else rk)
    else:
        k = max(lk, rk)
    return value, k, max(k, lm, rm)


def walk_paths(tree):
    """Fault heights per leaf, recomputed from leaves without the tree's own arrays."""
    leaves = list(tree.leaves)
    depth = tree.depth
    out = []
    for j in range(len(leaves)):
        heights = []
        for h in range(1, depth + 1):
            start = (j >> h) << h
            block = leaves[start:start + (1 << h)]
            a = kappa_by_recursion(block[: len(block) // 2])[0]
            b = kappa_by_recursion(block[len(block) // 2:])[0]
            if a != b:
                heights.append(h)
        out.append(heights)
    return out


def all_instances(n):
    for h in range(1, n + 1):
        for b in itertools.product((0, 1), repeat=1 << (n - h)):
            yield make_instance(n, h, b)


def test_eval_examples():
    t = eval_tree([0, 1, 1, 1])
    assert list(t.values[2:4]) == [1, 0]
    assert t.root == 1 and t.fault[1] and t.kappa[1] == 1
    assert (max_kappa(t), root_kappa(t)) == (1, 1)
    t = eval_tree([0, 1, 1, 0, 1, 1, 1, 1])
    assert (max_kappa(t), root_kappa(t)) == (2, 2)
    assert not is_k_fault(t, 1)
    t = eval_tree([1, 1])
    assert (t.root, max_kappa(t), root_kappa(t)) == (0, 0, 0)


def test_eval_rejects_bad_input():
    with pytest.raises(InvalidParameter):
        eval_tree([0, 1, 1])
    with pytest.raises(InvalidParameter):
        eval_tree([0, 2])


def test_strict_and_relaxed_differ():
    # root fault whose weak (1-valued) child hides a kappa-2 subtree
    t = eval_tree([1] * 8 + [0, 1, 1, 0, 1, 1, 1, 1])
    assert t.fault[1] and t.values[2] == 0
    assert root_kappa(t) == 1 and max_kappa(t) == 2
    assert is_k_fault(t, 1, strict=False) and not is_k_fault(t, 1)


@pytest.mark.parametrize("depth", [1, 2, 3, 4])
def test_kappa_matches_recursion_exhaustive(depth):
    all_leaves = np.array(list(itertools.product((0, 1), repeat=1 << depth)), dtype=np.uint8)
    roots, maxk, rootk = eval_batch(all_leaves)
    for row, r, m, k in zip(all_leaves, roots, maxk, rootk):
        value, kap, mx = kappa_by_recursion(list(row))
        assert (r, k, m) == (value, kap, mx)


def test_eval_tree_agrees_with_batch():
    rng = np.random.default_rng(0)
    leaves = rng.integers(0, 2, size=(50, 32), dtype=np.uint8)
    roots, maxk, rootk = eval_batch(leaves)
    for row, r, m, k in zip(leaves, roots, maxk, rootk):
        t = eval_tree(row)
        assert t.report() == {"root": r, "max_kappa": m, "root_kappa": k}


def test_fault_implies_value_one_depth4():
    for leaves in itertools.product((0, 1), repeat=16):
        t = eval_tree(leaves)
        assert np.all(t.values[t.fault] == 1)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_haar_tree_root_parity_exhaustive(n):
    for inst in all_instances(n):
        t = haar_tree_from_instance(inst)
        assert t.root == root_via_parity(n, inst.h_star)
        assert max_kappa(t) == 1
        assert verify_one_fault_per_path(t) == [inst.h_star] * (1 << n)


def test_root_via_parity_examples():
    assert root_via_parity(3, 2) == 0
    assert root_via_parity(1, 1) == 1
    assert root_via_parity(4, 2) == 1
    with pytest.raises(InvalidParameter):
        root_via_parity(3, 4)


def test_haar_tree_examples():
    assert haar_tree_from_instance(make_instance(3, 2, [1, 0])).root == 0
    assert haar_tree_from_instance(make_instance(1, 1, [0])).root == 1


def test_generator_examples():
    t = gen_one_fault_per_path(1, 1, seed=0)
    assert list(t.leaves) in ([0, 1], [1, 0])
    t = gen_one_fault_per_path(2, "fixed:1", seed=3)
    assert t.fault[2] and t.fault[3] and t.root == 0
    t = gen_one_fault_per_path(3, "all-odd", seed=1)
    assert set(verify_one_fault_per_path(t)) <= {1, 3}


def test_generator_rejects_impossible_modes():
    with pytest.raises(InvalidParameter):
        gen_one_fault_per_path(1, "all-even")
    with pytest.raises(InvalidParameter):
        gen_one_fault_per_path(3, 4)
    with pytest.raises(InvalidParameter):
        gen_one_fault_per_path(3, "sideways")


@pytest.mark.parametrize("mode", ["all-odd", "all-even", "fixed:2", 3])
def test_generator_passes_independent_verifier(mode):
    allowed = {1, 3, 5, 7} if mode == "all-odd" else {2, 4, 6} if mode == "all-even" else {int(str(mode)[-1])}
    for seed in range(25):
        depth = 3 + seed % 5
        if mode in ("fixed:2", 3) and depth < 3:
            continue
        t = gen_one_fault_per_path(depth, mode, seed=seed)
        for heights in walk_paths(t):
            assert len(heights) == 1 and heights[0] in allowed
        assert max_kappa(t) == 1


def test_generator_mixes_heights():
    seen = set()
    for seed in range(20):
        seen.update(verify_one_fault_per_path(gen_one_fault_per_path(7, "all-odd", seed=seed)))
    assert seen == {1, 3, 5, 7}


def test_generator_deterministic():
    a = gen_one_fault_per_path(6, "all-even", seed=9)
    b = gen_one_fault_per_path(6, "all-even", seed=9)
    assert np.array_equal(a.leaves, b.leaves)


def test_leftmost_fault_height():
    t = gen_one_fault_per_path(5, "all-odd", seed=2)
    assert leftmost_fault_height(t) == verify_one_fault_per_path(t)[0]
    with pytest.raises(PromiseViolation):
        leftmost_fault_height(eval_tree([1, 1, 1, 1]))


def test_verifier_flags_violations():
    with pytest.raises(PromiseViolation):
        verify_one_fault_per_path(eval_tree([1, 1, 0, 1]))
    with pytest.raises(PromiseViolation):
        verify_one_fault_per_path(eval_tree([0, 1, 1, 0]), heights={2})


def test_one_fault_tree_generator_is_strict():
    for seed in range(200):
        t = gen_one_fault_tree(1 + seed % 8, seed=seed, p_fault=0.4)
        assert kappa_by_recursion(list(t.leaves))[2] <= 1


def test_tree_json():
    t = eval_tree([0, 1, 1, 1])
    assert t.to_dict() == {"depth": 2, "leaves": [0, 1, 1, 1]}
    assert t.report() == {"root": 1, "max_kappa": 1, "root_kappa": 1}
    with pytest.raises(ValueError):
        t.values[1] = 0
