"""Complete binary NAND trees with per-node fault indices.

Nodes are stored heap-ordered: the root is index 1, node ``v`` has children
``2v`` and ``2v + 1``, and the leaves occupy ``2**depth .. 2**(depth+1) - 1``
left to right, so leaf ``j`` is oracle index ``j``.  Index 0 is unused.

A node is a *fault* when its children differ.  ``kappa`` is 0 at leaves, the
max over children at non-fault nodes, and one plus the kappa of the 0-valued
child at faults (for NAND the 0-valued child is the strong one).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, PromiseViolation
from .oracle_core import HaarInstance, instance_bits


@dataclass(frozen=True, eq=False)
class EvaluatedTree:
    depth: int
    leaves: np.ndarray
    values: np.ndarray
    kappa: np.ndarray
    fault: np.ndarray

    @property
    def root(self) -> int:
        return int(self.values[1])

    def height(self, v: int) -> int:
        return self.depth - (int(v).bit_length() - 1)

    def fault_nodes(self) -> np.ndarray:
        return np.flatnonzero(self.fault)

    def to_dict(self) -> dict:
        return {"depth": self.depth, "leaves": [int(x) for x in self.leaves]}

    def report(self) -> dict:
        return {"root": self.root, "max_kappa": max_kappa(self), "root_kappa": root_kappa(self)}


def _depth_of(length: int) -> int:
    if length < 1 or length & (length - 1):
        raise InvalidParameter(f"number of leaves ({length}) is not a power of two")
    return length.bit_length() - 1


def _combine(vals: np.ndarray, kap: np.ndarray):
    """One NAND level along the last axis: children pairs -> parents."""
    left, right = vals[..., 0::2], vals[..., 1::2]
    kl, kr = kap[..., 0::2], kap[..., 1::2]
    fault = left != right
    parent = 1 - (left & right)
    strong = np.where(left == 0, kl, kr)
    parent_kappa = np.where(fault, strong + 1, np.maximum(kl, kr))
    return parent.astype(np.uint8), parent_kappa, fault


def eval_tree(leaves) -> EvaluatedTree:
    leaves = np.asarray(leaves)
    if leaves.ndim != 1:
        raise InvalidParameter("leaves must be one-dimensional")
    if leaves.size and not np.all((leaves == 0) | (leaves == 1)):
        raise InvalidParameter("leaves must be 0/1")
    leaves = leaves.astype(np.uint8)
    depth = _depth_of(leaves.size)
    size = 2 << depth
    values = np.zeros(size, np.uint8)
    kappa = np.zeros(size, np.int64)
    fault = np.zeros(size, bool)
    lo = 1 << depth
    values[lo:] = leaves
    level_vals, level_kap = leaves, np.zeros(lo, np.int64)
    for d in range(depth - 1, -1, -1):
        level_vals, level_kap, level_fault = _combine(level_vals, level_kap)
        s = slice(1 << d, 2 << d)
        values[s], kappa[s], fault[s] = level_vals, level_kap, level_fault
    for arr in (leaves, values, kappa, fault):
        arr.setflags(write=False)
    return EvaluatedTree(depth, leaves, values, kappa, fault)


def eval_batch(leaves: np.ndarray):
    """Evaluate many trees at once.

    ``leaves`` has shape ``(trees, 2**depth)``.  Returns arrays
    ``(root, max_kappa, root_kappa)``, one entry per tree.
    """
    vals = np.asarray(leaves, dtype=np.uint8)
    _depth_of(vals.shape[-1])
    kap = np.zeros(vals.shape, np.int64)
    running_max = np.zeros(vals.shape[:-1], np.int64)
    while vals.shape[-1] > 1:
        vals, kap, _ = _combine(vals, kap)
        running_max = np.maximum(running_max, kap.max(axis=-1))
    return vals[..., 0], running_max, kap[..., 0]


def max_kappa(tree: EvaluatedTree) -> int:
    """Largest kappa over all nodes (the strict k-fault predicate)."""
    return int(tree.kappa[1:].max())


def root_kappa(tree: EvaluatedTree) -> int:
    """Kappa at the root (the relaxed k-fault predicate)."""
    return int(tree.kappa[1])


def is_k_fault(tree: EvaluatedTree, k: int, strict: bool = True) -> bool:
    return (max_kappa(tree) if strict else root_kappa(tree)) <= k


def root_via_parity(n: int, h: int) -> int:
    if not 1 <= h <= n:
        raise InvalidParameter(f"need 1 <= h <= n, got h={h}, n={n}")
    return (n - h + 1) % 2


def haar_tree_from_instance(instance: HaarInstance) -> EvaluatedTree:
    return eval_tree(instance_bits(instance))


def _allowed_heights(depth: int, height_mode) -> list[int]:
    if isinstance(height_mode, (int, np.integer)):
        if not 1 <= height_mode <= depth:
            raise InvalidParameter(f"fixed height {height_mode} outside 1..{depth}")
        return [int(height_mode)]
    mode = str(height_mode).lower()
    if mode.startswith("fixed:"):
        return _allowed_heights(depth, int(mode.split(":", 1)[1]))
    if mode in ("all-even", "even"):
        heights = list(range(2, depth + 1, 2))
    elif mode in ("all-odd", "odd"):
        heights = list(range(1, depth + 1, 2))
    else:
        raise InvalidParameter(f"unknown height mode {height_mode!r}")
    if not heights:
        raise InvalidParameter(f"mode {height_mode!r} has no legal fault height at depth {depth}")
    return heights


def gen_one_fault_per_path(depth: int, height_mode, seed=None, p_fault: float = 0.5) -> EvaluatedTree:
    """Random NAND tree with exactly one fault on every root-to-leaf path.

    ``height_mode`` is a fixed height ``h`` (an int or ``"fixed:h"``),
    ``"all-even"`` or ``"all-odd"``.  Along each path the fault is placed at
    an allowed height with probability ``p_fault``, and always at the lowest
    allowed height if no earlier one was taken.
    """
    if depth < 1:
        raise InvalidParameter("depth must be at least 1")
    heights = set(_allowed_heights(depth, height_mode))
    lowest = min(heights)
    rng = np.random.default_rng(seed)
    # All allowed heights share a parity, so one root value puts a 1 on each of them.
    root = root_via_parity(depth, lowest)

    def grow(h: int, value: int) -> np.ndarray:
        if h in heights and (h == lowest or rng.random() < p_fault):
            half = 1 << (h - 1)
            # fault-free subtree of height h-1 and root v has all leaves v ^ parity(h-1)
            lo = np.full(half, (h - 1) % 2, np.uint8)
            hi = np.full(half, 1 ^ ((h - 1) % 2), np.uint8)
            return np.concatenate([lo, hi] if rng.random() < 0.5 else [hi, lo])
        # non-fault NAND node: both children equal, and opposite to the parent
        child = 1 - value
        return np.concatenate([grow(h - 1, child), grow(h - 1, child)])

    tree = eval_tree(grow(depth, root))
    verify_one_fault_per_path(tree, heights)
    return tree


def gen_one_fault_tree(depth: int, seed=None, p_fault: float = 0.3, root: int | None = None) -> EvaluatedTree:
    """Random tree satisfying the strict 1-fault condition (max kappa <= 1).

    Unlike :func:`gen_one_fault_per_path`, paths may carry no fault at all,
    so leaf majorities can be lopsided.
    """
    if depth < 0:
        raise InvalidParameter("depth must be non-negative")
    rng = np.random.default_rng(seed)

    def fault_free(h: int, value: int) -> np.ndarray:
        return np.full(1 << h, value ^ (h % 2), np.uint8)

    def grow(h: int, value: int) -> np.ndarray:
        if h == 0:
            return np.array([value], np.uint8)
        if value == 1 and rng.random() < p_fault:
            # the 0-valued (strong) child must stay fault-free
            zero, one = fault_free(h - 1, 0), grow(h - 1, 1)
            return np.concatenate([zero, one] if rng.random() < 0.5 else [one, zero])
        return np.concatenate([grow(h - 1, 1 - value), grow(h - 1, 1 - value)])

    start = int(rng.integers(0, 2)) if root is None else root
    return eval_tree(grow(depth, start))


def path_fault_heights(tree: EvaluatedTree) -> list[list[int]]:
    """For each leaf, the heights of the fault nodes on its root path (walked top-down)."""
    out = []
    for j in range(1 << tree.depth):
        v = (1 << tree.depth) + j
        path = []
        while v >= 1:
            path.append(v)
            v >>= 1
        out.append([tree.height(u) for u in reversed(path) if tree.fault[u]])
    return out


def verify_one_fault_per_path(tree: EvaluatedTree, heights=None) -> list[int]:
    """Check every path crosses exactly one fault, optionally at an allowed height.

    Returns the per-leaf fault height; raises :class:`PromiseViolation` otherwise.
    """
    per_leaf = []
    for j, found in enumerate(path_fault_heights(tree)):
        if len(found) != 1:
            raise PromiseViolation(f"path to leaf {j} has {len(found)} faults")
        if heights is not None and found[0] not in heights:
            raise PromiseViolation(f"path to leaf {j} has its fault at height {found[0]}")
        per_leaf.append(found[0])
    return per_leaf


def leftmost_fault_height(tree: EvaluatedTree) -> int:
    v = 1
    while v < (1 << tree.depth):
        if tree.fault[v]:
            return tree.height(v)
        v = 2 * v
    raise PromiseViolation("leftmost path has no fault")
