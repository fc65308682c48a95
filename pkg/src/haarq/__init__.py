"""Haar Problem oracles, fault trees, query algorithms and adversary-bound tools."""
from .errors import HaarqError, InvalidParameter, NonConvergence, PromiseViolation
from .oracle_core import (
    HaarInstance,
    Oracle,
    ParityInstance,
    detect_h_star,
    expand,
    lazy_oracle,
    make_instance,
    parity_oracle,
    random_instance,
)
from .fault_trees import EvaluatedTree, eval_tree, gen_one_fault_per_path, haar_tree_from_instance
from .wavelet import HaarIndex, haar_forward, haar_inverse, walsh_hadamard
from .quantum_sim import bv_algorithm, haar_algorithm
from .classical_algs import binary_search_h, classical_tree_eval, exact_det_query_complexity, majority_eval
from .adversary import PartialBoolFn, check_feasible, compose_dual, compose_function, solve_adv

__version__ = "0.1.0"
