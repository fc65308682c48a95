"""Command-line entry point.

Exit codes: 0 success, 2 promise violation, 3 numerical non-convergence,
4 invalid input.  Reports go to stdout as JSON (``"schema": 1``), diagnostics
to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import zlib

import numpy as np

from . import adversary as adv
from . import classical_algs as ca
from . import fault_trees as ft
from . import oracle_core as oc
from . import quantum_sim as qs
from . import wavelet as wv
from .errors import InvalidParameter, NonConvergence, PromiseViolation

SCHEMA = 1
EXIT_OK, EXIT_PROMISE, EXIT_NONCONV, EXIT_INVALID = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_INVALID)


def stream_seed(seed: int, command: str) -> int:
    """Per-subcommand seed derived from the global one."""
    return oc.mix64((seed ^ zlib.crc32(command.encode())) & oc.MASK64)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidParameter(f"cannot read {path}: {exc}") from None


def _emit(args, payload: dict):
    payload = {"schema": SCHEMA, **payload}
    text = json.dumps(payload, sort_keys=True, default=_json_default)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serialisable: {type(obj)}")


def _parse_bits(text: str) -> list[int]:
    try:
        return [int(v) for v in text.replace(" ", "").split(",") if v != ""]
    except ValueError:
        raise InvalidParameter(f"cannot parse bit list {text!r}") from None


def _height_mode(text: str):
    return int(text) if text.isdigit() else text


# -- generators -----------------------------------------------------------------

def cmd_gen_instance(args):
    if args.b is not None:
        if args.h is None:
            raise InvalidParameter("--b needs --h")
        inst = oc.make_instance(args.n, args.h, _parse_bits(args.b))
    else:
        inst = oc.random_instance(args.n, stream_seed(args.seed, "gen-instance"))
    _emit(args, inst.to_dict())


def cmd_expand(args):
    inst = oc.HaarInstance.from_dict(_load_json(args.input))
    _emit(args, oc.expand(inst).to_dict())


def cmd_gen_tree(args):
    seed = stream_seed(args.seed, "gen-tree")
    tree = ft.gen_one_fault_per_path(args.depth, _height_mode(args.mode), seed)
    _emit(args, tree.to_dict())


def _read_vector(path: str) -> np.ndarray:
    if path.endswith(".csv"):
        with open(path) as fh:
            vals = [float(tok) for row in csv.reader(fh) for tok in row if tok.strip()]
        return np.array(vals)
    data = _load_json(path)
    vec = data["v"] if isinstance(data, dict) else data
    return np.array(vec, dtype=float)


def cmd_transform(args):
    v = _read_vector(args.input)
    fn = {"haar": wv.haar_forward, "haar-inverse": wv.haar_inverse, "wht": wv.walsh_hadamard}[args.kind]
    out = fn(v)
    if args.format == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow([repr(float(x)) for x in out])
        sys.stdout.write(buf.getvalue())
        return
    _emit(args, {"kind": args.kind, "v": [float(x) for x in out]})


# -- runs -----------------------------------------------------------------------

def _load_oracle(args):
    if args.oracle:
        data = _load_json(args.oracle)
        return oc.Oracle.from_dict(data), data
    if args.n is not None and args.h is not None:
        seed = stream_seed(args.seed, "lazy-oracle")
        return oc.lazy_oracle(args.n, args.h, seed), {"n": args.n, "h": args.h}
    raise InvalidParameter("give --oracle FILE or --n/--h for a lazy oracle")


def cmd_quantum_haar(args):
    oracle, _ = _load_oracle(args)
    if args.check_promise:
        oc.detect_h_star(oracle.peek_all(), check_unique=True)
    run = qs.haar_algorithm(oracle, seed=stream_seed(args.seed, "quantum-haar"), max_n=args.max_sim_n)
    top = int(np.argmax(run.mass_by_level))
    payload = {
        "h_star": run.h_out,
        "queries": oracle.queries,
        "distribution": run.distribution.to_json(),
        "mass_by_level": [float(x) for x in run.mass_by_level],
    }
    _emit(args, payload)
    if top == 0 or run.mass_by_level[top] < 1 - 1e-9:
        print("promise violation: Haar mass is not confined to one scale", file=sys.stderr)
        return EXIT_PROMISE
    return EXIT_OK


def cmd_quantum_bv(args):
    oracle, data = _load_oracle(args)
    run = qs.bv_algorithm(oracle, seed=stream_seed(args.seed, "quantum-bv"), max_n=args.max_sim_n)
    _emit(args, {
        "outcome": run.outcome,
        "h_star": run.h_from_k,
        "queries": oracle.queries,
        "distribution": run.distribution.to_json(),
    })
    if run.h_from_k is None and "k" not in data:
        print("promise violation: outcome 0 leaves h* undefined", file=sys.stderr)
        return EXIT_PROMISE
    return EXIT_OK


def cmd_classical_search(args):
    seed = stream_seed(args.seed, "classical-search")
    if args.trials:
        if args.n is None:
            raise InvalidParameter("batch mode needs --n")
        rows = ca.search_batch(args.n, args.c, args.trials, seed, args.jobs)
        if args.format == "csv":
            w = csv.writer(sys.stdout, lineterminator="\n")
            w.writerow(["seed", "answer", "correct", "queries"])
            for r in rows:
                w.writerow([r["seed"], r["answer"], int(r["correct"]), r["queries"]])
        else:
            errors = sum(not r["correct"] for r in rows)
            _emit(args, {"trials": len(rows), "errors": errors, "error_rate": errors / len(rows),
                         "max_queries": max(r["queries"] for r in rows), "rows": rows})
        return EXIT_OK
    oracle, _ = _load_oracle(args)
    rep = ca.binary_search_h(oracle, args.c, seed)
    _emit(args, {**rep.to_dict(), "bound": ca.search_query_bound(oracle.n, args.c)})
    return EXIT_OK


def _load_tree(path: str) -> ft.EvaluatedTree:
    data = _load_json(path)
    try:
        tree = ft.eval_tree(data["leaves"])
    except KeyError:
        raise InvalidParameter("tree JSON needs 'leaves'") from None
    if "depth" in data and int(data["depth"]) != tree.depth:
        raise InvalidParameter("depth does not match number of leaves")
    return tree


def cmd_tree_eval(args):
    tree = _load_tree(args.tree)
    if args.method == "exact":
        _emit(args, tree.report())
        return EXIT_OK
    oracle = oc.Oracle(tree.depth, tree.leaves)
    rep = ca.classical_tree_eval(oracle, args.c, stream_seed(args.seed, "tree-eval"))
    _emit(args, {**rep.to_dict(), "root": rep.answer})
    return EXIT_OK


def cmd_majority_eval(args):
    tree = _load_tree(args.tree)
    oracle = oc.Oracle(tree.depth, tree.leaves)
    rep = ca.majority_eval(oracle, args.epsilon, args.delta, stream_seed(args.seed, "majority-eval"))
    _emit(args, rep.to_dict())
    return EXIT_OK


# -- adversary ------------------------------------------------------------------

NAMED_FUNCTIONS = {
    "id": adv.identity_fn,
    "nand": adv.nand_fn,
    "nand-nand": lambda: adv.compose_function(adv.nand_fn(), adv.nand_fn()),
}


def _load_fn(name: str | None, path: str | None) -> adv.PartialBoolFn:
    if path:
        return adv.PartialBoolFn.from_dict(_load_json(path))
    if name not in NAMED_FUNCTIONS:
        raise InvalidParameter(f"unknown function {name!r}; choose from {sorted(NAMED_FUNCTIONS)}")
    return NAMED_FUNCTIONS[name]()


def _solve(args, f, balanced=False):
    return adv.solve_adv(f, starts=args.starts, max_iter=args.max_iter,
                         seed=stream_seed(args.seed, "adv-solve"),
                         balanced=balanced)


def cmd_adv_solve(args):
    f = _load_fn(args.fn, args.truth_table)
    rep = _solve(args, f, balanced=args.balanced)
    _emit(args, rep.to_dict())
    return EXIT_OK if rep.converged else EXIT_NONCONV


def cmd_adv_compose_check(args):
    f = _load_fn(args.fn, args.outer)
    g = _load_fn(args.inner_fn or args.fn, args.inner)
    outer = _solve(args, f)
    inner = _solve(args, g, balanced=True)
    res = adv.compose_dual(outer.point, inner.point, f, g)
    feas = adv.check_feasible(res.fn, res.point, 1e-6)
    ok = feas.feasible and abs(res.objective - res.expected_value) <= 1e-6 and abs(res.trace - 1) <= 1e-9
    _emit(args, {
        "objective": res.objective,
        "expected": res.expected_value,
        "trace": res.trace,
        "min_eig": feas.min_eig,
        "c": res.c,
        "d_outer": outer.value,
        "d_inner": inner.value,
        "domain_size": res.fn.size,
        "ok": ok,
    })
    return EXIT_OK if ok and outer.converged and inner.converged else EXIT_NONCONV


# -- wiring ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="haarq", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=0, help="global seed (64-bit unsigned)")
    p.add_argument("--max-sim-n", type=int, default=int(os.environ.get("HAARQ_MAX_SIM_N", qs.MAX_SIM_N)))
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(func=fn)
        sp.add_argument("--out", help="write JSON here instead of stdout")
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="overrides the global --seed")
        return sp

    sp = add("gen-instance", cmd_gen_instance, help="write a Haar Problem instance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--h", type=int)
    sp.add_argument("--b", help="comma-separated block bits; random instance if omitted")

    sp = add("expand", cmd_expand, help="expand an instance into oracle bits")
    sp.add_argument("--in", dest="input", required=True)

    sp = add("gen-tree", cmd_gen_tree, help="random one-fault-per-path NAND tree")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--mode", default="all-odd", help="all-odd, all-even, or a fixed height")

    sp = add("transform", cmd_transform, help="Haar / Walsh-Hadamard transform of a vector")
    sp.add_argument("--kind", choices=["haar", "haar-inverse", "wht"], default="haar")
    sp.add_argument("--in", dest="input", required=True, help=".json ({'v': [...]} or list) or .csv")
    sp.add_argument("--format", choices=["json", "csv"], default="json")

    for name, fn in (("quantum-haar", cmd_quantum_haar), ("quantum-bv", cmd_quantum_bv)):
        sp = add(name, fn)
        sp.add_argument("--oracle")
        sp.add_argument("--n", type=int)
        sp.add_argument("--h", type=int)
        if name == "quantum-haar":
            sp.add_argument("--check-promise", action="store_true")

    sp = add("classical-search", cmd_classical_search, help="randomised binary search for h*")
    sp.add_argument("--oracle")
    sp.add_argument("--n", type=int)
    sp.add_argument("--h", type=int)
    sp.add_argument("--c", type=float, default=10.0)
    sp.add_argument("--trials", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--format", choices=["json", "csv"], default="json")

    sp = add("tree-eval", cmd_tree_eval)
    sp.add_argument("--tree", required=True)
    sp.add_argument("--method", choices=["exact", "search"], default="exact")
    sp.add_argument("--c", type=float, default=10.0)

    sp = add("majority-eval", cmd_majority_eval)
    sp.add_argument("--tree", required=True)
    sp.add_argument("--epsilon", type=float, default=0.5)
    sp.add_argument("--delta", type=float, default=0.01)

    for name, fn in (("adv-solve", cmd_adv_solve), ("adv-compose-check", cmd_adv_compose_check)):
        sp = add(name, fn)
        sp.add_argument("--fn", default="nand", help=f"one of {sorted(NAMED_FUNCTIONS)}")
        sp.add_argument("--starts", type=int, default=8)
        sp.add_argument("--max-iter", type=int, default=5000)
        if name == "adv-solve":
            sp.add_argument("--truth-table")
            sp.add_argument("--balanced", action="store_true")
        else:
            sp.add_argument("--outer", help="truth-table JSON for the outer function")
            sp.add_argument("--inner", help="truth-table JSON for the inner function")
            sp.add_argument("--inner-fn")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code = args.func(args)
    except InvalidParameter as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PromiseViolation as exc:
        print(f"promise violation: {exc}", file=sys.stderr)
        return EXIT_PROMISE
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONV
    return EXIT_OK if code is None else code


if __name__ == "__main__":
    sys.exit(main())
