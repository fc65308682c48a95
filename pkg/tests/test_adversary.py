import itertools

import numpy as np
import pytest

from haarq.adversary import (
    DualPoint,
    PartialBoolFn,
    build_constraints,
    check_balanced,
    check_feasible,
    compose_dual,
    compose_function,
    extend_primed,
    identity_fn,
    jacobi_eigenvalues,
    kron_power,
    min_eigenvalue,
    nand_fn,
    solve_adv,
    tilde_expand,
)
from haarq.errors import InvalidParameter

SQRT2 = np.sqrt(2.0)


@pytest.fixture(scope="module")
def nand_point():
    return solve_adv(nand_fn(), seed=0)


@pytest.fixture(scope="module")
def nand_balanced():
    return solve_adv(nand_fn(), seed=0, balanced=True)


def id_optimum():
    return DualPoint(np.array([[0, 0.5], [0.5, 0]]), np.array([0.5, 0.5]))


# -- functions and constraint matrices --------------------------------------------

def test_partial_fn_validation():
    with pytest.raises(InvalidParameter):
        PartialBoolFn(2, ((0, 0), (0, 0)), (1, 1))
    with pytest.raises(InvalidParameter):
        PartialBoolFn(2, ((0, 0),), (2,))
    with pytest.raises(InvalidParameter):
        PartialBoolFn(2, ((0, 0, 1),), (0,))
    with pytest.raises(InvalidParameter):
        PartialBoolFn.from_dict({"m": 2})


def test_truth_table_json_round_trip():
    f = nand_fn().restrict([(0, 1), (1, 0), (1, 1)])
    d = f.to_dict()
    assert d["entries"][0] == {"x": "01", "f": 1}
    assert PartialBoolFn.from_dict(d) == f
    assert not f.is_total and nand_fn().is_total


def test_build_constraints_identity():
    G, deltas, J = build_constraints(identity_fn())
    assert np.array_equal(G, np.eye(2))
    assert np.array_equal(deltas[0], [[0, 1], [1, 0]])
    assert np.array_equal(J, np.ones((2, 2)))


def test_build_constraints_nand():
    f = nand_fn()
    G, deltas, _ = build_constraints(f)
    for (i, x), (j, y) in itertools.product(enumerate(f.domain), repeat=2):
        both_one = x != (1, 1) and y != (1, 1)
        assert G[i, j] == (both_one or x == y == (1, 1))
        assert deltas[1][i, j] == (x[1] != y[1])


# -- eigenvalues ------------------------------------------------------------------

def test_min_eigenvalue_examples():
    assert min_eigenvalue(np.diag([3.0, 1.0])) == pytest.approx(1.0)
    assert min_eigenvalue(np.array([[0.0, 1.0], [1.0, 0.0]])) == pytest.approx(-1.0)
    with pytest.raises(InvalidParameter):
        min_eigenvalue(np.array([[0.0, 1.0], [0.0, 0.0]]))


def charpoly_roots(a):
    """Eigenvalues from the characteristic polynomial (fine for small, well-separated spectra)."""
    return np.sort(np.roots(np.poly(a)).real)


@pytest.mark.parametrize("seed", range(5))
def test_jacobi_matches_references(seed):
    rng = np.random.default_rng(seed)
    b = rng.standard_normal((16, 16))
    a = (b + b.T) / 2
    ours = np.sort(jacobi_eigenvalues(a))
    assert np.max(np.abs(ours - np.linalg.eigvalsh(a))) < 1e-9
    small = a[:6, :6]
    assert np.max(np.abs(np.sort(jacobi_eigenvalues(small)) - charpoly_roots(small))) < 1e-7


def test_jacobi_handles_degenerate_and_tiny():
    assert np.allclose(jacobi_eigenvalues(np.zeros((4, 4))), 0)
    a = np.eye(5) + 1e-200 * np.ones((5, 5))
    assert np.allclose(jacobi_eigenvalues(a), 1)
    big = np.ones((64, 64))
    assert np.sort(jacobi_eigenvalues(big))[-1] == pytest.approx(64)


# -- feasibility and balance --------------------------------------------------------

def test_check_feasible_examples():
    f = identity_fn()
    zero = DualPoint(np.zeros((2, 2)), np.array([0.5, 0.5]))
    rep = check_feasible(f, zero)
    assert rep.feasible and zero.value == 0
    rep = check_feasible(f, id_optimum())
    assert rep.feasible and id_optimum().value == pytest.approx(1.0)
    scaled = DualPoint(1.1 * id_optimum().W, id_optimum().omega)
    rep = check_feasible(f, scaled)
    assert not rep.feasible and rep.min_eig < 0
    with pytest.raises(InvalidParameter):
        check_feasible(nand_fn(), zero)


def test_check_feasible_flags_pattern_and_trace():
    f = identity_fn()
    assert not check_feasible(f, DualPoint(np.eye(2) * 0.1, np.array([0.5, 0.5]))).feasible
    assert not check_feasible(f, DualPoint(np.zeros((2, 2)), np.array([0.5, 0.6]))).feasible


def test_check_balanced_examples():
    f = identity_fn()
    rep = check_balanced(f, id_optimum(), 1.0)
    assert rep.balanced and rep.min_eig == pytest.approx(0, abs=1e-12)
    assert rep.trace_one == rep.trace_zero == 0.5
    assert check_balanced(f, DualPoint(np.zeros((2, 2)), np.array([0.5, 0.5])), 0.0).balanced
    assert not check_balanced(f, DualPoint(np.zeros((2, 2)), np.array([0.9, 0.1])), 0.0).balanced


# -- solver -------------------------------------------------------------------------

def test_solve_identity():
    rep = solve_adv(identity_fn(), seed=0)
    assert abs(rep.value - 1) < 1e-4
    assert rep.converged and rep.residual >= -1e-8


def test_solve_nand(nand_point):
    assert nand_point.value >= SQRT2 - 1e-3
    assert nand_point.value <= SQRT2 + 1e-6
    assert nand_point.residual >= -1e-8 and nand_point.converged


def test_solver_values_are_certified(nand_point):
    rep = check_feasible(nand_fn(), nand_point.point, tol=1e-8)
    assert rep.feasible and rep.zero_pattern == 0 and rep.trace_error <= 1e-10


def test_solver_deterministic():
    a = solve_adv(nand_fn(), starts=2, seed=3)
    b = solve_adv(nand_fn(), starts=2, seed=3)
    assert a.to_dict() == b.to_dict()
    assert np.array_equal(a.point.W, b.point.W)


def test_solver_partial_functions():
    f = nand_fn().restrict([(0, 1), (1, 0), (1, 1)])
    rep = solve_adv(f, seed=0)
    assert check_feasible(f, rep.point).feasible
    assert rep.value == pytest.approx(SQRT2, abs=1e-4)
    const = nand_fn().restrict([(0, 0), (0, 1), (1, 0)])
    assert solve_adv(const, starts=2, seed=0).value == pytest.approx(0, abs=1e-9)


def test_solver_rejects_large_domains():
    big = PartialBoolFn.from_function(7, lambda x: x[0])
    with pytest.raises(InvalidParameter):
        solve_adv(big)


def test_balanced_mode(nand_balanced):
    bal = check_balanced(nand_fn(), nand_balanced.point, nand_balanced.value, 1e-8)
    assert bal.balanced
    assert nand_balanced.value == pytest.approx(SQRT2, abs=1e-4)


# -- composition pieces ----------------------------------------------------------

def test_extend_primed():
    dom = [(0, 0), (1, 1)]
    out = extend_primed(np.eye(2), dom, 2)
    assert np.array_equal(out, np.diag([1.0, 0, 0, 1]))
    a = np.arange(16.0).reshape(4, 4)
    assert np.array_equal(extend_primed(a, list(itertools.product((0, 1), repeat=2)), 2), a)
    rng = np.random.default_rng(0)
    b = rng.standard_normal((3, 3))
    ext = extend_primed(b, [(0, 1), (1, 0), (1, 1)], 2)
    assert ext.sum() == pytest.approx(b.sum())


def test_tilde_expand_examples():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert np.array_equal(tilde_expand(a, identity_fn(), 1), a)
    out = tilde_expand(a, nand_fn(), 1)
    assert out.shape == (4, 4)
    assert np.array_equal(out[:3, :3], np.full((3, 3), 4.0))
    assert out[3, 3] == 1.0 and np.array_equal(out[:3, 3], [3.0] * 3)


def test_tilde_expand_by_definition():
    rng = np.random.default_rng(2)
    g = nand_fn()
    src = rng.standard_normal((4, 4))
    out = tilde_expand(src, g, 2)
    tuples = list(itertools.product(g.domain, repeat=2))
    for (i, x), (j, y) in itertools.product(enumerate(tuples), repeat=2):
        gx = 2 * g(x[0]) + g(x[1])
        gy = 2 * g(y[0]) + g(y[1])
        assert out[i, j] == src[gx, gy]


def test_tilde_expand_preserves_psd():
    rng = np.random.default_rng(7)
    for trial in range(100):
        p = 1 + trial % 2
        b = rng.standard_normal((1 << p, 1 << p))
        m = b @ b.T
        assert min_eigenvalue(tilde_expand(m, nand_fn(), p)) >= -1e-10


def test_compose_function_examples():
    ff = compose_function(nand_fn(), nand_fn())
    assert ff.size == 16 and ff((0, 0, 0, 0)) == 0
    ii = compose_function(identity_fn(), identity_fn())
    assert ii == identity_fn()


def test_compose_partial_domain_sizes():
    g = nand_fn()
    for keep in ([(0, 0), (0, 1), (1, 0)], [(0, 1), (1, 0), (1, 1)]):
        f = nand_fn().restrict(keep)
        brute = [
            x for x in itertools.product((0, 1), repeat=4)
            if (g(x[:2]), g(x[2:])) in keep
        ]
        composed = compose_function(f, g)
        assert sorted(composed.domain) == sorted(brute)
        assert all(composed(x) == f((g(x[:2]), g(x[2:]))) for x in brute)
    assert compose_function(nand_fn().restrict([(0, 0), (0, 1), (1, 0)]), g).size == 7
    assert compose_function(nand_fn().restrict([(0, 1), (1, 0), (1, 1)]), g).size == 15


def test_delta_tensor_identity():
    g = nand_fn()
    ff = compose_function(nand_fn(), g)
    _, deltas, J = build_constraints(ff)
    _, inner, Jg = build_constraints(g)
    for p in range(2):
        for q in range(2):
            parts = [Jg, Jg]
            parts[p] = inner[q]
            assert np.array_equal(deltas[p * 2 + q], np.kron(parts[0], parts[1]))
    assert np.array_equal(kron_power(Jg, 2), J)


# -- composed dual points --------------------------------------------------------

def test_compose_nand_nand(nand_point, nand_balanced):
    res = compose_dual(nand_point.point, nand_balanced.point, nand_fn(), nand_fn())
    assert res.c == pytest.approx(2 * SQRT2, abs=1e-6)
    assert res.objective == pytest.approx(2.0, abs=1e-6)
    assert res.expected_value == pytest.approx(nand_point.value * nand_balanced.value)
    assert res.trace == pytest.approx(1.0, abs=1e-9)
    rep = check_feasible(res.fn, res.point, tol=1e-6)
    assert rep.feasible and rep.min_eig >= -1e-6


def test_compose_identity():
    res = compose_dual(id_optimum(), id_optimum(), identity_fn(), identity_fn())
    assert res.objective == pytest.approx(1.0) and res.trace == pytest.approx(1.0)
    assert check_feasible(res.fn, res.point).feasible


@pytest.mark.parametrize("keep", [[(0, 0), (0, 1), (1, 0)], [(0, 1), (1, 0), (1, 1)]])
def test_compose_partial_outer(nand_balanced, keep):
    f = nand_fn().restrict(keep)
    fp = solve_adv(f, seed=1)
    res = compose_dual(fp.point, nand_balanced.point, f, nand_fn())
    assert res.objective == pytest.approx(res.expected_value, abs=1e-6)
    assert res.trace == pytest.approx(1.0, abs=1e-9)
    assert check_feasible(res.fn, res.point, tol=1e-6).feasible


def test_compose_refuses_bad_points(nand_point, nand_balanced):
    bad = DualPoint(2 * nand_point.point.W, nand_point.point.omega)
    with pytest.raises(InvalidParameter):
        compose_dual(bad, nand_balanced.point, nand_fn(), nand_fn())
    zero = DualPoint(np.zeros((4, 4)), np.full(4, 0.25))
    with pytest.raises(InvalidParameter):
        compose_dual(nand_point.point, zero, nand_fn(), nand_fn())
    unbalanced = DualPoint(np.zeros((2, 2)), np.array([0.9, 0.1]))
    with pytest.raises(InvalidParameter):
        compose_dual(id_optimum(), unbalanced, identity_fn(), identity_fn())


@pytest.mark.slow
def test_composition_inequality_nand(nand_point):
    ff = compose_function(nand_fn(), nand_fn())
    rep = solve_adv(ff, seed=0)
    assert rep.value >= nand_point.value**2 - 1e-3
    assert check_feasible(ff, rep.point).feasible


def test_composition_inequality_identity():
    one = solve_adv(identity_fn(), starts=2, seed=0).value
    two = solve_adv(compose_function(identity_fn(), identity_fn()), starts=2, seed=0).value
    assert two >= one**2 - 1e-3
