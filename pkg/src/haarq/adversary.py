"""Dual SDP of the general adversary bound and its composition construction.

For ``f : S -> {0, 1}`` with ``S`` a subset of ``{0,1}^m`` the dual reads::

    maximise    sum(W)
    subject to  W o G = 0,  Omega diagonal,  Tr(Omega) = 1,
                Omega +- W o Delta_i  PSD   for every input bit i

where ``o`` is the entrywise product, ``G[x, y] = [f(x) == f(y)]`` and
``Delta_i[x, y] = [x_i != y_i]``.  Any feasible point lower-bounds ADV+-(f).

Bit strings are tuples ``(x_1, ..., x_m)``; the string form ``"x_1...x_m"``
is used for JSON.  Indices into ``{0,1}^p`` read the bits as a binary number
with ``x_1`` most significant, matching ``np.kron`` ordering.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidParameter

MAX_DOMAIN = 64
INNER_CAP = 200


# -- boolean functions ----------------------------------------------------------

@dataclass(frozen=True)
class PartialBoolFn:
    m: int
    domain: tuple
    outputs: tuple

    def __post_init__(self):
        if len(self.domain) != len(self.outputs):
            raise InvalidParameter("domain and outputs differ in length")
        if len(set(self.domain)) != len(self.domain):
            raise InvalidParameter("domain entries must be distinct")
        for x in self.domain:
            if len(x) != self.m or any(b not in (0, 1) for b in x):
                raise InvalidParameter(f"{x!r} is not an {self.m}-bit input")
        if any(v not in (0, 1) for v in self.outputs):
            raise InvalidParameter("outputs must be 0 or 1")

    @classmethod
    def from_function(cls, m: int, fn: Callable, domain: Iterable | None = None) -> "PartialBoolFn":
        xs = [tuple(x) for x in (product((0, 1), repeat=m) if domain is None else domain)]
        return cls(m, tuple(xs), tuple(int(fn(x)) for x in xs))

    @property
    def size(self) -> int:
        return len(self.domain)

    @property
    def is_total(self) -> bool:
        return self.size == 1 << self.m

    def __call__(self, x) -> int:
        return self.outputs[self.domain.index(tuple(x))]

    def restrict(self, subset: Iterable) -> "PartialBoolFn":
        keep = [tuple(x) for x in subset]
        return PartialBoolFn(self.m, tuple(keep), tuple(self(x) for x in keep))

    def to_dict(self) -> dict:
        entries = [{"x": "".join(map(str, x)), "f": y} for x, y in zip(self.domain, self.outputs)]
        return {"m": self.m, "entries": entries}

    @classmethod
    def from_dict(cls, d: dict) -> "PartialBoolFn":
        try:
            m = int(d["m"])
            xs = [tuple(int(ch) for ch in e["x"]) for e in d["entries"]]
            ys = [int(e["f"]) for e in d["entries"]]
        except (KeyError, ValueError, TypeError) as exc:
            raise InvalidParameter(f"bad truth-table JSON: {exc}") from None
        return cls(m, tuple(xs), tuple(ys))


def identity_fn() -> PartialBoolFn:
    return PartialBoolFn.from_function(1, lambda x: x[0])


def nand_fn() -> PartialBoolFn:
    return PartialBoolFn.from_function(2, lambda x: 1 - (x[0] & x[1]))


def _bits_to_index(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = 2 * out + b
    return out


# -- matrices -------------------------------------------------------------------

def build_constraints(f: PartialBoolFn):
    """Return ``(G, Deltas, J)``; ``Deltas`` has shape ``(m, N, N)``."""
    X = np.array(f.domain, dtype=np.int64).reshape(f.size, f.m)
    y = np.array(f.outputs)
    G = (y[:, None] == y[None, :]).astype(float)
    deltas = (X[:, None, :] != X[None, :, :]).astype(float).transpose(2, 0, 1)
    return G, deltas, np.ones((f.size, f.size))


def jacobi_eigenvalues(a, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations (ascending).

    Sweeps until the off-diagonal Frobenius norm drops below
    ``tol * max(1, ||a||_F)``.
    """
    a = np.array(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidParameter("expected a square matrix")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0))):
        raise InvalidParameter("matrix is not symmetric")
    a = (a + a.T) / 2
    n = a.shape[0]
    bound = tol * max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off < bound:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    a[p, q] = a[q, p] = 0.0
                    continue
                diff = a[q, q] - a[p, p]
                if abs(apq) < 1e-18 * abs(diff):
                    t = apq / diff  # theta**2 would overflow
                else:
                    theta = diff / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
    else:
        raise ArithmeticError("Jacobi iteration did not converge")
    return np.sort(np.diag(a))


def min_eigenvalue(a) -> float:
    return float(jacobi_eigenvalues(a)[0])


# -- dual points and certification ----------------------------------------------

@dataclass
class DualPoint:
    W: np.ndarray
    omega: np.ndarray

    @property
    def Omega(self) -> np.ndarray:
        return np.diag(self.omega)

    @property
    def value(self) -> float:
        return float(self.W.sum())


@dataclass
class FeasibilityReport:
    zero_pattern: float
    trace_error: float
    min_eig: float
    asymmetry: float
    feasible: bool


def _check_shapes(f: PartialBoolFn, point: DualPoint):
    N = f.size
    if point.W.shape != (N, N) or point.omega.shape != (N,):
        raise InvalidParameter(f"point is not sized to a domain of {N} inputs")


def constraint_matrices(f: PartialBoolFn, point: DualPoint, scale: float = 1.0, use_delta: bool = True):
    """The ``2m`` matrices ``scale * Omega +- W o Delta_i``."""
    _, deltas, _ = build_constraints(f)
    Om = scale * point.Omega
    out = []
    for d in deltas:
        A = point.W * d if use_delta else point.W
        out.extend([Om + A, Om - A])
    return out


def check_feasible(f: PartialBoolFn, point: DualPoint, tol: float = 1e-8) -> FeasibilityReport:
    """Independent feasibility check; PSD tested with the Jacobi eigensolver."""
    _check_shapes(f, point)
    G, _, _ = build_constraints(f)
    zero = float(np.abs(point.W * G).max(initial=0.0))
    trace_err = abs(float(point.omega.sum()) - 1.0)
    asym = float(np.abs(point.W - point.W.T).max(initial=0.0))
    mats = constraint_matrices(f, point)
    min_eig = min(min_eigenvalue((M + M.T) / 2) for M in mats) if mats else float(point.omega.min())
    ok = zero <= tol and trace_err <= tol and asym <= tol and min_eig >= -tol
    return FeasibilityReport(zero, trace_err, min_eig, asym, ok)


@dataclass
class BalanceReport:
    min_eig: float
    trace_one: float
    trace_zero: float
    balanced: bool


def check_balanced(f: PartialBoolFn, point: DualPoint, d: float, tol: float = 1e-8) -> BalanceReport:
    """Check ``d * Omega +- W`` PSD and that each output class holds half the trace."""
    _check_shapes(f, point)
    y = np.array(f.outputs)
    Om = d * point.Omega
    min_eig = min(min_eigenvalue(Om + point.W), min_eigenvalue(Om - point.W))
    t1 = float(point.omega[y == 1].sum())
    t0 = float(point.omega[y == 0].sum())
    ok = min_eig >= -tol and abs(t1 - 0.5) <= tol and abs(t0 - 0.5) <= tol
    return BalanceReport(min_eig, t1, t0, ok)


# -- solver ---------------------------------------------------------------------

@dataclass
class SolveReport:
    value: float
    residual: float
    iterations: int
    starts: int
    converged: bool
    seed: int
    point: DualPoint = field(repr=False)
    start_values: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "residual": self.residual,
            "converged": self.converged,
            "starts": self.starts,
            "iterations": self.iterations,
            "seed": self.seed,
        }


def _project_simplex(v: np.ndarray, total: float = 1.0) -> np.ndarray:
    """Euclidean projection onto ``{w >= 0, sum(w) = total}``."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - total
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


class _DualProblem:
    """Augmented Lagrangian pieces for one function; all arrays precomputed."""

    def __init__(self, f: PartialBoolFn, balanced: bool):
        G, deltas, _ = build_constraints(f)
        self.N = f.size
        self.mask = 1.0 - G
        # stacked +Delta_i, -Delta_i with matching signs
        self.signed = np.concatenate([np.stack([d, -d]) for d in deltas]) if len(deltas) else np.zeros((0, self.N, self.N))
        self.y = np.array(f.outputs)
        self.balanced = balanced
        if balanced and (np.all(self.y == 1) or np.all(self.y == 0)):
            raise InvalidParameter("balanced solve needs both output values in the domain")

    def project_omega(self, w: np.ndarray) -> np.ndarray:
        if not self.balanced:
            return _project_simplex(w)
        out = np.empty_like(w)
        for cls in (0, 1):
            sel = self.y == cls
            out[sel] = _project_simplex(w[sel], 0.5)
        return out

    def project(self, W, w):
        W = (W + W.T) / 2 * self.mask
        return W, self.project_omega(w)

    def constraints(self, W, w):
        return np.diag(w)[None] + self.signed * W[None]

    def evaluate(self, W, w, Z, rho):
        X = self.constraints(W, w)
        lam, vec = np.linalg.eigh(Z - rho * X)
        Y = (vec * np.maximum(lam, 0.0)[:, None, :]) @ vec.transpose(0, 2, 1)
        F = -W.sum() + (np.sum(Y * Y) - np.sum(Z * Z)) / (2 * rho)
        gW = -(1.0 + np.sum(self.signed * Y, axis=0)) * self.mask
        gw = -np.einsum("kii->i", Y)
        return F, gW, gw, Y


def _inner_spg(prob: _DualProblem, W, w, Z, rho, budget: int, tol: float):
    """Spectral projected gradient with non-monotone Armijo backtracking."""
    F, gW, gw, Y = prob.evaluate(W, w, Z, rho)
    history = [F]
    alpha = 1.0 / rho
    used = 1
    while used < budget:
        PW, pw = prob.project(W - gW, w - gw)
        if max(np.abs(PW - W).max(), np.abs(pw - w).max()) < tol:
            break
        dW, dw = prob.project(W - alpha * gW, w - alpha * gw)
        dW, dw = dW - W, dw - w
        slope = np.sum(gW * dW) + np.sum(gw * dw)
        ref = max(history[-10:])
        lam = 1.0
        while True:
            nW, nw = W + lam * dW, w + lam * dw
            nF, ngW, ngw, nY = prob.evaluate(nW, nw, Z, rho)
            used += 1
            if nF <= ref + 1e-4 * lam * slope or lam < 1e-12 or used >= budget:
                break
            lam /= 2
        sW, sw = nW - W, nw - w
        yW, yw = ngW - gW, ngw - gw
        sy = np.sum(sW * yW) + np.sum(sw * yw)
        ss = np.sum(sW * sW) + np.sum(sw * sw)
        alpha = float(np.clip(ss / sy, 1e-10, 1e4)) if sy > 0 else 1e4
        W, w, F, gW, gw, Y = nW, nw, nF, ngW, ngw, nY
        history.append(F)
        if ss == 0.0:
            break
    return W, w, Y, used


def _repair(prob: _DualProblem, W, w, drop: float):
    """Scale ``W`` so that ``Omega +- W o Delta_i`` is exactly PSD.

    Rows whose weight is at most ``drop`` are removed from the support first
    (their ``W`` entries are zeroed and the weight redistributed).
    """
    W = (W + W.T) / 2 * prob.mask
    w = np.maximum(w, 0.0)
    small = w <= drop
    if small.all():
        return np.zeros_like(W), prob.project_omega(np.ones_like(w))
    W[small, :] = 0.0
    W[:, small] = 0.0
    w = np.where(small, 0.0, w)
    if prob.balanced:
        for cls in (0, 1):
            sel = prob.y == cls
            tot = w[sel].sum()
            w[sel] = w[sel] * (0.5 / tot) if tot > 0 else 0.5 / sel.sum()
    else:
        w = w / w.sum()
    keep = ~small
    s = 1.0 / np.sqrt(w[keep])
    scaled = prob.signed[::2][:, keep][:, :, keep] * W[np.ix_(keep, keep)][None] * np.outer(s, s)[None]
    radius = float(np.abs(np.linalg.eigvalsh(scaled)).max(initial=0.0)) if scaled.size else 0.0
    if radius > 1.0 - 1e-13:
        W = W / (radius * (1.0 + 1e-12) + 1e-15)
    return W, w


def _certified(f, prob, W, w, tol):
    best = None
    for drop in (0.0, 1e-14, 1e-11, 1e-9, 1e-7):
        cW, cw = _repair(prob, W.copy(), w.copy(), drop)
        point = DualPoint(cW, cw)
        if best is None or point.value > best.value + 1e-15:
            best = point
    rep = check_feasible(f, best, tol)
    if not rep.feasible:
        best = DualPoint(np.zeros_like(W), prob.project_omega(np.ones_like(w)))
        rep = check_feasible(f, best, tol)
    return best, rep


def _solve_one(f, prob, rng, max_iter, tol, stall_tol):
    N = prob.N
    w = prob.project_omega(rng.dirichlet(np.ones(N)))
    W = rng.normal(scale=0.1, size=(N, N))
    W, w = prob.project(W, w)
    Z = np.zeros((prob.signed.shape[0], N, N))
    rho = 1.0
    used = 0
    inner_tol = 1e-3
    prev_res = math.inf
    prev_val = -math.inf
    converged = False
    while used < max_iter:
        W, w, Y, spent = _inner_spg(prob, W, w, Z, rho, min(INNER_CAP, max_iter - used), inner_tol)
        used += spent
        res = float(np.abs(Y - Z).max(initial=0.0)) / rho
        Z = Y
        val = float(W.sum())
        if res < tol * 1e-4 and abs(val - prev_val) < stall_tol * 1e-4:
            converged = True
            break
        if res > 0.5 * prev_res and rho < 1e4:
            rho *= 4.0
        prev_res, prev_val = res, val
        inner_tol = max(min(0.3 * inner_tol, res), 1e-11)
    return W, w, used, converged


def solve_adv(
    f: PartialBoolFn,
    starts: int = 8,
    max_iter: int = 5000,
    seed: int = 0,
    tol: float = 1e-8,
    stall_tol: float = 1e-6,
    balanced: bool = False,
) -> SolveReport:
    """Multi-start augmented Lagrangian ascent on the dual SDP.

    Each start runs spectral projected gradient on the augmented Lagrangian
    (eigenvalue penalty on every constraint matrix), with ``Omega`` projected
    to the trace-1 simplex and ``W`` restricted to its zero pattern.  The
    final iterate is rescaled to exact feasibility and re-certified, so
    ``value`` is always a valid lower bound.  With ``balanced`` each output
    class carries trace 1/2.
    """
    if f.size > MAX_DOMAIN:
        raise InvalidParameter(f"domain of {f.size} inputs exceeds {MAX_DOMAIN}")
    if starts < 1:
        raise InvalidParameter("need at least one start")
    prob = _DualProblem(f, balanced)
    best = None
    values = []
    total_iters = 0
    any_converged = False
    for s in range(starts):
        rng = np.random.default_rng([seed, s])
        W, w, used, conv = _solve_one(f, prob, rng, max_iter, tol, stall_tol)
        total_iters += used
        point, rep = _certified(f, prob, W, w, tol)
        values.append(point.value)
        any_converged |= conv
        if best is None or point.value > best[0].value:
            best = (point, rep)
    point, rep = best
    spread = max(values) - min(values)
    return SolveReport(
        value=point.value,
        residual=rep.min_eig,
        iterations=total_iters,
        starts=starts,
        converged=bool(any_converged and spread < max(stall_tol, 1e-3)),
        seed=seed,
        point=point,
        start_values=values,
    )


# -- composition ----------------------------------------------------------------

def extend_primed(matrix: np.ndarray, domain: Sequence, nbits: int) -> np.ndarray:
    """Zero-pad a matrix indexed by ``domain`` to all of ``{0,1}^nbits``."""
    idx = np.array([_bits_to_index(x) for x in domain], dtype=np.int64)
    if matrix.shape != (len(idx), len(idx)):
        raise InvalidParameter("matrix does not match domain size")
    out = np.zeros((1 << nbits, 1 << nbits))
    out[np.ix_(idx, idx)] = matrix
    return out


def _tilde_indices(g: PartialBoolFn, p: int) -> np.ndarray:
    """For each tuple in ``C^p`` (kron order), the hypercube index of its ``g``-image."""
    outs = np.array(g.outputs, dtype=np.int64)
    idx = np.zeros(1, dtype=np.int64)
    for _ in range(p):
        idx = (2 * idx[:, None] + outs[None, :]).ravel()
    return idx


def tilde_expand(primed: np.ndarray, g: PartialBoolFn, p: int | None = None) -> np.ndarray:
    """Re-index a matrix over ``{0,1}^p`` by ``C^p``: entry ``(x, y)`` is ``primed[g(x), g(y)]``."""
    size = primed.shape[0]
    if p is None:
        p = size.bit_length() - 1
    if primed.shape != (1 << p, 1 << p):
        raise InvalidParameter(f"expected a {1 << p}x{1 << p} matrix")
    idx = _tilde_indices(g, p)
    return primed[np.ix_(idx, idx)]


def kron_power(a: np.ndarray, p: int) -> np.ndarray:
    out = np.ones((1, 1))
    for _ in range(p):
        out = np.kron(out, a)
    return out


def _composed_positions(f: PartialBoolFn, g: PartialBoolFn):
    p = f.m
    D = {tuple(x): i for i, x in enumerate(f.domain)}
    positions, inputs, outputs = [], [], []
    for pos, combo in enumerate(product(range(g.size), repeat=p)):
        outer = tuple(g.outputs[c] for c in combo)
        if outer in D:
            positions.append(pos)
            inputs.append(sum((g.domain[c] for c in combo), ()))
            outputs.append(f.outputs[D[outer]])
    return np.array(positions, dtype=np.int64), inputs, outputs


def compose_function(f: PartialBoolFn, g: PartialBoolFn) -> PartialBoolFn:
    """``f o g`` on inputs ``(x^1, ..., x^p)``; bit ``(i-1)*m + j`` is bit ``j`` of ``x^i``."""
    _, inputs, outputs = _composed_positions(f, g)
    return PartialBoolFn(f.m * g.m, tuple(inputs), tuple(outputs))


@dataclass
class ComposeResult:
    point: DualPoint
    fn: PartialBoolFn
    c: float
    expected_value: float

    @property
    def objective(self) -> float:
        return self.point.value

    @property
    def trace(self) -> float:
        return float(self.point.omega.sum())


def compose_dual(
    f_point: DualPoint,
    g_point: DualPoint,
    f: PartialBoolFn,
    g: PartialBoolFn,
    tol: float = 1e-6,
) -> ComposeResult:
    """Dual point for ``f o g`` from points for the outer ``f`` and inner ``g``.

    With ``(V, Lambda)`` for ``f``, ``(W, Omega)`` for ``g``, ``d = sum(W)``
    and ``p = f.m``::

        U'       = c * tilde(V') o (d Omega + W)^{(x) p}
        Upsilon' = c * d^(p-1) * tilde(Lambda') o Omega^{(x) p},   c = 2^p d^-(p-1)

    restricted to the composed domain.  The ``g`` point must be balanced
    (each output class carries trace 1/2, ``d Omega +- W`` PSD).
    """
    for name, fn, pt in (("outer", f, f_point), ("inner", g, g_point)):
        rep = check_feasible(fn, pt, tol)
        if not rep.feasible:
            raise InvalidParameter(f"{name} point is infeasible: {rep}")
    d_g = g_point.value
    if d_g <= 0:
        raise InvalidParameter("inner point must have positive value")
    bal = check_balanced(g, g_point, d_g, tol)
    if not bal.balanced:
        raise InvalidParameter(f"inner point is not balanced: {bal}")
    p = f.m
    c = 2.0 ** p * d_g ** (-(p - 1))
    V_t = tilde_expand(extend_primed(f_point.W, f.domain, p), g, p)
    L_t = tilde_expand(extend_primed(f_point.Omega, f.domain, p), g, p)
    U_full = c * V_t * kron_power(d_g * g_point.Omega + g_point.W, p)
    Y_full = c * d_g ** (p - 1) * L_t * kron_power(g_point.Omega, p)
    keep, inputs, outputs = _composed_positions(f, g)
    U = U_full[np.ix_(keep, keep)]
    omega = np.diag(Y_full)[keep].copy()
    fn = PartialBoolFn(f.m * g.m, tuple(inputs), tuple(outputs))
    return ComposeResult(DualPoint(U, omega), fn, c, f_point.value * d_g)
