"""Geometric programs: posynomial algebra, the log-space convex transform,
and a deterministic barrier solver.

A monomial is ``b * x1^a1 * ... * xn^an`` with ``b > 0`` over positive
variables; a posynomial is a sum of monomials.  A geometric program minimizes
a monomial (or posynomial, handled through an epigraph variable) subject to
posynomial inequalities ``f(x) <= 1`` and monomial equalities ``g(x) = 1``.

Substituting ``u = log x`` turns monomials into affine functions of ``u`` and
posynomial constraints into log-sum-exp constraints, giving a smooth convex
program.  The solver

1. eliminates the affine equalities exactly through a null-space
   parameterization (they must hold to machine precision, not approximately),
2. finds a strictly feasible start from the supplied seed, the all-ones
   point, or a phase-1 subproblem, and
3. runs a damped-Newton log-barrier method with a geometric barrier schedule
   until the duality-gap estimate drops below ``tol``.

Everything is deterministic: identical inputs and options produce identical
iterates and solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "Monomial",
    "Posynomial",
    "GeometricProgram",
    "LogConvexProgram",
    "SolveOptions",
    "GPSolution",
    "eval_monomial",
    "eval_posynomial",
    "to_log_convex",
    "solve_gp",
    "format_program",
]

STATUS_OPTIMAL = "optimal"
STATUS_MAX_ITER = "max_iter"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"

_EPI_VAR = "__epi__"


@dataclass(frozen=True, init=False)
class Monomial:
    """``coefficient * prod(var ** exponent)`` with a positive coefficient."""

    coefficient: float
    exponents: Mapping[str, float]

    def __init__(self, coefficient: float, exponents: Mapping[str, float] = ()):
        coefficient = float(coefficient)
        if not (coefficient > 0.0 and math.isfinite(coefficient)):
            raise ValueError("monomial coefficient must be positive and finite")
        cleaned = {}
        for var, exp in dict(exponents).items():
            exp = float(exp)
            if not math.isfinite(exp):
                raise ValueError(f"exponent for {var!r} must be finite")
            if exp != 0.0:
                cleaned[str(var)] = exp
        object.__setattr__(self, "coefficient", coefficient)
        object.__setattr__(self, "exponents", MappingProxyType(cleaned))

    def variables(self) -> frozenset[str]:
        return frozenset(self.exponents)


@dataclass(frozen=True, init=False)
class Posynomial:
    """A nonempty sum of monomials."""

    terms: tuple[Monomial, ...]

    def __init__(self, terms: Sequence[Monomial]):
        terms = tuple(terms)
        if not terms:
            raise ValueError("a posynomial needs at least one term")
        for t in terms:
            if not isinstance(t, Monomial):
                raise TypeError("posynomial terms must be Monomial instances")
        object.__setattr__(self, "terms", terms)

    def variables(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for t in self.terms:
            out |= t.variables()
        return out


def _log_value(m: Monomial, assignment: Mapping[str, float]) -> float:
    total = math.log(m.coefficient)
    for var, exp in m.exponents.items():
        if var not in assignment:
            raise ValueError(f"no value assigned to variable {var!r}")
        value = float(assignment[var])
        if not (value > 0.0 and math.isfinite(value)):
            raise ValueError(f"variable {var!r} must be assigned a positive value")
        total += exp * math.log(value)
    return total


def eval_monomial(m: Monomial, assignment: Mapping[str, float]) -> float:
    return math.exp(_log_value(m, assignment))


def eval_posynomial(p: Posynomial | Monomial, assignment: Mapping[str, float]) -> float:
    if isinstance(p, Monomial):
        return eval_monomial(p, assignment)
    return float(sum(eval_monomial(t, assignment) for t in p.terms))


@dataclass(frozen=True, init=False)
class GeometricProgram:
    """Objective plus ``f(x) <= 1`` posynomials and ``g(x) = 1`` monomials."""

    objective: Monomial | Posynomial
    ineq_constraints: tuple[Posynomial, ...]
    eq_constraints: tuple[Monomial, ...]
    variables: tuple[str, ...]

    def __init__(
        self,
        objective: Monomial | Posynomial,
        ineq_constraints: Sequence[Posynomial] = (),
        eq_constraints: Sequence[Monomial] = (),
        variables: Sequence[str] = (),
    ):
        ineq = tuple(
            p if isinstance(p, Posynomial) else Posynomial([p]) for p in ineq_constraints
        )
        eq = tuple(eq_constraints)
        for g in eq:
            if not isinstance(g, Monomial):
                raise TypeError("equality constraints must be monomials")
        declared = tuple(dict.fromkeys(str(v) for v in variables))
        referenced: set[str] = set(
            objective.variables()
            if isinstance(objective, (Monomial, Posynomial))
            else ()
        )
        for p in ineq:
            referenced |= p.variables()
        for g in eq:
            referenced |= g.variables()
        if not declared:
            declared = tuple(sorted(referenced))
        missing = referenced - set(declared)
        if missing:
            raise ValueError(f"variables referenced but not declared: {sorted(missing)}")
        object.__setattr__(self, "objective", objective)
        object.__setattr__(self, "ineq_constraints", ineq)
        object.__setattr__(self, "eq_constraints", eq)
        object.__setattr__(self, "variables", declared)


@dataclass(frozen=True)
class LogConvexProgram:
    """Affine data of the ``u = log x`` transform.

    ``log f0(u) = LSE(obj_A @ u + obj_b)`` (a single row when the objective is
    a monomial, i.e. affine); each inequality becomes
    ``LSE(A @ u + b) <= 0`` and each equality an affine row of
    ``eq_A @ u + eq_b = 0``.  ``provenance[j]`` says which constraint of the
    source program each piece came from.
    """

    variables: tuple[str, ...]
    obj_A: np.ndarray
    obj_b: np.ndarray
    ineq_A: tuple[np.ndarray, ...]
    ineq_b: tuple[np.ndarray, ...]
    eq_A: np.ndarray
    eq_b: np.ndarray
    provenance: tuple[str, ...]


def _affine_rows(terms: Sequence[Monomial], index: Mapping[str, int]):
    A = np.zeros((len(terms), len(index)))
    b = np.zeros(len(terms))
    for j, t in enumerate(terms):
        b[j] = math.log(t.coefficient)
        for var, exp in t.exponents.items():
            A[j, index[var]] = exp
    return A, b


def to_log_convex(gp: GeometricProgram) -> LogConvexProgram:
    """Change of variables ``u = log x`` applied to every piece of ``gp``."""
    index = {v: i for i, v in enumerate(gp.variables)}
    provenance = []
    if isinstance(gp.objective, Monomial):
        obj_terms = [gp.objective]
        provenance.append("objective: monomial -> affine")
    else:
        obj_terms = list(gp.objective.terms)
        provenance.append(
            f"objective: posynomial ({len(obj_terms)} terms) -> log-sum-exp"
        )
    obj_A, obj_b = _affine_rows(obj_terms, index)
    ineq_A, ineq_b = [], []
    for i, p in enumerate(gp.ineq_constraints):
        A, b = _affine_rows(p.terms, index)
        ineq_A.append(A)
        ineq_b.append(b)
        provenance.append(
            f"ineq[{i}]: posynomial <= 1 ({len(p.terms)} terms) -> log-sum-exp <= 0"
        )
    if gp.eq_constraints:
        eq_A, eq_b = _affine_rows(gp.eq_constraints, index)
    else:
        eq_A = np.zeros((0, len(index)))
        eq_b = np.zeros(0)
    for i in range(len(gp.eq_constraints)):
        provenance.append(f"eq[{i}]: monomial == 1 -> affine == 0")
    return LogConvexProgram(
        variables=gp.variables,
        obj_A=obj_A,
        obj_b=obj_b,
        ineq_A=tuple(ineq_A),
        ineq_b=tuple(ineq_b),
        eq_A=eq_A,
        eq_b=eq_b,
        provenance=tuple(provenance),
    )


@dataclass(frozen=True)
class SolveOptions:
    """Deterministic solver knobs.

    ``seed`` is an optional strictly feasible starting assignment (positive
    values per variable); with policy ``"auto"`` the solver falls back to the
    all-ones point and then to a phase-1 subproblem, while ``"phase1"``
    always runs phase 1.
    """

    max_iter: int = 2000
    tol: float = 1e-8
    seed: Mapping[str, float] | None = None
    initial_point_policy: str = "auto"
    mu0: float = 1.0
    mu_factor: float = 10.0

    def __post_init__(self):
        if self.initial_point_policy not in ("auto", "phase1"):
            raise ValueError("initial_point_policy must be 'auto' or 'phase1'")
        if not (0 < self.tol < 1):
            raise ValueError("tol must be in (0, 1)")
        if self.mu_factor <= 1:
            raise ValueError("mu_factor must exceed 1")


@dataclass(frozen=True)
class GPSolution:
    assignment: dict[str, float]
    objective_value: float
    log_objective: float
    status: str
    kkt: dict[str, float]
    iterations: int


def _lse(A: np.ndarray, b: np.ndarray, z: np.ndarray) -> float:
    y = A @ z + b
    m = float(np.max(y))
    return m + math.log(float(np.sum(np.exp(y - m))))


def _lse_grad_hess(A: np.ndarray, b: np.ndarray, z: np.ndarray):
    y = A @ z + b
    m = float(np.max(y))
    w = np.exp(y - m)
    s = float(w.sum())
    val = m + math.log(s)
    w /= s
    grad = A.T @ w
    hess = A.T @ (A * w[:, None]) - np.outer(grad, grad)
    return val, grad, hess


class _BarrierResult:
    __slots__ = ("z", "iterations", "status", "t")

    def __init__(self, z, iterations, status, t):
        self.z = z
        self.iterations = iterations
        self.status = status
        self.t = t


def _barrier_minimize(c, ineqs, z0, opts: SolveOptions, iter_budget, early_stop=None):
    """Minimize ``c @ z`` subject to ``LSE_i(z) <= 0`` from a strictly
    feasible ``z0`` by the log-barrier method.  ``early_stop(z)`` may end the
    run as soon as some external goal (phase-1 feasibility) is met.
    """
    z = np.array(z0, dtype=float)
    m = len(ineqs)
    t = 1.0 / opts.mu0
    iterations = 0

    def phi(zc):
        vals = [_lse(A, b, zc) for A, b in ineqs]
        if max(vals) >= 0.0:
            return None
        return t * float(c @ zc) - sum(math.log(-v) for v in vals)

    while True:
        # inner: damped Newton on the barrier objective at this t
        inner_steps = 0
        while True:
            if iterations >= iter_budget:
                return _BarrierResult(z, iterations, STATUS_MAX_ITER, t)
            grad = t * c.copy()
            hess = np.zeros((z.size, z.size))
            for A, b in ineqs:
                val, g, h = _lse_grad_hess(A, b, z)
                grad += g / (-val)
                hess += h / (-val) + np.outer(g, g) / (val * val)
            step_dir = _solve_psd(hess, -grad)
            decrement = float(-grad @ step_dir)
            if decrement <= 2e-10:
                break
            f0 = phi(z)
            slope = float(grad @ step_dir)
            # cap the move in log space so flat (near-singular) directions
            # cannot fling the iterate out to astronomical coordinates
            norm = float(np.linalg.norm(step_dir))
            step = min(1.0, 10.0 / norm) if norm > 0 else 1.0
            while True:
                candidate = z + step * step_dir
                fc = phi(candidate)
                if fc is not None and fc <= f0 + 0.25 * step * slope:
                    break
                step *= 0.5
                if step < 1e-20:
                    candidate = z
                    fc = f0
                    break
            if candidate is z:
                break
            z = candidate
            iterations += 1
            inner_steps += 1
            if early_stop is not None and early_stop(z):
                return _BarrierResult(z, iterations, STATUS_OPTIMAL, t)
            # |u| beyond ~500 means x outside e^(+-500): no well-posed program
            # optimizes there, so treat the run as an unbounded escape
            if float(np.max(np.abs(z))) > 500.0:
                return _BarrierResult(z, iterations, STATUS_UNBOUNDED, t)
            # stop re-centering once improvements fall below float precision
            if f0 - fc < 1e-13 * (1.0 + abs(f0)) or inner_steps >= 100:
                break
        if m == 0 or m / t < opts.tol:
            return _BarrierResult(z, iterations, STATUS_OPTIMAL, t)
        t *= opts.mu_factor


def _solve_psd(H: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    ridge = 0.0
    scale = max(float(np.trace(H)) / max(H.shape[0], 1), 1.0)
    for _ in range(8):
        try:
            sol = np.linalg.solve(H + ridge * np.eye(H.shape[0]), rhs)
            if np.all(np.isfinite(sol)):
                return sol
        except np.linalg.LinAlgError:
            pass
        ridge = scale * 1e-12 if ridge == 0.0 else ridge * 100.0
    return np.linalg.lstsq(H, rhs, rcond=None)[0]


def _null_space(A: np.ndarray) -> np.ndarray:
    if A.shape[0] == 0:
        return np.eye(A.shape[1])
    _, s, vt = np.linalg.svd(A)
    tol = max(A.shape) * np.finfo(float).eps * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > tol))
    return vt[rank:].T


def solve_gp(gp: GeometricProgram, opts: SolveOptions | None = None) -> GPSolution:
    """Solve a geometric program to its global optimum.

    Infeasibility and iteration exhaustion are reported through ``status``
    (with the best iterate so far), never raised.
    """
    opts = opts or SolveOptions()
    lcp = to_log_convex(gp)
    names = list(lcp.variables)
    nvar = len(names)

    # epigraph variable for posynomial objectives: minimize e subject to
    # LSE(obj - e) <= 0, which keeps the working objective affine
    epigraph = lcp.obj_A.shape[0] > 1
    next_dim = nvar + 1 if epigraph else nvar
    ineq_A = [np.hstack([A, np.zeros((A.shape[0], 1))]) if epigraph else A for A in lcp.ineq_A]
    ineq_b = list(lcp.ineq_b)
    if epigraph:
        ineq_A.append(np.hstack([lcp.obj_A, -np.ones((lcp.obj_A.shape[0], 1))]))
        ineq_b.append(lcp.obj_b.copy())
        c_full = np.zeros(next_dim)
        c_full[-1] = 1.0
        eq_A = (
            np.hstack([lcp.eq_A, np.zeros((lcp.eq_A.shape[0], 1))])
            if lcp.eq_A.shape[0]
            else np.zeros((0, next_dim))
        )
    else:
        c_full = lcp.obj_A[0].copy()
        eq_A = lcp.eq_A
    eq_b = lcp.eq_b

    # particular solution of the equality system
    infeasible_eq = False
    if eq_A.shape[0]:
        u_part = np.linalg.lstsq(eq_A, -eq_b, rcond=None)[0]
        if float(np.max(np.abs(eq_A @ u_part + eq_b))) > 1e-8 * max(
            1.0, float(np.max(np.abs(eq_b)))
        ):
            infeasible_eq = True
        basis = _null_space(eq_A)
    else:
        u_part = np.zeros(next_dim)
        basis = np.eye(next_dim)

    def finish(u_full, status, iterations, t):
        u = u_full[:nvar]
        assignment = {
            name: float(math.exp(min(u[i], 700.0))) for i, name in enumerate(names)
        }
        log_obj = _lse(lcp.obj_A, lcp.obj_b, u)
        kkt = _kkt_residuals(lcp, u, ineq_A, ineq_b, c_full, u_full, t, basis)
        try:
            obj_value = math.exp(log_obj)
        except OverflowError:
            obj_value = math.inf
        return GPSolution(assignment, obj_value, log_obj, status, kkt, iterations)

    if infeasible_eq:
        return finish(u_part, STATUS_INFEASIBLE, 0, 1.0)

    # fold the equality parameterization u = u_part + basis @ z into the data
    cz = basis.T @ c_full
    ineqs_z = [(A @ basis, b + A @ u_part) for A, b in zip(ineq_A, ineq_b)]

    def z_from_u(u_full):
        return basis.T @ (u_full - u_part)

    def u_from_z(z):
        return u_part + basis @ z

    def max_violation(z):
        if not ineqs_z:
            return -math.inf
        return max(_lse(A, b, z) for A, b in ineqs_z)

    # starting point: seed, then all-ones, then phase 1
    candidates = []
    if opts.initial_point_policy == "auto":
        if opts.seed is not None:
            u0 = np.zeros(next_dim)
            try:
                for i, name in enumerate(names):
                    u0[i] = math.log(float(opts.seed[name]))
            except (KeyError, ValueError):
                u0 = None
            if u0 is not None:
                if epigraph:
                    u0[-1] = _lse(lcp.obj_A, lcp.obj_b, u0[:nvar]) + 1.0
                candidates.append(u0)
        ones = np.zeros(next_dim)
        if epigraph:
            ones[-1] = _lse(lcp.obj_A, lcp.obj_b, ones[:nvar]) + 1.0
        candidates.append(ones)

    z0 = None
    for u0 in candidates:
        # project onto the equality manifold; accept only if u0 already
        # satisfied the equalities (projection must not move it materially)
        zc = z_from_u(u0)
        if float(np.max(np.abs(u_from_z(zc) - u0), initial=0.0)) > 1e-6:
            continue
        if max_violation(zc) < 0.0:
            z0 = zc
            break

    iterations = 0
    if z0 is None:
        z0, phase_iters, feasible = _phase1(ineqs_z, basis.shape[1], opts)
        iterations += phase_iters
        if not feasible:
            return finish(u_from_z(z0), STATUS_INFEASIBLE, iterations, 1.0)

    if not ineqs_z:
        # equality-constrained affine objective: optimal iff the reduced
        # gradient vanishes, otherwise the program is unbounded
        if float(np.max(np.abs(cz), initial=0.0)) > 1e-12:
            return finish(u_from_z(z0), STATUS_UNBOUNDED, iterations, 1.0)
        return finish(u_from_z(z0), STATUS_OPTIMAL, iterations, 1.0)

    result = _barrier_minimize(cz, ineqs_z, z0, opts, opts.max_iter - iterations)
    iterations += result.iterations
    return finish(u_from_z(result.z), result.status, iterations, result.t)


def _phase1(ineqs_z, dim, opts: SolveOptions):
    """Find a strictly feasible point for ``LSE_i(z) <= 0`` by minimizing the
    max infeasibility through a slack variable."""
    if not ineqs_z:
        return np.zeros(dim), 0, True
    z = np.zeros(dim)
    vals = [_lse(A, b, z) for A, b in ineqs_z]
    s0 = max(vals) + 1.0
    aug = [(np.hstack([A, -np.ones((A.shape[0], 1))]), b) for A, b in ineqs_z]
    c = np.zeros(dim + 1)
    c[-1] = 1.0
    x0 = np.concatenate([z, [s0]])

    def feasible_enough(x):
        return max(_lse(A, b, x[:dim]) for A, b in ineqs_z) < -1e-6

    result = _barrier_minimize(
        c, aug, x0, opts, opts.max_iter, early_stop=feasible_enough
    )
    z = result.z[:dim]
    ok = max(_lse(A, b, z) for A, b in ineqs_z) < 0.0
    return z, result.iterations, ok


def _kkt_residuals(lcp, u, ineq_A, ineq_b, c_full, u_full, t, basis):
    eq_res = (
        float(np.max(np.abs(lcp.eq_A @ u + lcp.eq_b))) if lcp.eq_A.shape[0] else 0.0
    )
    gap = len(ineq_A) / t if ineq_A else 0.0
    worst = 0.0
    lagrangian_grad = c_full.copy()
    for A, b in zip(ineq_A, ineq_b):
        val, g, _ = _lse_grad_hess(A, b, u_full)
        worst = max(worst, val)
        if val < 0.0:
            lagrangian_grad += g / (t * (-val))
    # measured along the equality manifold, where the equality duals vanish
    reduced = basis.T @ lagrangian_grad
    return {
        "stationarity": float(np.max(np.abs(reduced), initial=0.0)),
        "ineq_violation": max(worst, 0.0),
        "eq_residual": eq_res,
        "duality_gap": gap,
    }


def format_program(gp: GeometricProgram) -> str:
    """Human-readable dump, one constraint per line (debugging aid)."""

    def mono(m: Monomial) -> str:
        parts = [f"{m.coefficient:.6g}"]
        parts.extend(f"{v}^{e:g}" for v, e in sorted(m.exponents.items()))
        return " * ".join(parts)

    def posy(p: Posynomial) -> str:
        return " + ".join(mono(t) for t in p.terms)

    lines = []
    if isinstance(gp.objective, Monomial):
        lines.append(f"minimize {mono(gp.objective)}")
    else:
        lines.append(f"minimize {posy(gp.objective)}")
    for p in gp.ineq_constraints:
        lines.append(f"s.t. {posy(p)} <= 1")
    for g in gp.eq_constraints:
        lines.append(f"s.t. {mono(g)} == 1")
    lines.append(f"over {', '.join(gp.variables)}")
    return "\n".join(lines)
