"""Fit the maximum-likelihood naive Bayes model conformant with a classifier.

Two independent routes to the same optimum ship side by side:

* ``method="gp"`` builds the geometric program whose monomial objective is the
  inverse expected joint likelihood on a class-completed dataset and whose
  constraints pin the implied classifier weights to the target (plus relaxed
  sum-to-one inequalities), then solves it with :mod:`conformant.geometric`.
* ``method="reduced"`` (the default) parameterizes the conformant family by
  the free per-feature conditionals and maximizes the exact marginal
  log-likelihood by projected gradient ascent with a backtracking line
  search.  The sum-to-one constraints hold exactly by construction.

The two must agree; tests use each as the oracle for the other.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .conformance import (
    check_conformance,
    conformant_parameters,
    lr_to_nb,
    reference_class,
)
from .geometric import (
    STATUS_OPTIMAL,
    GeometricProgram,
    Monomial,
    Posynomial,
    SolveOptions,
    eval_posynomial,
    solve_gp,
)
from .models import (
    BinaryDataset,
    LogisticRegressionModel,
    NaiveBayesModel,
    logsumexp,
    lr_predict_batch,
    nb_log_joint_batch,
)

__all__ = [
    "ALPHA_LR_POSTERIOR",
    "ALPHA_UNIFORM",
    "FitOptions",
    "FitReport",
    "FitResult",
    "completed_dataset",
    "build_nacl_program",
    "fit_nacl",
    "marginal_log_likelihood",
    "prior_var",
    "cond_var",
]

ALPHA_LR_POSTERIOR = "posterior"
ALPHA_UNIFORM = "uniform"

_ACTIVE_TOL = 1e-6


def prior_var(k: int) -> str:
    return f"c{k}"


def cond_var(i: int, k: int, bit: int) -> str:
    return f"x{i}|c{k}" if bit else f"!x{i}|c{k}"


def _alpha_weights(lr, rows, policy):
    if policy == ALPHA_UNIFORM:
        return np.full((rows.shape[0], lr.num_classes), 1.0 / lr.num_classes)
    if policy == ALPHA_LR_POSTERIOR:
        return lr_predict_batch(lr, rows.astype(float))
    raise ValueError(f"unknown alpha policy {policy!r}")


def completed_dataset(
    d: BinaryDataset,
    lr: LogisticRegressionModel,
    alpha_policy: str = ALPHA_LR_POSTERIOR,
) -> BinaryDataset:
    """Expand each row with every class label, weighted so the per-row
    weights form a distribution over classes (labels on ``d`` are ignored)."""
    if d.num_features != lr.num_features:
        raise ValueError("dataset and classifier have mismatched feature counts")
    K = lr.num_classes
    alpha = _alpha_weights(lr, d.rows, alpha_policy)
    rows = np.repeat(d.rows, K, axis=0)
    labels = np.tile(np.arange(K), d.num_rows)
    return BinaryDataset(rows=rows, labels=labels, weights=alpha.reshape(-1))


def build_nacl_program(
    lr: LogisticRegressionModel,
    d: BinaryDataset,
    alpha_policy: str = ALPHA_LR_POSTERIOR,
) -> GeometricProgram:
    """Geometric program for conformant naive Bayes learning.

    Variables are the class priors plus both conditionals per feature and
    class.  The objective is the single monomial
    ``prod (theta_c * prod theta_{x|c}) ** -alpha`` over the class-completed
    dataset; equalities force the model's implied weights to match ``lr``;
    the sum-to-one requirements are relaxed to posynomial inequalities.
    """
    if d.num_features != lr.num_features:
        raise ValueError("dataset and classifier have mismatched feature counts")
    n, K = lr.num_features, lr.num_classes
    rows, counts = d.aggregate()
    alpha = _alpha_weights(lr, rows, alpha_policy) if rows.shape[0] else np.zeros((0, K))
    weight = alpha * counts[:, None]          # (R, K) total weight per row/class

    variables = [prior_var(k) for k in range(K)]
    for i in range(n):
        for k in range(K):
            variables.append(cond_var(i, k, 1))
            variables.append(cond_var(i, k, 0))

    exponents: dict[str, float] = {}
    class_mass = weight.sum(axis=0)           # (K,)
    ones_mass = rows.T.astype(float) @ weight  # (n, K): weight of x_i = 1
    for k in range(K):
        if class_mass[k]:
            exponents[prior_var(k)] = -float(class_mass[k])
        for i in range(n):
            on = float(ones_mass[i, k])
            off = float(class_mass[k] - ones_mass[i, k])
            if on:
                exponents[cond_var(i, k, 1)] = -on
            if off:
                exponents[cond_var(i, k, 0)] = -off
    objective = Monomial(1.0, exponents)

    delta = lr.gauged_rows()
    equalities = []
    for k in range(1, K):
        bias_exps = {prior_var(k): -1.0, prior_var(0): 1.0}
        for i in range(n):
            bias_exps[cond_var(i, k, 0)] = -1.0
            bias_exps[cond_var(i, 0, 0)] = 1.0
        equalities.append(Monomial(float(np.exp(delta[k, 0])), bias_exps))
        for i in range(n):
            equalities.append(
                Monomial(
                    float(np.exp(delta[k, i + 1])),
                    {
                        cond_var(i, k, 1): -1.0,
                        cond_var(i, k, 0): 1.0,
                        cond_var(i, 0, 1): 1.0,
                        cond_var(i, 0, 0): -1.0,
                    },
                )
            )

    inequalities = [
        Posynomial([Monomial(1.0, {prior_var(k): 1.0}) for k in range(K)])
    ]
    for i in range(n):
        for k in range(K):
            inequalities.append(
                Posynomial(
                    [
                        Monomial(1.0, {cond_var(i, k, 1): 1.0}),
                        Monomial(1.0, {cond_var(i, k, 0): 1.0}),
                    ]
                )
            )
    return GeometricProgram(objective, inequalities, equalities, variables)


def marginal_log_likelihood(nb: NaiveBayesModel, rows, counts=None) -> float:
    """sum_x n(x) * log P(x) for the given rows (counts default to 1)."""
    rows = np.asarray(rows, dtype=float)
    if rows.shape[0] == 0:
        return 0.0
    counts = np.ones(rows.shape[0]) if counts is None else np.asarray(counts, float)
    per_row = logsumexp(nb_log_joint_batch(nb, rows), axis=1)
    return float(per_row @ counts)


@dataclass(frozen=True)
class FitOptions:
    method: str = "reduced"
    alpha_policy: str = ALPHA_LR_POSTERIOR
    clamp_eps: float = 1e-4
    solver: SolveOptions = field(default_factory=SolveOptions)
    max_iter: int = 20000
    grad_tol_per_row: float = 1e-8

    def __post_init__(self):
        if self.method not in ("reduced", "gp"):
            raise ValueError("method must be 'reduced' or 'gp'")
        if not (0 < self.clamp_eps < 0.5):
            raise ValueError("clamp_eps must be in (0, 0.5)")


@dataclass(frozen=True)
class FitReport:
    method: str
    alpha_policy: str
    log_likelihood: float
    iterations: int
    conformance_max_dev: float
    active_inequalities: bool
    status: str = "ok"

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "alpha_policy": self.alpha_policy,
            "log_likelihood": self.log_likelihood,
            "iterations": self.iterations,
            "conformance_max_dev": self.conformance_max_dev,
            "active_inequalities": self.active_inequalities,
        }


@dataclass(frozen=True)
class FitResult:
    model: NaiveBayesModel
    report: FitReport


def _conformance_dev(nb, lr) -> float:
    if nb.num_features <= 12:
        return check_conformance(nb, lr, 0.0).max_deviation
    return check_conformance(nb, lr, 0.0, sample=4096).max_deviation


def fit_nacl(
    lr: LogisticRegressionModel,
    d: BinaryDataset,
    opts: FitOptions | None = None,
) -> FitResult:
    """Maximize the dataset's marginal likelihood over the conformant family.

    An empty dataset yields the family member with all free conditionals at
    0.5 (with a warning).  Solver trouble is reported through
    ``report.status`` together with the best iterate, never raised.
    """
    opts = opts or FitOptions()
    if d.num_features != lr.num_features:
        raise ValueError("dataset and classifier have mismatched feature counts")
    if d.num_rows == 0:
        warnings.warn("empty dataset: returning the flat conformant model")
        nb = lr_to_nb(lr, np.full(lr.num_features, 0.5))
        report = FitReport(
            method=opts.method,
            alpha_policy=opts.alpha_policy,
            log_likelihood=0.0,
            iterations=0,
            conformance_max_dev=_conformance_dev(nb, lr),
            active_inequalities=True,
        )
        return FitResult(nb, report)
    rows, counts = d.aggregate()
    if opts.method == "gp":
        return _fit_gp(lr, d, rows, counts, opts)
    return _fit_reduced(lr, rows, counts, opts)


# ---------------------------------------------------------------------------
# reduced parameterization: exact marginal likelihood over theta


def _reduced_objective(delta, ref, rows, counts):
    X = rows.astype(float)
    total = float(counts.sum())
    ones = counts @ X  # (n,) weighted count of x_i = 1

    def ll_grad(theta):
        prior, cond = conformant_parameters(delta, theta, ref)
        with np.errstate(divide="ignore"):
            log_prior = np.log(prior)
            log_q = np.log(cond)
            log_1mq = np.log1p(-cond)
        joint = log_prior[None, :] + X @ log_q.T + (1.0 - X) @ log_1mq.T
        ll = float(logsumexp(joint, axis=1) @ counts)
        mean = prior @ cond  # model marginal P(x_i = 1)
        grad = (ones - total * mean) / (theta * (1.0 - theta))
        return ll, grad

    return ll_grad


def _project(theta, eps):
    return np.clip(theta, eps, 1.0 - eps)


def _ascend(ll_grad, theta0, eps, max_iter, grad_tol):
    """Projected gradient ascent with a backtracking (Armijo) line search.

    The initial step of each iteration uses a spectral (secant) guess, then
    backtracks; convergence is declared on the projected gradient residual.
    """
    theta = _project(np.array(theta0, dtype=float), eps)
    ll, grad = ll_grad(theta)
    step = 1.0 / max(1.0, float(np.max(np.abs(grad))))
    prev_theta, prev_grad = None, None
    iterations = 0
    converged = False
    for _ in range(max_iter):
        residual = np.where(
            theta <= eps, np.maximum(grad, 0.0),
            np.where(theta >= 1.0 - eps, np.minimum(grad, 0.0), grad),
        )
        if float(np.max(np.abs(residual), initial=0.0)) <= grad_tol:
            converged = True
            break
        if prev_theta is not None:
            s = theta - prev_theta
            y = grad - prev_grad
            sy = float(-(s @ y))  # ascent: curvature along the last step
            if sy > 1e-18:
                step = float(s @ s) / sy
            step = min(max(step, 1e-12), 1e8)
        accepted = False
        for _ in range(60):
            candidate = _project(theta + step * grad, eps)
            move = candidate - theta
            if float(np.max(np.abs(move), initial=0.0)) < 1e-14:
                break
            cand_ll, cand_grad = ll_grad(candidate)
            if cand_ll >= ll + 1e-4 * float(grad @ move):
                prev_theta, prev_grad = theta, grad
                theta, ll, grad = candidate, cand_ll, cand_grad
                accepted = True
                break
            step *= 0.5
        iterations += 1
        if not accepted:
            converged = True  # no ascent step possible at line-search floor
            break
    return theta, ll, iterations, converged


def _fit_reduced(lr, rows, counts, opts: FitOptions) -> FitResult:
    n = lr.num_features
    ref = reference_class(lr)
    delta = lr.gauged_rows()
    eps = opts.clamp_eps
    ll_grad = _reduced_objective(delta, ref, rows, counts)
    grad_tol = opts.grad_tol_per_row * max(1.0, float(counts.sum()))

    data_mean = (counts @ rows.astype(float)) / float(counts.sum())
    starts = [
        np.full(n, 0.5),
        _project(data_mean, eps),
        np.full(n, 0.25),
        np.full(n, 0.75),
    ]
    best = None
    total_iterations = 0
    all_converged = True
    for theta0 in starts:
        theta, ll, iters, converged = _ascend(
            ll_grad, theta0, eps, opts.max_iter, grad_tol
        )
        total_iterations += iters
        all_converged = all_converged and converged
        if best is None or ll > best[1]:
            best = (theta, ll)
    theta, ll = best
    nb = lr_to_nb(lr, theta)
    report = FitReport(
        method="reduced",
        alpha_policy=opts.alpha_policy,
        log_likelihood=ll,
        iterations=total_iterations,
        conformance_max_dev=_conformance_dev(nb, lr),
        active_inequalities=True,  # parameters sum to one exactly by construction
        status="ok" if all_converged else "max_iter",
    )
    return FitResult(nb, report)


# ---------------------------------------------------------------------------
# geometric-program route


def _gp_seed_assignment(lr, shrink=1e-3) -> dict[str, float]:
    """Strictly feasible start: the flat conformant model scaled slightly
    inward (uniform scaling preserves every weight-matching equality)."""
    nb0 = lr_to_nb(lr, np.full(lr.num_features, 0.5))
    scale = 1.0 - shrink
    seed = {}
    for k in range(lr.num_classes):
        seed[prior_var(k)] = scale * float(nb0.class_prior[k])
        for i in range(lr.num_features):
            seed[cond_var(i, k, 1)] = scale * float(nb0.cond[k, i])
            seed[cond_var(i, k, 0)] = scale * float(1.0 - nb0.cond[k, i])
    return seed


def _fit_gp(lr, d, rows, counts, opts: FitOptions) -> FitResult:
    program = build_nacl_program(lr, d, opts.alpha_policy)
    solver_opts = opts.solver
    if solver_opts.seed is None:
        solver_opts = replace(solver_opts, seed=_gp_seed_assignment(lr))
    solution = solve_gp(program, solver_opts)

    ref = reference_class(lr)
    theta = np.empty(lr.num_features)
    for i in range(lr.num_features):
        on = solution.assignment[cond_var(i, ref, 1)]
        off = solution.assignment[cond_var(i, ref, 0)]
        theta[i] = on / (on + off)
    theta = _project(theta, opts.clamp_eps)
    nb = lr_to_nb(lr, theta)

    active = all(
        eval_posynomial(p, solution.assignment) >= 1.0 - _ACTIVE_TOL
        for p in program.ineq_constraints
    )
    report = FitReport(
        method="gp",
        alpha_policy=opts.alpha_policy,
        log_likelihood=marginal_log_likelihood(nb, rows, counts),
        iterations=solution.iterations,
        conformance_max_dev=_conformance_dev(nb, lr),
        active_inequalities=active,
        status="ok" if solution.status == STATUS_OPTIMAL else solution.status,
    )
    return FitResult(nb, report)
