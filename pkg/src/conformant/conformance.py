"""Exact translations between naive Bayes and logistic regression.

A naive Bayes model *conforms* with a logistic regression classifier when
their class distributions agree on every total input.  The translation in
each direction is closed form:

* ``nb_to_lr`` maps a naive Bayes model to the unique classifier it conforms
  with (log-odds of the parameters).
* ``lr_to_nb`` picks one member of the infinite conformant family by fixing
  the per-feature conditionals of one class (the positive class for binary
  models, class 0 otherwise) and solving for everything else.

``check_conformance`` verifies agreement by brute-force enumeration.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .models import (
    LogisticRegressionModel,
    NaiveBayesModel,
    logit,
    lr_predict_batch,
    nb_posterior_batch,
    sigmoid,
    softmax,
    validate_nb,
)

__all__ = [
    "nb_to_lr",
    "lr_to_nb",
    "check_conformance",
    "conformant_parameters",
    "reference_class",
    "ConformanceCheck",
]

# Parameters this close to {0, 1} would produce effectively infinite weights;
# they are rejected rather than clamped so round trips stay exact.
BOUNDARY_EPS = 1e-12

_ENUM_LIMIT = 20


def reference_class(lr_or_nb) -> int:
    """Class whose conditionals act as the free parameters of the family."""
    return 1 if lr_or_nb.num_classes == 2 else 0


def _check_open_interval(values, what: str, eps: float = BOUNDARY_EPS):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{what} must be finite")
    if np.any(values < eps) or np.any(values > 1.0 - eps):
        raise ValueError(
            f"{what} must lie strictly inside ({eps}, {1 - eps}); "
            "boundary parameters correspond to infinite weights"
        )
    return values


def nb_to_lr(nb: NaiveBayesModel) -> LogisticRegressionModel:
    """The unique logistic regression a valid naive Bayes model conforms with.

    Binary models return the single positive-class weight row; multiclass
    models return the canonical gauge in which the class-0 row is zero
    (softmax predictions are invariant to that choice).
    """
    violations = validate_nb(nb)
    if violations:
        raise ValueError("invalid naive Bayes model: " + "; ".join(violations))
    _check_open_interval(nb.class_prior, "class prior")
    _check_open_interval(nb.cond, "conditional parameters")

    feature_odds = logit(nb.cond)                        # (K, n)
    log_stay = np.log1p(-nb.cond)                        # log P(x_i = 0 | c_k)
    bias = np.log(nb.class_prior) + log_stay.sum(axis=1)  # (K,)

    if nb.num_classes == 2:
        row = np.concatenate(
            [[bias[1] - bias[0]], feature_odds[1] - feature_odds[0]]
        )
        return LogisticRegressionModel(nb.num_features, 2, row[None, :])
    weights = np.column_stack([bias - bias[0], feature_odds - feature_odds[0]])
    return LogisticRegressionModel(nb.num_features, nb.num_classes, weights)


def conformant_parameters(delta: np.ndarray, theta: np.ndarray, ref: int):
    """Naive Bayes parameters for gauged weight rows ``delta`` and free
    conditionals ``theta`` bound to class ``ref``.

    Returns ``(prior, cond)`` with ``cond[ref] == theta`` exactly.
    """
    lt = logit(theta)
    cond = sigmoid((delta[:, 1:] - delta[ref, 1:]) + lt[None, :])
    cond[ref] = theta
    log_stay = np.log1p(-cond)
    scores = (delta[:, 0] - delta[ref, 0]) - (log_stay - log_stay[ref]).sum(axis=1)
    prior = softmax(scores)
    return prior, cond


def lr_to_nb(lr: LogisticRegressionModel, theta) -> NaiveBayesModel:
    """The unique conformant naive Bayes model with the given free parameters.

    ``theta[i]`` fixes ``P(x_i = 1 | c)`` for the positive class when
    ``num_classes == 2`` and for class 0 otherwise; it must lie strictly
    inside (0, 1).
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (lr.num_features,):
        raise ValueError(f"theta must have shape ({lr.num_features},)")
    _check_open_interval(theta, "theta")
    prior, cond = conformant_parameters(lr.gauged_rows(), theta, reference_class(lr))
    return NaiveBayesModel(lr.num_features, lr.num_classes, prior, cond)


class ConformanceCheck(NamedTuple):
    ok: bool
    max_deviation: float


def check_conformance(
    nb: NaiveBayesModel,
    lr: LogisticRegressionModel,
    tol: float,
    *,
    sample: int | None = None,
    seed: int = 0,
) -> ConformanceCheck:
    """Whether the two classifiers agree within ``tol`` on every total input.

    Enumerates all 2^n inputs, so n is capped at 20; pass ``sample`` to check
    a random subset instead for larger models.
    """
    if nb.num_features != lr.num_features or nb.num_classes != lr.num_classes:
        raise ValueError("models have mismatched dimensions")
    n = nb.num_features
    if sample is None:
        if n > _ENUM_LIMIT:
            raise ValueError(
                f"refusing exhaustive check for n={n} > {_ENUM_LIMIT}; "
                "pass sample=<count> to use a sampled check"
            )
        codes = np.arange(2 ** n, dtype=np.uint64)[:, None]
        X = ((codes >> np.arange(n, dtype=np.uint64)[None, :]) & 1).astype(float)
    else:
        rng = np.random.default_rng(seed)
        X = rng.integers(0, 2, size=(int(sample), n)).astype(float)
    dev = float(np.max(np.abs(nb_posterior_batch(nb, X) - lr_predict_batch(lr, X))))
    return ConformanceCheck(dev <= tol, dev)
