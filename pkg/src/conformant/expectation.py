"""Expected predictions under missing features.

``expected_prediction`` is the linear-time naive Bayes path: conditioning on
the observed features alone already averages the classifier over every
completion of the missing ones.  ``brute_force_expectation`` is the
independent oracle that enumerates completions explicitly, and
``linear_expected_prediction`` is the closed form for plain linear scores
under a fully factorized feature distribution (where mean imputation is
exact).
"""

from __future__ import annotations

from itertools import product
from typing import Callable

import numpy as np

from .models import (
    NaiveBayesModel,
    PartialObservation,
    nb_marginal,
    softmax,
)

__all__ = [
    "expected_prediction",
    "brute_force_expectation",
    "linear_expected_prediction",
]

_ENUM_LIMIT = 20


def expected_prediction(nb: NaiveBayesModel, y: PartialObservation) -> np.ndarray:
    """P(C | y): the expectation of the model's own posterior over the
    conditional distribution of the missing features.

    Runs in time linear in the number of observed features.  A total ``y``
    reduces to the ordinary posterior; an empty ``y`` returns the class prior.
    """
    y.check_bounds(nb.num_features)
    with np.errstate(divide="ignore"):
        score = np.log(nb.class_prior).copy()
        log_q = np.log(nb.cond)
        log_1mq = np.log1p(-nb.cond)
    for idx, bit in y.assignments.items():
        score += log_q[:, idx] if bit else log_1mq[:, idx]
    return softmax(score)


def expected_prediction_masked(nb: NaiveBayesModel, X, observed) -> np.ndarray:
    """Vectorized expected prediction: row ``j`` of ``X`` with observation
    mask ``observed[j]`` (True where the feature is seen).  Shape (N, K)."""
    X = np.asarray(X, dtype=float)
    O = np.asarray(observed, dtype=float)
    if X.shape != O.shape or X.shape[1] != nb.num_features:
        raise ValueError("X and observed must both be (N, num_features)")
    with np.errstate(divide="ignore"):
        log_prior = np.log(nb.class_prior)
        log_q = np.log(nb.cond)
        log_1mq = np.log1p(-nb.cond)
    scores = log_prior[None, :] + (O * X) @ log_q.T + (O * (1.0 - X)) @ log_1mq.T
    return softmax(scores, axis=1)


def brute_force_expectation(
    f: Callable[[np.ndarray], float | np.ndarray],
    p: NaiveBayesModel,
    y: PartialObservation,
):
    """E[f(X) | y] under ``p`` by enumerating every completion of ``y``.

    ``f`` maps a total bit vector to a real number or a vector; the weights
    P(m | y) come from ratios of :func:`nb_marginal`.  Refuses more than
    20 missing features.
    """
    y.check_bounds(p.num_features)
    missing = [i for i in range(p.num_features) if i not in y.assignments]
    if len(missing) > _ENUM_LIMIT:
        raise ValueError(
            f"refusing enumeration over {len(missing)} > {_ENUM_LIMIT} missing features"
        )
    denom = nb_marginal(p, y)
    if denom <= 0.0:
        raise ValueError("observation has zero probability under p")
    x = np.zeros(p.num_features)
    for idx, bit in y.assignments.items():
        x[idx] = bit
    total = None
    for bits in product((0, 1), repeat=len(missing)):
        for idx, bit in zip(missing, bits):
            x[idx] = bit
        weight = nb_marginal(p, PartialObservation.total(x)) / denom
        value = np.asarray(f(x.copy()), dtype=float) * weight
        total = value if total is None else total + value
    return float(total) if total.ndim == 0 else total


def linear_expected_prediction(weights, means, y: PartialObservation) -> float:
    """Expectation of the linear score ``w0 + sum_i w_i x_i`` when the missing
    features are independent with the given means: observed features keep
    their values, missing ones contribute ``w_i * mean_i``.
    """
    weights = np.asarray(weights, dtype=float)
    means = np.asarray(means, dtype=float)
    n = weights.shape[0] - 1
    if means.shape != (n,):
        raise ValueError(f"means must have shape ({n},)")
    if np.any(means < 0.0) or np.any(means > 1.0):
        raise ValueError("means must lie in [0, 1]")
    y.check_bounds(n)
    score = weights[0]
    for i in range(n):
        value = y.assignments.get(i)
        score += weights[i + 1] * (means[i] if value is None else value)
    return float(score)
