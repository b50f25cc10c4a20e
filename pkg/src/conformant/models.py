"""Core model types and exact naive Bayes inference.

Conventions used throughout the package:

* Models are over ``n`` binary features indexed ``0..n-1``.  Class 0 is the
  reference class; for binary problems class 1 is the positive class, so
  probability vectors come back as ``(P(negative), P(positive))``.
* Logistic regression weights are a matrix whose column 0 is the bias (a
  dummy always-one feature).  Binary models store a single weight row for
  the positive class; models with ``K >= 3`` classes store one row per class.
* Probabilities are stored in linear space but all inference runs in log
  space, so products over hundreds of features do not underflow.

Every type is immutable after construction and every operation is pure, so
models can be shared freely between threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "LogisticRegressionModel",
    "NaiveBayesModel",
    "PartialObservation",
    "BinaryDataset",
    "lr_predict",
    "lr_predict_batch",
    "nb_posterior",
    "nb_posterior_batch",
    "nb_marginal",
    "validate_nb",
    "sigmoid",
    "logit",
    "softmax",
    "logsumexp",
    "model_to_json",
    "model_from_json",
    "save_model",
    "load_model",
]


# ---------------------------------------------------------------------------
# numerics helpers


def sigmoid(z):
    """Numerically stable logistic function, elementwise."""
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return float(out[0]) if scalar else out


def logit(p):
    """Inverse of :func:`sigmoid` on the open interval (0, 1)."""
    p = np.asarray(p, dtype=float)
    return np.log(p) - np.log1p(-p)


def logsumexp(a, axis=None):
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    out = np.log(np.sum(np.exp(a - m), axis=axis, keepdims=True)) + m
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


def softmax(scores, axis=-1):
    scores = np.asarray(scores, dtype=float)
    m = np.max(scores, axis=axis, keepdims=True)
    e = np.exp(scores - m)
    return e / np.sum(e, axis=axis, keepdims=True)


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def _fmt17(x: float) -> str:
    """Format a float with 17 significant digits (exact round trip)."""
    return format(float(x), "#.17g")


# ---------------------------------------------------------------------------
# model types


@dataclass(frozen=True)
class LogisticRegressionModel:
    """Discriminative classifier ``F`` with a bias column.

    ``weights`` has shape ``(1, num_features + 1)`` when ``num_classes == 2``
    (the positive-class row; the negative class is the implicit all-zero
    reference row) and shape ``(K, num_features + 1)`` otherwise.
    """

    num_features: int
    num_classes: int
    weights: np.ndarray

    def __post_init__(self):
        if self.num_features < 1:
            raise ValueError("num_features must be >= 1")
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        w = np.array(self.weights, dtype=float)
        rows = 1 if self.num_classes == 2 else self.num_classes
        if w.shape != (rows, self.num_features + 1):
            raise ValueError(
                f"weights must have shape {(rows, self.num_features + 1)}, got {w.shape}"
            )
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        object.__setattr__(self, "weights", _frozen(w))

    def gauged_rows(self) -> np.ndarray:
        """Full (K, n+1) weight matrix with the class-0 row subtracted out.

        Predictions are invariant to adding a common row to every class, so
        this is the canonical representative with row 0 identically zero.
        """
        if self.num_classes == 2:
            return np.vstack([np.zeros(self.num_features + 1), self.weights[0]])
        return self.weights - self.weights[0]


@dataclass(frozen=True)
class NaiveBayesModel:
    """Generative distribution P(X, C) = P(C) * prod_i P(X_i | C).

    ``class_prior`` has length ``num_classes``; ``cond[k, i]`` is
    ``P(X_i = 1 | c_k)``.  Shape checks happen here; value constraints (open
    interval, prior normalization) are reported by :func:`validate_nb` so that
    deliberately broken models can still be constructed and inspected.
    """

    num_features: int
    num_classes: int
    class_prior: np.ndarray
    cond: np.ndarray

    def __post_init__(self):
        if self.num_features < 1:
            raise ValueError("num_features must be >= 1")
        if self.num_classes < 2:
            raise ValueError("num_classes must be >= 2")
        prior = np.array(self.class_prior, dtype=float)
        cond = np.array(self.cond, dtype=float)
        if prior.shape != (self.num_classes,):
            raise ValueError(f"class_prior must have shape ({self.num_classes},)")
        if cond.shape != (self.num_classes, self.num_features):
            raise ValueError(
                f"cond must have shape {(self.num_classes, self.num_features)}, got {cond.shape}"
            )
        object.__setattr__(self, "class_prior", _frozen(prior))
        object.__setattr__(self, "cond", _frozen(cond))


@dataclass(frozen=True, init=False)
class PartialObservation:
    """Assignment of 0/1 values to a subset of feature indices.

    May be empty (everything missing) or total (nothing missing).  Iteration
    order is always by ascending feature index.
    """

    assignments: Mapping[int, int]

    def __init__(self, assignments: Mapping[int, int] | Iterable[tuple[int, int]] = ()):
        items = dict(assignments)
        for idx, bit in items.items():
            if not isinstance(idx, (int, np.integer)) or idx < 0:
                raise ValueError(f"feature index must be a nonnegative int, got {idx!r}")
            if bit not in (0, 1):
                raise ValueError(f"assigned value must be 0 or 1, got {bit!r}")
        ordered = {int(i): int(items[i]) for i in sorted(items)}
        object.__setattr__(self, "assignments", MappingProxyType(ordered))

    @classmethod
    def total(cls, x) -> "PartialObservation":
        x = np.asarray(x)
        return cls({i: int(x[i]) for i in range(len(x))})

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(self.assignments)

    def __len__(self) -> int:
        return len(self.assignments)

    def check_bounds(self, num_features: int) -> None:
        for idx in self.assignments:
            if idx >= num_features:
                raise ValueError(
                    f"feature index {idx} out of range for {num_features} features"
                )

    def without(self, index: int) -> "PartialObservation":
        return PartialObservation({i: b for i, b in self.assignments.items() if i != index})

    def merged(self, other: Mapping[int, int]) -> "PartialObservation":
        combined = dict(self.assignments)
        combined.update(other)
        return PartialObservation(combined)


@dataclass(frozen=True)
class BinaryDataset:
    """Matrix of binary feature rows with optional labels and row weights."""

    rows: np.ndarray
    labels: np.ndarray | None = None
    weights: np.ndarray | None = None

    def __post_init__(self):
        rows = np.array(self.rows)
        if rows.ndim != 2:
            raise ValueError("rows must be a 2-d matrix")
        if rows.size and not np.isin(rows, (0, 1)).all():
            raise ValueError("rows must contain only 0/1 values")
        object.__setattr__(self, "rows", _frozen(rows, dtype=np.uint8))
        if self.labels is not None:
            labels = np.array(self.labels, dtype=int)
            if labels.shape != (rows.shape[0],):
                raise ValueError("labels must align with rows")
            if labels.size and labels.min() < 0:
                raise ValueError("labels must be nonnegative class indices")
            object.__setattr__(self, "labels", _frozen(labels, dtype=int))
        if self.weights is not None:
            weights = np.array(self.weights, dtype=float)
            if weights.shape != (rows.shape[0],):
                raise ValueError("weights must align with rows")
            if weights.size and weights.min() < 0:
                raise ValueError("weights must be nonnegative")
            object.__setattr__(self, "weights", _frozen(weights))

    @property
    def num_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def num_features(self) -> int:
        return self.rows.shape[1]

    def aggregate(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct rows and how often each occurs (sorted, deterministic)."""
        if self.num_rows == 0:
            return self.rows.copy(), np.zeros(0)
        uniq, counts = np.unique(self.rows, axis=0, return_counts=True)
        return uniq, counts.astype(float)


# ---------------------------------------------------------------------------
# inference


def _check_total(x, num_features: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (num_features,):
        raise ValueError(f"input must have length {num_features}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("input must be finite")
    return x


def lr_predict(model: LogisticRegressionModel, x) -> np.ndarray:
    """Class distribution of the classifier on a total input.

    ``x`` may be fractional (imputed values); length must equal
    ``num_features``.  Binary models return ``(1 - p, p)``.
    """
    x = _check_total(x, model.num_features)
    return lr_predict_batch(model, x[None, :])[0]


def lr_predict_batch(model: LogisticRegressionModel, X) -> np.ndarray:
    """Vectorized :func:`lr_predict` over the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != model.num_features:
        raise ValueError(f"X must have shape (N, {model.num_features})")
    if model.num_classes == 2:
        w = model.weights[0]
        p = sigmoid(w[0] + X @ w[1:])
        p = np.atleast_1d(p)
        return np.column_stack([1.0 - p, p])
    scores = model.weights[:, 0][None, :] + X @ model.weights[:, 1:].T
    return softmax(scores, axis=1)


def _nb_log_params(nb: NaiveBayesModel):
    with np.errstate(divide="ignore"):
        return (
            np.log(nb.class_prior),
            np.log(nb.cond),
            np.log1p(-nb.cond),
        )


def nb_log_joint_batch(nb: NaiveBayesModel, X) -> np.ndarray:
    """log P(x, c_k) for every row of the bit matrix ``X``; shape (N, K)."""
    X = np.asarray(X, dtype=float)
    log_prior, log_q, log_1mq = _nb_log_params(nb)
    return log_prior[None, :] + X @ log_q.T + (1.0 - X) @ log_1mq.T


def nb_posterior(nb: NaiveBayesModel, x) -> np.ndarray:
    """P(C | x) for a total bit vector, computed in log space."""
    x = _check_total(x, nb.num_features)
    if not np.isin(x, (0.0, 1.0)).all():
        raise ValueError("nb_posterior expects a total 0/1 assignment")
    return nb_posterior_batch(nb, x[None, :])[0]


def nb_posterior_batch(nb: NaiveBayesModel, X) -> np.ndarray:
    joint = nb_log_joint_batch(nb, X)
    return softmax(joint, axis=1)


def nb_marginal(nb: NaiveBayesModel, y: PartialObservation) -> float:
    """P(y) = sum_k P(c_k) * prod_{i in y} P(y_i | c_k).

    The empty observation has probability 1.
    """
    y.check_bounds(nb.num_features)
    log_prior, log_q, log_1mq = _nb_log_params(nb)
    score = log_prior.copy()
    for idx, bit in y.assignments.items():
        score += log_q[:, idx] if bit else log_1mq[:, idx]
    return float(np.exp(logsumexp(score)))


_PRIOR_SUM_TOL = 1e-9


def validate_nb(nb: NaiveBayesModel) -> list[str]:
    """Check the value invariants; returns a list of violations (empty = ok)."""
    violations = []
    prior = nb.class_prior
    if not np.all(np.isfinite(prior)):
        violations.append("prior contains non-finite entries")
    else:
        for k, p in enumerate(prior):
            if not 0.0 < p < 1.0:
                violations.append(f"prior[{k}]={p!r} outside the open interval (0, 1)")
        total = float(prior.sum())
        if abs(total - 1.0) > _PRIOR_SUM_TOL:
            violations.append(f"prior sums to {total!r}")
    if not np.all(np.isfinite(nb.cond)):
        violations.append("cond contains non-finite entries")
    else:
        bad = np.argwhere((nb.cond <= 0.0) | (nb.cond >= 1.0))
        for k, i in bad:
            value = nb.cond[k, i]
            kind = "at closed boundary" if value in (0.0, 1.0) else "outside (0, 1)"
            violations.append(f"cond[{k}][{i}]={value!r} parameter {kind}")
    return violations


# ---------------------------------------------------------------------------
# JSON persistence


def model_to_json(model) -> str:
    """Serialize a model with fixed field order and 17 significant digits."""
    if isinstance(model, LogisticRegressionModel):
        rows = ",".join(
            "[" + ",".join(_fmt17(v) for v in row) + "]" for row in model.weights
        )
        return (
            f'{{"type":"lr","num_features":{model.num_features},'
            f'"num_classes":{model.num_classes},"weights":[{rows}]}}'
        )
    if isinstance(model, NaiveBayesModel):
        prior = ",".join(_fmt17(v) for v in model.class_prior)
        cond = ",".join(
            "[" + ",".join(_fmt17(v) for v in row) + "]" for row in model.cond
        )
        return (
            f'{{"type":"nb","num_features":{model.num_features},'
            f'"num_classes":{model.num_classes},"prior":[{prior}],"cond":[{cond}]}}'
        )
    raise TypeError(f"unsupported model type: {type(model).__name__}")


def model_from_json(text: str):
    doc = json.loads(text)
    kind = doc.get("type")
    if kind == "lr":
        return LogisticRegressionModel(
            num_features=doc["num_features"],
            num_classes=doc["num_classes"],
            weights=np.array(doc["weights"], dtype=float),
        )
    if kind == "nb":
        return NaiveBayesModel(
            num_features=doc["num_features"],
            num_classes=doc["num_classes"],
            class_prior=np.array(doc["prior"], dtype=float),
            cond=np.array(doc["cond"], dtype=float),
        )
    raise ValueError(f"unknown model type {kind!r}")


def save_model(model, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(model_to_json(model))
        fh.write("\n")


def load_model(path):
    with open(path, "r", encoding="ascii") as fh:
        return model_from_json(fh.read())
