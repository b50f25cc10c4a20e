"""Imputation baselines and the maximum-likelihood naive Bayes comparator."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import BinaryDataset, NaiveBayesModel, PartialObservation, _fmt17

__all__ = [
    "IMPUTER_KINDS",
    "Imputer",
    "fit_imputer",
    "impute",
    "fit_ml_nb",
    "imputer_to_json",
    "imputer_from_json",
]

IMPUTER_KINDS = ("min", "max", "mean", "median")


@dataclass(frozen=True)
class Imputer:
    """Per-feature fill values for missing entries (fractional for mean)."""

    kind: str
    fill: np.ndarray

    def __post_init__(self):
        if self.kind not in IMPUTER_KINDS:
            raise ValueError(f"kind must be one of {IMPUTER_KINDS}")
        fill = np.array(self.fill, dtype=float)
        if fill.ndim != 1:
            raise ValueError("fill must be a vector")
        if np.any(fill < 0.0) or np.any(fill > 1.0):
            raise ValueError("fill values must lie in [0, 1]")
        fill.setflags(write=False)
        object.__setattr__(self, "fill", fill)

    @property
    def num_features(self) -> int:
        return self.fill.shape[0]


def fit_imputer(d: BinaryDataset, kind: str) -> Imputer:
    """Column statistic over the training rows.

    Median uses the upper middle element, so a 50/50 binary column fills
    with 1 (fixed tie rule for determinism).
    """
    if d.num_rows == 0:
        raise ValueError("cannot fit an imputer on an empty dataset")
    cols = d.rows.astype(float)
    if kind == "min":
        fill = cols.min(axis=0)
    elif kind == "max":
        fill = cols.max(axis=0)
    elif kind == "mean":
        fill = cols.mean(axis=0)
    elif kind == "median":
        fill = np.sort(cols, axis=0)[d.num_rows // 2]
    else:
        raise ValueError(f"kind must be one of {IMPUTER_KINDS}")
    return Imputer(kind=kind, fill=fill)


def impute(imp: Imputer, y: PartialObservation, n: int) -> np.ndarray:
    """Total real vector: observed positions keep their values, the rest take
    the fill values (feed the result to ``lr_predict``)."""
    if imp.num_features != n:
        raise ValueError(f"imputer covers {imp.num_features} features, expected {n}")
    y.check_bounds(n)
    x = imp.fill.copy()
    for idx, bit in y.assignments.items():
        x[idx] = bit
    return x


def fit_ml_nb(d: BinaryDataset, smoothing: float = 1.0) -> NaiveBayesModel:
    """Maximum-likelihood naive Bayes with pseudo-count smoothing.

    ``P(x_i=1 | c_k) = (count + s) / (N_k + 2 s)`` and the prior gets ``K s``
    pseudo-counts; ``s = 0`` on data with an absent class is rejected because
    the parameters would be degenerate.
    """
    if d.labels is None:
        raise ValueError("fit_ml_nb needs a labeled dataset")
    if smoothing < 0.0:
        raise ValueError("smoothing must be nonnegative")
    K = int(d.labels.max()) + 1 if d.labels.size else 0
    if K < 2:
        K = 2
    counts = np.bincount(d.labels, minlength=K).astype(float)
    if smoothing == 0.0 and np.any(counts == 0.0):
        raise ValueError(
            "a class is absent from the data; smoothing=0 would give degenerate parameters"
        )
    prior = (counts + smoothing) / (counts.sum() + K * smoothing)
    ones = np.zeros((K, d.num_features))
    for k in range(K):
        mask = d.labels == k
        if mask.any():
            ones[k] = d.rows[mask].sum(axis=0)
    cond = (ones + smoothing) / (counts[:, None] + 2.0 * smoothing)
    return NaiveBayesModel(d.num_features, K, prior, cond)


def imputer_to_json(imp: Imputer) -> str:
    fill = ",".join(_fmt17(v) for v in imp.fill)
    return f'{{"type":"imputer","kind":"{imp.kind}","fill":[{fill}]}}'


def imputer_from_json(text: str) -> Imputer:
    import json

    doc = json.loads(text)
    if doc.get("type") != "imputer":
        raise ValueError("not an imputer document")
    return Imputer(kind=doc["kind"], fill=np.array(doc["fill"], dtype=float))
