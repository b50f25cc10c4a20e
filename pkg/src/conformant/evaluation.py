"""MCAR masking, metrics, and the missing-data benchmark runner.

The experiment grid is methods x missing rates x repetitions.  For every test
row the reference is the classifier's distribution on the fully observed row;
masked predictions are compared to it by cross entropy, and to the labels by
accuracy and support-weighted F1.

Masks are drawn from a per-row substream keyed by ``(seed, repetition, row)``,
so results are byte-identical regardless of worker count or processing order.
``NACL_THREADS`` caps the worker pool (default: machine parallelism).
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .baselines import Imputer
from .expectation import expected_prediction_masked
from .models import (
    BinaryDataset,
    LogisticRegressionModel,
    NaiveBayesModel,
    PartialObservation,
    lr_predict_batch,
)

__all__ = [
    "mask_mcar",
    "row_rng",
    "cross_entropy",
    "accuracy",
    "weighted_f1",
    "ExperimentConfig",
    "ExperimentReport",
    "MetricRow",
    "run_experiment",
    "worker_count",
]

_PRED_FLOOR = 1e-12
ALL_METRICS = ("cross_entropy", "accuracy", "weighted_f1")


def mask_mcar(x, rate: float, rng: np.random.Generator) -> PartialObservation:
    """Drop each feature independently with probability ``rate``."""
    if not 0.0 <= rate <= 1.0:
        raise ValueError("rate must lie in [0, 1]")
    x = np.asarray(x)
    u = rng.random(len(x))
    return PartialObservation({i: int(x[i]) for i in range(len(x)) if u[i] >= rate})


def row_rng(seed: int, repetition: int, row_index: int) -> np.random.Generator:
    """Independent deterministic substream for one (repetition, row) cell."""
    return np.random.default_rng([int(seed), int(repetition), int(row_index)])


def cross_entropy(p_ref, p_pred) -> float:
    """-sum_k p_ref[k] * log p_pred[k], with predictions floored at 1e-12."""
    p_ref = np.asarray(p_ref, dtype=float)
    p_pred = np.maximum(np.asarray(p_pred, dtype=float), _PRED_FLOOR)
    return float(-(p_ref * np.log(p_pred)).sum())


def accuracy(predicted, true) -> float:
    predicted = np.asarray(predicted)
    true = np.asarray(true)
    if predicted.shape != true.shape:
        raise ValueError("label vectors must have equal length")
    return float(np.mean(predicted == true))


def weighted_f1(predicted, true, num_classes: int) -> float:
    """Per-class F1 averaged with weights proportional to true support."""
    predicted = np.asarray(predicted, dtype=int)
    true = np.asarray(true, dtype=int)
    if predicted.shape != true.shape:
        raise ValueError("label vectors must have equal length")
    total = true.shape[0]
    score = 0.0
    for k in range(num_classes):
        tp = float(np.sum((predicted == k) & (true == k)))
        fp = float(np.sum((predicted == k) & (true != k)))
        fn = float(np.sum((predicted != k) & (true == k)))
        denom = 2.0 * tp + fp + fn
        f1 = 2.0 * tp / denom if denom > 0.0 else 0.0
        score += (tp + fn) / total * f1
    return score


def worker_count() -> int:
    raw = os.environ.get("NACL_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    count = int(raw)
    if count < 1:
        raise ValueError("NACL_THREADS must be a positive integer")
    return count


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark run.

    ``nb_models`` are scored by expected prediction under missingness;
    ``imputers`` fill the missing values and go through the classifier.
    Accuracy and weighted F1 require labels on the test set.
    """

    lr: LogisticRegressionModel
    test: BinaryDataset
    rates: Sequence[float]
    nb_models: Mapping[str, NaiveBayesModel] = field(default_factory=dict)
    imputers: Mapping[str, Imputer] = field(default_factory=dict)
    repetitions: int = 10
    seed: int = 0
    metrics: Sequence[str] = ALL_METRICS

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        for rate in self.rates:
            if not 0.0 <= rate <= 1.0:
                raise ValueError("rates must lie in [0, 1]")
        for metric in self.metrics:
            if metric not in ALL_METRICS:
                raise ValueError(f"unknown metric {metric!r}")
        if self.test.num_features != self.lr.num_features:
            raise ValueError("test set and classifier have mismatched feature counts")
        for name, nb in self.nb_models.items():
            if (nb.num_features, nb.num_classes) != (self.lr.num_features, self.lr.num_classes):
                raise ValueError(f"model {name!r} has mismatched dimensions")
        for name, imp in self.imputers.items():
            if imp.num_features != self.lr.num_features:
                raise ValueError(f"imputer {name!r} has mismatched dimensions")
        needs_labels = set(self.metrics) & {"accuracy", "weighted_f1"}
        if needs_labels and self.test.labels is None:
            raise ValueError(
                f"metrics {sorted(needs_labels)} need labels on the test set"
            )

    @property
    def method_names(self) -> tuple[str, ...]:
        return tuple(self.nb_models) + tuple(self.imputers)


@dataclass(frozen=True)
class MetricRow:
    method: str
    rate: float
    metric: str
    mean: float
    stderr: float
    repetitions: int


@dataclass(frozen=True)
class ExperimentReport:
    rows: tuple[MetricRow, ...]
    config_summary: dict

    def to_csv(self) -> str:
        lines = ["method,rate,metric,mean,stderr,repetitions"]
        for r in self.rows:
            lines.append(
                f"{r.method},{r.rate!r},{r.metric},{r.mean!r},{r.stderr!r},{r.repetitions}"
            )
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "config": self.config_summary,
            "rows": [
                {
                    "method": r.method,
                    "rate": r.rate,
                    "metric": r.metric,
                    "mean": r.mean,
                    "stderr": r.stderr,
                    "repetitions": r.repetitions,
                }
                for r in self.rows
            ],
        }
        return json.dumps(doc, indent=1)

    def value(self, method: str, rate: float, metric: str) -> float:
        for r in self.rows:
            if r.method == method and r.rate == rate and r.metric == metric:
                return r.mean
        raise KeyError((method, rate, metric))

    def summary(self) -> str:
        metrics = sorted({r.metric for r in self.rows})
        methods = list(dict.fromkeys(r.method for r in self.rows))
        rates = sorted({r.rate for r in self.rows})
        lines = []
        for metric in metrics:
            lines.append(metric)
            header = "  method".ljust(16) + "".join(f"{rate:>10.2f}" for rate in rates)
            lines.append(header)
            for method in methods:
                cells = "".join(
                    f"{self.value(method, rate, metric):>10.4f}" for rate in rates
                )
                lines.append(f"  {method}".ljust(16) + cells)
        return "\n".join(lines)


def _mask_matrix(config: ExperimentConfig, repetition: int) -> np.ndarray:
    """Per-row uniforms; ``u < rate`` marks a feature missing, so the missing
    sets are nested across rates within a repetition."""
    n = config.test.num_features
    return np.stack(
        [
            row_rng(config.seed, repetition, j).random(n)
            for j in range(config.test.num_rows)
        ]
    )


def _score_method(config, name, X, observed) -> np.ndarray:
    if name in config.nb_models:
        return expected_prediction_masked(config.nb_models[name], X, observed)
    imp = config.imputers[name]
    filled = np.where(observed, X, imp.fill[None, :])
    return lr_predict_batch(config.lr, filled)


def _run_repetition(config: ExperimentConfig, repetition: int, ref_dist):
    X = config.test.rows.astype(float)
    uniforms = _mask_matrix(config, repetition)
    out = {}
    for rate in config.rates:
        observed = uniforms >= rate
        for name in config.method_names:
            preds = _score_method(config, name, X, observed)
            cell = {}
            if "cross_entropy" in config.metrics:
                floored = np.maximum(preds, _PRED_FLOOR)
                cell["cross_entropy"] = float(
                    np.mean(-np.sum(ref_dist * np.log(floored), axis=1))
                )
            if config.test.labels is not None:
                hard = np.argmax(preds, axis=1)
                if "accuracy" in config.metrics:
                    cell["accuracy"] = accuracy(hard, config.test.labels)
                if "weighted_f1" in config.metrics:
                    cell["weighted_f1"] = weighted_f1(
                        hard, config.test.labels, config.lr.num_classes
                    )
            out[(rate, name)] = cell
    return out


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run the benchmark grid and aggregate means and standard errors over
    repetitions.  Deterministic for a fixed config regardless of thread count."""
    if config.test.num_rows == 0:
        raise ValueError("test set is empty")
    ref_dist = lr_predict_batch(config.lr, config.test.rows.astype(float))
    reps = range(config.repetitions)
    workers = min(worker_count(), config.repetitions)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_rep = list(pool.map(lambda r: _run_repetition(config, r, ref_dist), reps))
    else:
        per_rep = [_run_repetition(config, r, ref_dist) for r in reps]

    rows = []
    for name in config.method_names:
        for rate in config.rates:
            metrics = per_rep[0][(rate, name)].keys()
            for metric in metrics:
                values = np.array([rep[(rate, name)][metric] for rep in per_rep])
                stderr = (
                    float(values.std(ddof=1) / np.sqrt(len(values)))
                    if len(values) > 1
                    else 0.0
                )
                rows.append(
                    MetricRow(
                        method=name,
                        rate=float(rate),
                        metric=metric,
                        mean=float(values.mean()),
                        stderr=stderr,
                        repetitions=config.repetitions,
                    )
                )
    summary = {
        "methods": list(config.method_names),
        "rates": [float(r) for r in config.rates],
        "repetitions": config.repetitions,
        "seed": config.seed,
        "test_rows": config.test.num_rows,
        "num_features": config.test.num_features,
    }
    return ExperimentReport(rows=tuple(rows), config_summary=summary)
