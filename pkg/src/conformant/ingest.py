"""Dataset ingestion, binarization, file formats, and classifier training.

Continuous columns binarize against ``mean + 0.05 * std`` (population std)
computed on the training split and frozen for test-time reuse; categorical
columns one-hot encode over the categories observed at fit time; binary
columns pass through.  The fitted statistics serialize to JSON next to the
dataset so re-binarizing held-out data is deterministic.

Dataset files are a plain text format: a header line
``n_features,n_rows,has_labels`` followed by one CSV row of bits per example
(plus the label when present).
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .models import BinaryDataset, LogisticRegressionModel, sigmoid, softmax

__all__ = [
    "IngestSchema",
    "FittedStats",
    "binarize",
    "binarize_csv",
    "read_table",
    "write_dataset",
    "read_dataset",
    "train_lr",
    "lr_training_loss",
]

COLUMN_KINDS = ("binary", "categorical", "continuous")


@dataclass(frozen=True, init=False)
class IngestSchema:
    """Per-column treatment plus the (single) label column."""

    label: str
    columns: dict

    def __init__(self, label: str, columns):
        columns = dict(columns)
        if label in columns:
            raise ValueError("label column must not also be a data column")
        for name, kind in columns.items():
            if kind not in COLUMN_KINDS:
                raise ValueError(f"column {name!r}: unknown kind {kind!r}")
        object.__setattr__(self, "label", str(label))
        object.__setattr__(self, "columns", columns)

    @classmethod
    def from_json(cls, text: str) -> "IngestSchema":
        doc = json.loads(text)
        return cls(label=doc["label"], columns=doc["columns"])

    def to_json(self) -> str:
        return json.dumps({"label": self.label, "columns": self.columns}, indent=1)


@dataclass(frozen=True)
class FittedStats:
    """Frozen binarization statistics: thresholds for continuous columns,
    observed categories for categorical ones, and the label mapping."""

    columns: tuple
    label_values: tuple

    def to_json(self) -> str:
        return json.dumps(
            {"columns": list(self.columns), "label_values": list(self.label_values)},
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "FittedStats":
        doc = json.loads(text)
        return cls(
            columns=tuple(dict(c) for c in doc["columns"]),
            label_values=tuple(doc["label_values"]),
        )

    def feature_names(self) -> list[str]:
        names = []
        for col in self.columns:
            if col["kind"] == "categorical":
                names.extend(f"{col['name']}={cat}" for cat in col["categories"])
            else:
                names.append(col["name"])
        return names


def read_table(path) -> tuple[list[str], list[dict]]:
    """CSV with a header row -> (column names, list of row dicts)."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ValueError(f"{path}: empty CSV")
        rows = list(reader)
    return list(reader.fieldnames), rows


def _fit_column(name, kind, values):
    if kind == "continuous":
        vals = np.array([float(v) for v in values])
        mean = float(vals.mean())
        std = float(vals.std())  # population standard deviation
        return {"name": name, "kind": kind, "threshold": mean + 0.05 * std}
    if kind == "categorical":
        return {"name": name, "kind": kind, "categories": sorted(set(values))}
    return {"name": name, "kind": kind}


def _encode_column(col, values, out_columns):
    kind = col["kind"]
    if kind == "continuous":
        bits = np.array([float(v) > col["threshold"] for v in values], dtype=np.uint8)
        out_columns.append(bits)
    elif kind == "categorical":
        cats = col["categories"]
        known = set(cats)
        unseen = sorted({v for v in values if v not in known})
        if unseen:
            warnings.warn(
                f"column {col['name']!r}: unseen categories {unseen} encode as all-zero blocks"
            )
        for cat in cats:
            out_columns.append(
                np.array([v == cat for v in values], dtype=np.uint8)
            )
    else:
        parsed = []
        for v in values:
            if str(v) not in ("0", "1"):
                raise ValueError(f"column {col['name']!r}: non-binary value {v!r}")
            parsed.append(int(v))
        out_columns.append(np.array(parsed, dtype=np.uint8))


def binarize(
    header: list[str],
    rows: list[dict],
    schema: IngestSchema,
    stats: FittedStats | None = None,
) -> tuple[BinaryDataset, FittedStats]:
    """Binarize a parsed table.

    Without ``stats`` the statistics are fitted on these rows (training
    split); with ``stats`` they are reused verbatim (test split).
    """
    data_columns = [c for c in header if c != schema.label]
    missing = [c for c in data_columns if c not in schema.columns]
    if missing:
        raise ValueError(f"schema does not cover columns: {missing}")
    if schema.label not in header:
        raise ValueError(f"label column {schema.label!r} not in CSV header")

    label_raw = [row[schema.label] for row in rows]
    if stats is None:
        fitted_cols = tuple(
            _fit_column(name, schema.columns[name], [row[name] for row in rows])
            for name in data_columns
        )
        stats = FittedStats(columns=fitted_cols, label_values=tuple(sorted(set(label_raw))))
    label_index = {v: i for i, v in enumerate(stats.label_values)}
    labels = []
    for v in label_raw:
        if v not in label_index:
            raise ValueError(f"label value {v!r} was not seen at fit time")
        labels.append(label_index[v])

    out_columns: list[np.ndarray] = []
    for col in stats.columns:
        _encode_column(dict(col), [row[col["name"]] for row in rows], out_columns)
    matrix = (
        np.column_stack(out_columns) if out_columns else np.zeros((len(rows), 0), np.uint8)
    )
    return BinaryDataset(rows=matrix, labels=np.array(labels)), stats


def binarize_csv(path, schema: IngestSchema, stats: FittedStats | None = None):
    header, rows = read_table(path)
    return binarize(header, rows, schema, stats)


# ---------------------------------------------------------------------------
# dataset file format


def write_dataset(d: BinaryDataset, path) -> None:
    has_labels = 1 if d.labels is not None else 0
    lines = [f"{d.num_features},{d.num_rows},{has_labels}"]
    for j in range(d.num_rows):
        cells = [str(int(b)) for b in d.rows[j]]
        if has_labels:
            cells.append(str(int(d.labels[j])))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_dataset(path) -> BinaryDataset:
    text = Path(path).read_text(encoding="ascii").strip().split("\n")
    try:
        n, rows, has_labels = (int(v) for v in text[0].split(","))
    except ValueError as exc:
        raise ValueError(f"{path}: bad dataset header {text[0]!r}") from exc
    if len(text) - 1 != rows:
        raise ValueError(f"{path}: header promises {rows} rows, found {len(text) - 1}")
    matrix = np.zeros((rows, n), dtype=np.uint8)
    labels = np.zeros(rows, dtype=int) if has_labels else None
    for j, line in enumerate(text[1:]):
        cells = line.split(",")
        if len(cells) != n + has_labels:
            raise ValueError(f"{path}: row {j} has {len(cells)} cells, expected {n + has_labels}")
        matrix[j] = [int(c) for c in cells[:n]]
        if has_labels:
            labels[j] = int(cells[n])
    return BinaryDataset(rows=matrix, labels=labels)


# ---------------------------------------------------------------------------
# logistic regression training


def _design(rows) -> np.ndarray:
    X = np.asarray(rows, dtype=float)
    return np.column_stack([np.ones(X.shape[0]), X])


def lr_training_loss(weights: np.ndarray, X: np.ndarray, labels, num_classes: int, l2: float):
    """Regularized mean log-loss and its gradient (bias not penalized)."""
    N = X.shape[0]
    if num_classes == 2:
        w = weights[0]
        z = X @ w
        p = sigmoid(z)
        y = labels.astype(float)
        eps = 1e-300
        loss = float(-np.mean(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)))
        grad = (X.T @ (p - y)) / N
        reg = np.concatenate([[0.0], w[1:]])
        return loss + 0.5 * l2 * float(reg @ reg), (grad + l2 * reg)[None, :]
    scores = X @ weights.T
    probs = softmax(scores, axis=1)
    onehot = np.zeros_like(probs)
    onehot[np.arange(N), labels] = 1.0
    loss = float(-np.mean(np.log(probs[np.arange(N), labels] + 1e-300)))
    grad = (probs - onehot).T @ X / N
    reg = weights.copy()
    reg[:, 0] = 0.0
    return loss + 0.5 * l2 * float(np.sum(reg * reg)), grad + l2 * reg


def train_lr(
    d: BinaryDataset,
    l2: float = 1e-4,
    max_epochs: int = 1000,
    grad_tol: float = 1e-6,
) -> LogisticRegressionModel:
    """Deterministic full-batch gradient descent with backtracking from a zero
    start; converged when the gradient norm drops below ``grad_tol``."""
    if d.labels is None:
        raise ValueError("train_lr needs a labeled dataset")
    classes = np.unique(d.labels)
    if classes.size < 2:
        raise ValueError("training data contains a single class; model is degenerate")
    K = int(classes.max()) + 1
    X = _design(d.rows)
    rows = 1 if K == 2 else K
    W = np.zeros((rows, X.shape[1]))
    loss, grad = lr_training_loss(W, X, d.labels, K, l2)
    step = 1.0
    for _ in range(max_epochs):
        if float(np.linalg.norm(grad)) < grad_tol:
            break
        accepted = False
        for _ in range(60):
            candidate = W - step * grad
            cand_loss, cand_grad = lr_training_loss(candidate, X, d.labels, K, l2)
            if cand_loss <= loss - 1e-4 * step * float(np.sum(grad * grad)):
                W, loss, grad = candidate, cand_loss, cand_grad
                step *= 2.0
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
    return LogisticRegressionModel(d.num_features, K, W)
