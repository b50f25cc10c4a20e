"""Support/opposing feature partition, sufficient explanations, and grid
image rendering for binary classifiers.

An observed feature *supports* a classification when removing it (and taking
the expected prediction over the fitted feature distribution) does not pull
the prediction past the full-input value; the rest *oppose* it.  A sufficient
explanation is the smallest set of support features that, together with all
opposing features, keeps the expected prediction on the same side of 0.5 as
the original classification.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .expectation import expected_prediction
from .models import (
    LogisticRegressionModel,
    NaiveBayesModel,
    PartialObservation,
    lr_predict,
)

__all__ = [
    "partition_support",
    "sufficient_explanation",
    "top_support_by_weight",
    "ExplanationResult",
    "render_grid",
    "write_pgm",
]


def _require_binary(lr: LogisticRegressionModel):
    if lr.num_classes != 2:
        raise ValueError("explanations are only supported for binary classifiers")


def partition_support(
    lr: LogisticRegressionModel, nb: NaiveBayesModel, x
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split the features of the total input ``x`` into (support, opposing).

    For a positive classification (F >= 0.5) a feature supports it when
    dropping it gives an expected prediction <= F; for a negative one the
    test is strictly greater than F.
    """
    _require_binary(lr)
    x = np.asarray(x)
    full = float(lr_predict(lr, x)[1])
    total = PartialObservation.total(x)
    support, opposing = [], []
    for i in range(lr.num_features):
        without = float(expected_prediction(nb, total.without(i))[1])
        keeps = without <= full if full >= 0.5 else without > full
        (support if keeps else opposing).append(i)
    return tuple(support), tuple(opposing)


@dataclass(frozen=True)
class ExplanationResult:
    features: tuple[int, ...]
    status: str             # "ok" | "not_found"
    expected: float         # expected prediction with the explanation observed
    support: tuple[int, ...]
    opposing: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.features)


def _sign(t: float) -> int:
    return int(np.sign(t))


def sufficient_explanation(
    lr: LogisticRegressionModel,
    nb: NaiveBayesModel,
    x,
    search: str = "greedy",
    exact_cap: int = 4,
) -> ExplanationResult:
    """Smallest subset of the support features preserving the classification.

    ``search="exact"`` enumerates subsets by increasing size up to
    ``exact_cap`` and returns the lexicographically smallest winner;
    ``"greedy"`` adds support features by decreasing single-feature effect
    until the sign condition holds and then prunes removable members.
    A ``not_found`` status reports the best candidate seen.
    """
    _require_binary(lr)
    if search not in ("greedy", "exact"):
        raise ValueError("search must be 'greedy' or 'exact'")
    x = np.asarray(x)
    support, opposing = partition_support(lr, nb, x)
    full = float(lr_predict(lr, x)[1])
    target = _sign(full - 0.5)
    base = PartialObservation({i: int(x[i]) for i in opposing})

    def expected_with(features) -> float:
        obs = base.merged({i: int(x[i]) for i in features})
        return float(expected_prediction(nb, obs)[1])

    def satisfied(value: float) -> bool:
        return _sign(value - 0.5) == target

    best_features: tuple[int, ...] = ()
    best_value = expected_with(())
    if search == "exact":
        for size in range(0, min(exact_cap, len(support)) + 1):
            for combo in combinations(support, size):
                value = expected_with(combo)
                if satisfied(value):
                    return ExplanationResult(combo, "ok", value, support, opposing)
                if target * (value - 0.5) > target * (best_value - 0.5):
                    best_features, best_value = combo, value
        return ExplanationResult(best_features, "not_found", best_value, support, opposing)

    # greedy: strongest single-feature movers first (ties by feature index)
    effects = []
    empty_value = expected_with(())
    for i in support:
        effects.append((-(abs(expected_with((i,)) - empty_value)), i))
    order = [i for _, i in sorted(effects)]
    chosen: list[int] = []
    value = empty_value
    if not satisfied(value):
        for i in order:
            chosen.append(i)
            value = expected_with(chosen)
            if satisfied(value):
                break
    if not satisfied(value):
        return ExplanationResult(tuple(chosen), "not_found", value, support, opposing)
    for i in sorted(chosen):
        trimmed = [j for j in chosen if j != i]
        trimmed_value = expected_with(trimmed)
        if satisfied(trimmed_value):
            chosen = trimmed
            value = trimmed_value
    chosen = sorted(chosen)
    return ExplanationResult(tuple(chosen), "ok", expected_with(chosen), support, opposing)


def top_support_by_weight(
    lr: LogisticRegressionModel, nb: NaiveBayesModel, x, k: int
) -> tuple[int, ...]:
    """Comparison helper: the k support features with the largest absolute
    classifier weight (the flip-based ranking, as opposed to the
    missingness-based sufficient explanation)."""
    _require_binary(lr)
    support, _ = partition_support(lr, nb, x)
    w = lr.weights[0, 1:]
    ranked = sorted(support, key=lambda i: (-abs(w[i]), i))
    return tuple(sorted(ranked[:k]))


def render_grid(x, highlight, width: int, height: int) -> np.ndarray:
    """Grayscale image of a feature vector: highlighted features show their
    true value (255 for 1, 0 for 0), everything else mid-gray."""
    x = np.asarray(x)
    if width * height != len(x):
        raise ValueError(f"width*height = {width * height} != {len(x)} features")
    img = np.full(len(x), 128, dtype=np.uint8)
    for i in highlight:
        if not 0 <= i < len(x):
            raise ValueError(f"highlight index {i} out of range")
        img[i] = 255 if x[i] else 0
    return img.reshape(height, width)


def write_pgm(image: np.ndarray, path) -> None:
    """Binary PGM (P5), maxval 255, row-major."""
    image = np.asarray(image, dtype=np.uint8)
    if image.ndim != 2:
        raise ValueError("image must be 2-d")
    height, width = image.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        fh.write(image.tobytes())
