import numpy as np
import pytest

from conformant import (
    BinaryDataset,
    LogisticRegressionModel,
    NaiveBayesModel,
    lr_to_nb,
)

# Two-feature running example: a binary classifier and two distinct naive
# Bayes models that both conform with it.
TOY_WEIGHTS = np.array([[-1.16, 2.23, -0.20]])


@pytest.fixture
def toy_lr():
    return LogisticRegressionModel(2, 2, TOY_WEIGHTS)


@pytest.fixture
def toy_nb_a():
    # prior 0.5; P(x0=1|pos)=0.8, P(x0=1|neg)=0.3; P(x1=1|pos)=0.45, P(x1=1|neg)=0.5
    return NaiveBayesModel(2, 2, [0.5, 0.5], [[0.3, 0.5], [0.8, 0.45]])


@pytest.fixture
def toy_nb_b(toy_lr):
    # second conformant model: free conditionals (0.6, 0.9) for the positive
    # class; its rounded parameters are P(c)=0.36, P(x0=1|neg)=0.14,
    # P(x1=1|neg)=0.92
    return lr_to_nb(toy_lr, [0.6, 0.9])


def all_bit_rows(n):
    codes = np.arange(2 ** n, dtype=np.uint64)[:, None]
    return ((codes >> np.arange(n, dtype=np.uint64)[None, :]) & 1).astype(float)


def random_binary_lr(rng, n, scale=1.5):
    return LogisticRegressionModel(n, 2, rng.normal(0.0, scale, size=(1, n + 1)))


def random_gauged_lr(rng, n, num_classes, scale=1.5):
    """Multiclass classifier in the canonical gauge (class-0 row zero)."""
    W = rng.normal(0.0, scale, size=(num_classes, n + 1))
    W[0] = 0.0
    return LogisticRegressionModel(n, num_classes, W)


def random_nb(rng, n, num_classes=2, low=0.05, high=0.95):
    prior = rng.uniform(0.2, 0.8, size=num_classes)
    prior /= prior.sum()
    cond = rng.uniform(low, high, size=(num_classes, n))
    return NaiveBayesModel(n, num_classes, prior, cond)


def random_dataset(rng, n, rows):
    return BinaryDataset(rows=rng.integers(0, 2, size=(rows, n)))
