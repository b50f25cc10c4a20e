from itertools import combinations

import numpy as np
import pytest

from conformant import (
    LogisticRegressionModel,
    NaiveBayesModel,
    PartialObservation,
    expected_prediction,
    lr_predict,
    lr_to_nb,
    partition_support,
    render_grid,
    sufficient_explanation,
    write_pgm,
)
from conformant.explain import top_support_by_weight
from conftest import random_binary_lr


class TestPartitionSupport:
    def test_toy_positive_instance(self, toy_lr, toy_nb_a):
        # x = (1, 0): F ~ 0.745; dropping either feature lowers the
        # expectation (0.524 and 0.727), so both support
        support, opposing = partition_support(toy_lr, toy_nb_a, [1, 0])
        assert support == (0, 1)
        assert opposing == ()
        drop0 = expected_prediction(toy_nb_a, PartialObservation({1: 0}))[1]
        drop1 = expected_prediction(toy_nb_a, PartialObservation({0: 1}))[1]
        assert drop0 == pytest.approx(0.5238, abs=5e-4)
        assert drop1 == pytest.approx(0.7273, abs=5e-4)

    def test_toy_negative_instance(self, toy_lr, toy_nb_a):
        # x = (0, 1): F < 0.5; dropping the second feature raises the
        # expectation to ~0.222 > F, so the first feature's absence supports
        # the negative classification
        full = lr_predict(toy_lr, [0, 1])[1]
        assert full < 0.5
        support, _ = partition_support(toy_lr, toy_nb_a, [0, 1])
        drop_second = expected_prediction(toy_nb_a, PartialObservation({0: 0}))[1]
        assert drop_second == pytest.approx(0.2222, abs=5e-4)
        assert drop_second > full
        assert 1 in support

    def test_inert_feature_lands_in_support(self):
        # feature 1 has zero weight and symmetric conditionals: removing it
        # leaves the prediction unchanged, which the tie rule counts as support
        lr = LogisticRegressionModel(2, 2, [[0.3, 1.0, 0.0]])
        nb = lr_to_nb(lr, [0.7, 0.5])
        support, opposing = partition_support(lr, nb, [1, 1])
        assert 1 in support

    def test_partition_is_a_partition(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = int(rng.integers(1, 9))
            lr = random_binary_lr(rng, n)
            nb = lr_to_nb(lr, rng.uniform(0.1, 0.9, size=n))
            x = rng.integers(0, 2, size=n)
            support, opposing = partition_support(lr, nb, x)
            assert sorted(support + opposing) == list(range(n))
            assert set(support) & set(opposing) == set()

    def test_multiclass_rejected(self):
        lr = LogisticRegressionModel(2, 3, np.zeros((3, 3)))
        nb = lr_to_nb(lr, [0.5, 0.5])
        with pytest.raises(ValueError, match="binary"):
            partition_support(lr, nb, [0, 1])


class TestSufficientExplanation:
    def test_toy_single_feature_explanation(self, toy_lr, toy_nb_a):
        for search in ("exact", "greedy"):
            result = sufficient_explanation(toy_lr, toy_nb_a, [1, 0], search=search)
            assert result.status == "ok"
            assert result.features == (0,)
            assert result.expected == pytest.approx(8 / 11, abs=1e-9)

    def test_empty_explanation_when_prior_agrees(self):
        lr = LogisticRegressionModel(1, 2, [[1.0, 0.5]])
        nb = lr_to_nb(lr, [0.6])
        assert nb.class_prior[1] > 0.5
        result = sufficient_explanation(lr, nb, [1], search="exact")
        assert result.status == "ok"
        assert result.features == ()

    def test_sign_condition_always_holds_on_success(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            n = int(rng.integers(1, 11))
            lr = random_binary_lr(rng, n)
            nb = lr_to_nb(lr, rng.uniform(0.1, 0.9, size=n))
            x = rng.integers(0, 2, size=n)
            for search in ("exact", "greedy"):
                result = sufficient_explanation(lr, nb, x, search=search, exact_cap=n)
                assert result.status == "ok"
                target = np.sign(lr_predict(lr, x)[1] - 0.5)
                obs = {i: int(x[i]) for i in result.opposing}
                obs.update({i: int(x[i]) for i in result.features})
                value = expected_prediction(nb, PartialObservation(obs))[1]
                assert np.sign(value - 0.5) == target

    def test_exact_is_minimal_by_enumeration(self):
        rng = np.random.default_rng(2)
        for _ in range(15):
            n = int(rng.integers(2, 8))
            lr = random_binary_lr(rng, n)
            nb = lr_to_nb(lr, rng.uniform(0.15, 0.85, size=n))
            x = rng.integers(0, 2, size=n)
            result = sufficient_explanation(lr, nb, x, search="exact", exact_cap=n)
            target = np.sign(lr_predict(lr, x)[1] - 0.5)
            base = {i: int(x[i]) for i in result.opposing}
            for size in range(len(result.features)):
                for combo in combinations(result.support, size):
                    obs = dict(base)
                    obs.update({i: int(x[i]) for i in combo})
                    value = expected_prediction(nb, PartialObservation(obs))[1]
                    assert np.sign(value - 0.5) != target

    def test_exact_and_greedy_agree_on_small_model(self):
        """On every input of a six-feature model where exhaustive search finds
        an explanation of size <= 2, greedy search finds one of the same size
        (tie-breaking among equally small sets differs by design: exact is
        lexicographic, greedy prefers the strongest movers)."""
        rng = np.random.default_rng(7)
        n = 6
        lr = random_binary_lr(rng, n)
        nb = lr_to_nb(lr, rng.uniform(0.2, 0.8, size=n))
        codes = np.arange(2 ** n)[:, None]
        X = ((codes >> np.arange(n)[None, :]) & 1).astype(int)
        checked = 0
        for x in X:
            exact = sufficient_explanation(lr, nb, x, search="exact", exact_cap=n)
            if exact.size > 2:
                continue
            greedy = sufficient_explanation(lr, nb, x, search="greedy")
            assert greedy.status == "ok"
            assert greedy.size == exact.size
            checked += 1
        assert checked > 10

    def test_exact_cap_not_found_reports_best(self):
        rng = np.random.default_rng(3)
        lr = LogisticRegressionModel(4, 2, [[-6.0, 2.0, 2.0, 2.0, 2.0]])
        nb = lr_to_nb(lr, np.full(4, 0.5))
        result = sufficient_explanation(lr, nb, [1, 1, 1, 1], search="exact", exact_cap=0)
        assert result.status == "not_found"

    def test_explanation_depends_only_on_the_family_member_chosen(self, toy_lr, toy_nb_a, toy_nb_b):
        """Two conformant models define different feature distributions, so
        each yields an internally consistent explanation of the same input."""
        for nb in (toy_nb_a, toy_nb_b):
            result = sufficient_explanation(toy_lr, nb, [1, 0], search="exact")
            assert result.status == "ok"

    def test_same_distribution_same_explanation(self):
        """The search is a function of the expectation values alone: a model
        rebuilt from its own free conditionals explains identically."""
        rng = np.random.default_rng(8)
        for _ in range(10):
            n = int(rng.integers(2, 8))
            lr = random_binary_lr(rng, n)
            nb = lr_to_nb(lr, rng.uniform(0.2, 0.8, size=n))
            rebuilt = lr_to_nb(lr, nb.cond[1])
            x = rng.integers(0, 2, size=n)
            for search in ("exact", "greedy"):
                a = sufficient_explanation(lr, nb, x, search=search, exact_cap=n)
                b = sufficient_explanation(lr, rebuilt, x, search=search, exact_cap=n)
                assert a.features == b.features

    def test_top_support_by_weight(self, toy_lr, toy_nb_a):
        assert top_support_by_weight(toy_lr, toy_nb_a, [1, 0], 1) == (0,)
        assert top_support_by_weight(toy_lr, toy_nb_a, [1, 0], 2) == (0, 1)


class TestRenderGrid:
    def test_full_highlight_is_pure_black_white(self):
        img = render_grid([1, 0, 0, 1], {0, 1, 2, 3}, 2, 2)
        np.testing.assert_array_equal(img, [[255, 0], [0, 255]])

    def test_empty_highlight_is_gray(self):
        img = render_grid([1, 0, 1, 0], set(), 2, 2)
        np.testing.assert_array_equal(img, np.full((2, 2), 128))

    def test_partial_highlight(self):
        img = render_grid([1, 0, 1, 0], {0, 3}, 2, 2)
        np.testing.assert_array_equal(img.flatten(), [255, 128, 128, 0])

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            render_grid([1, 0, 1], set(), 2, 2)

    def test_pgm_output(self, tmp_path):
        img = render_grid([1, 0, 1, 0], {0, 3}, 2, 2)
        path = tmp_path / "img.pgm"
        write_pgm(img, path)
        data = path.read_bytes()
        assert data == b"P5\n2 2\n255\n\xff\x80\x80\x00"
