import numpy as np
import pytest

from conformant import (
    LogisticRegressionModel,
    NaiveBayesModel,
    check_conformance,
    lr_to_nb,
    nb_to_lr,
)
from conftest import random_binary_lr, random_gauged_lr, random_nb


class TestNbToLr:
    def test_toy_model_weights(self, toy_nb_a):
        lr = nb_to_lr(toy_nb_a)
        np.testing.assert_allclose(lr.weights[0], [-1.16, 2.23, -0.20], atol=0.005)

    def test_second_conformant_model_same_weights(self, toy_lr, toy_nb_b):
        # a different member of the conformant family translates back into
        # the same classifier
        lr = nb_to_lr(toy_nb_b)
        np.testing.assert_allclose(lr.weights, toy_lr.weights, atol=0.005)

    def test_uninformative_model_gives_zero_weights(self):
        nb = NaiveBayesModel(3, 2, [0.5, 0.5], [[0.3, 0.7, 0.5]] * 2)
        np.testing.assert_allclose(nb_to_lr(nb).weights, 0.0, atol=1e-12)

    def test_boundary_parameters_rejected(self):
        nb = NaiveBayesModel(1, 2, [0.5, 0.5], [[1e-15], [0.5]])
        with pytest.raises(ValueError, match="infinite"):
            nb_to_lr(nb)

    def test_invalid_model_rejected(self):
        nb = NaiveBayesModel(1, 2, [0.7, 0.7], [[0.5], [0.5]])
        with pytest.raises(ValueError, match="invalid"):
            nb_to_lr(nb)

    def test_multiclass_gauge_row_zero(self):
        rng = np.random.default_rng(0)
        nb = random_nb(rng, 4, 3)
        lr = nb_to_lr(nb)
        np.testing.assert_allclose(lr.weights[0], 0.0, atol=0.0)


class TestLrToNb:
    def test_recovers_first_toy_model(self, toy_lr, toy_nb_a):
        nb = lr_to_nb(toy_lr, [0.8, 0.45])
        np.testing.assert_allclose(nb.class_prior, toy_nb_a.class_prior, atol=0.005)
        np.testing.assert_allclose(nb.cond, toy_nb_a.cond, atol=0.005)

    def test_second_model_listed_parameters(self, toy_lr):
        nb = lr_to_nb(toy_lr, [0.6, 0.9])
        assert nb.class_prior[1] == pytest.approx(0.36, abs=0.005)
        assert nb.cond[0, 0] == pytest.approx(0.14, abs=0.005)
        assert nb.cond[0, 1] == pytest.approx(0.92, abs=0.005)

    def test_zero_weights_flat_theta_gives_uniform(self):
        lr = LogisticRegressionModel(3, 2, np.zeros((1, 4)))
        nb = lr_to_nb(lr, [0.5, 0.5, 0.5])
        np.testing.assert_allclose(nb.class_prior, 0.5, atol=1e-12)
        np.testing.assert_allclose(nb.cond, 0.5, atol=1e-12)

    def test_theta_outside_open_interval_rejected(self, toy_lr):
        for theta in ([0.0, 0.5], [0.5, 1.0]):
            with pytest.raises(ValueError):
                lr_to_nb(toy_lr, theta)

    def test_free_parameters_bind_exactly(self, toy_lr):
        theta = np.array([0.3123456, 0.87654])
        nb = lr_to_nb(toy_lr, theta)
        np.testing.assert_array_equal(nb.cond[1], theta)  # binary: positive class


class TestCheckConformance:
    def test_exact_translation_conforms(self, toy_nb_a):
        ok, dev = check_conformance(toy_nb_a, nb_to_lr(toy_nb_a), 1e-9)
        assert ok and dev < 1e-12

    def test_perturbed_prior_breaks_conformance(self, toy_nb_a):
        lr = nb_to_lr(toy_nb_a)
        skewed = NaiveBayesModel(2, 2, [0.4, 0.6], toy_nb_a.cond)
        ok, dev = check_conformance(skewed, lr, 1e-3)
        assert not ok and dev > 1e-3

    def test_trivial_pair_at_zero_tolerance(self):
        nb = NaiveBayesModel(2, 2, [0.5, 0.5], [[0.5, 0.5]] * 2)
        lr = LogisticRegressionModel(2, 2, np.zeros((1, 3)))
        ok, dev = check_conformance(nb, lr, 0.0)
        assert ok and dev == 0.0

    def test_refuses_large_models_without_sampling(self):
        rng = np.random.default_rng(1)
        nb = random_nb(rng, 25)
        lr = nb_to_lr(nb)
        with pytest.raises(ValueError, match="sample"):
            check_conformance(nb, lr, 1e-9)
        ok, _ = check_conformance(nb, lr, 1e-9, sample=512)
        assert ok

    def test_dimension_mismatch(self, toy_nb_a):
        lr = LogisticRegressionModel(3, 2, np.zeros((1, 4)))
        with pytest.raises(ValueError):
            check_conformance(toy_nb_a, lr, 1e-9)


class TestRoundTrips:
    def test_nb_to_lr_round_trip(self):
        rng = np.random.default_rng(2)
        for _ in range(40):
            n = int(rng.integers(1, 11))
            nb = random_nb(rng, n)
            ok, dev = check_conformance(nb, nb_to_lr(nb), 1e-9)
            assert ok, dev

    def test_inverse_pair_binary(self):
        rng = np.random.default_rng(3)
        for _ in range(40):
            n = int(rng.integers(1, 11))
            lr = random_binary_lr(rng, n)
            theta = rng.uniform(0.05, 0.95, size=n)
            back = nb_to_lr(lr_to_nb(lr, theta))
            np.testing.assert_allclose(back.weights, lr.weights, atol=1e-9)

    def test_inverse_pair_multiclass(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            n = int(rng.integers(1, 8))
            K = int(rng.integers(3, 5))
            lr = random_gauged_lr(rng, n, K)
            theta = rng.uniform(0.05, 0.95, size=n)
            back = nb_to_lr(lr_to_nb(lr, theta))
            np.testing.assert_allclose(back.weights, lr.weights, atol=1e-9)

    def test_arbitrary_gauge_recovers_same_function(self):
        """A classifier with a nonzero class-0 row maps to the same
        conformant model as its canonical-gauge version."""
        rng = np.random.default_rng(5)
        W = rng.normal(size=(3, 5))
        lr = LogisticRegressionModel(4, 3, W)
        gauged = LogisticRegressionModel(4, 3, W - W[0])
        theta = rng.uniform(0.2, 0.8, size=4)
        a, b = lr_to_nb(lr, theta), lr_to_nb(gauged, theta)
        np.testing.assert_allclose(a.class_prior, b.class_prior, atol=1e-12)
        np.testing.assert_allclose(a.cond, b.cond, atol=1e-12)

    def test_distinct_theta_distinct_models_both_conform(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            n = int(rng.integers(1, 7))
            lr = random_binary_lr(rng, n)
            t1 = rng.uniform(0.1, 0.45, size=n)
            t2 = rng.uniform(0.55, 0.9, size=n)
            nb1, nb2 = lr_to_nb(lr, t1), lr_to_nb(lr, t2)
            assert np.max(np.abs(nb1.cond - nb2.cond)) > 1e-3
            assert check_conformance(nb1, lr, 1e-9).ok
            assert check_conformance(nb2, lr, 1e-9).ok

    def test_multiclass_conformance(self):
        rng = np.random.default_rng(7)
        for K in (3, 4):
            for _ in range(10):
                n = int(rng.integers(1, 7))
                lr = random_gauged_lr(rng, n, K)
                nb = lr_to_nb(lr, rng.uniform(0.1, 0.9, size=n))
                ok, dev = check_conformance(nb, lr, 1e-8)
                assert ok, dev
