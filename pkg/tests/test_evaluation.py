import numpy as np
import pytest

from conformant import (
    BinaryDataset,
    ExperimentConfig,
    LogisticRegressionModel,
    cross_entropy,
    fit_imputer,
    lr_to_nb,
    mask_mcar,
    run_experiment,
    weighted_f1,
)
from conformant.evaluation import accuracy, row_rng
from conformant.models import lr_predict_batch
from conftest import random_binary_lr


class TestMaskMcar:
    def test_rate_zero_keeps_everything(self):
        x = np.array([1, 0, 1, 1])
        y = mask_mcar(x, 0.0, np.random.default_rng(0))
        assert y.indices == (0, 1, 2, 3)
        assert dict(y.assignments) == {0: 1, 1: 0, 2: 1, 3: 1}

    def test_rate_one_drops_everything(self):
        y = mask_mcar(np.ones(6), 1.0, np.random.default_rng(0))
        assert len(y) == 0

    def test_binomial_count_bound(self):
        """At rate 0.5 over 10^4 features the missing count stays within
        three standard deviations (sigma = 50) of 5000."""
        rng = np.random.default_rng(123)
        x = np.ones(10_000, dtype=int)
        y = mask_mcar(x, 0.5, rng)
        missing = 10_000 - len(y)
        assert abs(missing - 5000) <= 150

    def test_invalid_rate(self):
        with pytest.raises(ValueError):
            mask_mcar(np.ones(3), 1.5, np.random.default_rng(0))

    def test_keyed_substreams_reproduce(self):
        x = np.ones(32, dtype=int)
        a = mask_mcar(x, 0.4, row_rng(7, 3, 11))
        b = mask_mcar(x, 0.4, row_rng(7, 3, 11))
        c = mask_mcar(x, 0.4, row_rng(7, 3, 12))
        assert dict(a.assignments) == dict(b.assignments)
        assert dict(a.assignments) != dict(c.assignments)


class TestCrossEntropy:
    def test_uniform_self_entropy(self):
        assert cross_entropy([0.5, 0.5], [0.5, 0.5]) == pytest.approx(np.log(2), abs=1e-12)

    def test_one_hot_reference(self):
        assert cross_entropy([1.0, 0.0], [0.9, 0.1]) == pytest.approx(
            -np.log(0.9), abs=1e-12
        )

    def test_skewed_self_entropy(self):
        assert cross_entropy([0.7, 0.3], [0.7, 0.3]) == pytest.approx(0.6109, abs=5e-5)

    def test_floor_handles_zero_predictions(self):
        assert np.isfinite(cross_entropy([0.5, 0.5], [1.0, 0.0]))

    def test_gibbs_inequality(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            K = int(rng.integers(2, 6))
            p = rng.dirichlet(np.ones(K))
            q = rng.dirichlet(np.ones(K))
            assert cross_entropy(p, q) >= cross_entropy(p, p) - 1e-12


class TestWeightedF1:
    def test_perfect_predictions(self):
        assert weighted_f1([0, 1, 2, 1], [0, 1, 2, 1], 3) == pytest.approx(1.0)

    def test_hand_confusion_matrix(self):
        # class 1: precision 1, recall 1/2 -> F1 = 2/3; class 0: 2/3 & 1 -> 0.8
        assert weighted_f1([1, 0, 0, 0], [1, 1, 0, 0], 2) == pytest.approx(
            0.5 * (2 / 3) + 0.5 * 0.8, abs=1e-12
        )

    def test_single_class_predictions_on_balanced_truth(self):
        assert weighted_f1([1, 1, 1, 1], [0, 0, 1, 1], 2) == pytest.approx(1 / 3, abs=1e-12)

    def test_absent_class_contributes_no_weight(self):
        assert weighted_f1([0, 0], [0, 0], 3) == pytest.approx(1.0)


def small_setup(seed=0, rows=40, n=5):
    rng = np.random.default_rng(seed)
    lr = random_binary_lr(rng, n)
    nb = lr_to_nb(lr, rng.uniform(0.2, 0.8, size=n))
    test = BinaryDataset(
        rows=rng.integers(0, 2, size=(rows, n)), labels=rng.integers(0, 2, size=rows)
    )
    imputers = {kind: fit_imputer(test, kind) for kind in ("mean", "median")}
    return lr, nb, test, imputers


class TestRunExperiment:
    def test_rate_zero_matches_bare_classifier(self):
        lr, nb, test, imputers = small_setup()
        config = ExperimentConfig(
            lr=lr, test=test, rates=[0.0], nb_models={"nacl": nb},
            imputers=imputers, repetitions=3, seed=5,
        )
        report = run_experiment(config)
        ref = lr_predict_batch(lr, test.rows.astype(float))
        entropy = float(np.mean(-np.sum(ref * np.log(ref), axis=1)))
        hard = np.argmax(ref, axis=1)
        acc = accuracy(hard, test.labels)
        f1 = weighted_f1(hard, test.labels, 2)
        for method in ("nacl", "mean", "median"):
            assert report.value(method, 0.0, "cross_entropy") == pytest.approx(
                entropy, abs=1e-9
            )
            assert report.value(method, 0.0, "accuracy") == acc
            assert report.value(method, 0.0, "weighted_f1") == pytest.approx(f1, abs=1e-12)

    def test_single_row_fully_missing_predicts_prior(self):
        lr, nb, _, _ = small_setup()
        test = BinaryDataset(rows=[[1, 0, 1, 1, 0]], labels=[1])
        config = ExperimentConfig(
            lr=lr, test=test, rates=[1.0], nb_models={"m": nb}, repetitions=2, seed=1,
        )
        report = run_experiment(config)
        ref = lr_predict_batch(lr, test.rows.astype(float))[0]
        expected_ce = cross_entropy(ref, nb.class_prior)
        assert report.value("m", 1.0, "cross_entropy") == pytest.approx(expected_ce, abs=1e-12)

    def test_thread_count_does_not_change_results(self, monkeypatch):
        lr, nb, test, imputers = small_setup(seed=2)
        config = ExperimentConfig(
            lr=lr, test=test, rates=[0.0, 0.5], nb_models={"nacl": nb},
            imputers=imputers, repetitions=4, seed=9,
        )
        monkeypatch.setenv("NACL_THREADS", "1")
        serial = run_experiment(config).to_csv()
        monkeypatch.setenv("NACL_THREADS", "3")
        threaded = run_experiment(config).to_csv()
        assert serial == threaded

    def test_labels_required_for_accuracy(self):
        lr, nb, test, _ = small_setup()
        unlabeled = BinaryDataset(rows=test.rows)
        with pytest.raises(ValueError, match="labels"):
            ExperimentConfig(
                lr=lr, test=unlabeled, rates=[0.2], nb_models={"m": nb}, repetitions=1,
            )
        config = ExperimentConfig(
            lr=lr, test=unlabeled, rates=[0.2], nb_models={"m": nb},
            repetitions=1, metrics=("cross_entropy",),
        )
        report = run_experiment(config)
        assert {r.metric for r in report.rows} == {"cross_entropy"}

    def test_dimension_mismatch_rejected(self):
        lr, nb, test, _ = small_setup()
        other = LogisticRegressionModel(3, 2, np.zeros((1, 4)))
        with pytest.raises(ValueError):
            ExperimentConfig(lr=other, test=test, rates=[0.2], nb_models={"m": nb})

    def test_report_formats(self):
        lr, nb, test, imputers = small_setup(seed=3)
        config = ExperimentConfig(
            lr=lr, test=test, rates=[0.0, 0.4], nb_models={"nacl": nb},
            imputers=imputers, repetitions=2, seed=4,
        )
        report = run_experiment(config)
        csv_text = report.to_csv()
        assert csv_text.startswith("method,rate,metric,mean,stderr,repetitions\n")
        assert len(csv_text.strip().split("\n")) == 1 + 3 * 2 * 3
        import json

        doc = json.loads(report.to_json())
        assert doc["config"]["seed"] == 4
        assert len(doc["rows"]) == 18
        assert "cross_entropy" in report.summary()


class TestFigures:
    def test_figures_written_and_deterministic(self, tmp_path):
        from conformant.figures import save_metric_figures

        lr, nb, test, imputers = small_setup(seed=4)
        config = ExperimentConfig(
            lr=lr, test=test, rates=[0.0, 0.5], nb_models={"nacl": nb},
            imputers=imputers, repetitions=2, seed=4,
        )
        report = run_experiment(config)
        first = save_metric_figures(report, tmp_path / "a")
        second = save_metric_figures(report, tmp_path / "b")
        assert [p.name for p in first] == [
            "cross_entropy.png",
            "accuracy.png",
            "weighted_f1.png",
        ]
        for a, b in zip(first, second):
            data = a.read_bytes()
            assert data[:8] == b"\x89PNG\r\n\x1a\n"
            assert data == b.read_bytes()
