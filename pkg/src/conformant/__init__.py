"""Toolkit for learning naive Bayes models that conform with a trained
logistic regression classifier, and for using them: expected predictions
under missing features, imputation baselines, MCAR benchmarks, and
sufficient explanations of individual classifications.
"""

from .models import (
    BinaryDataset,
    LogisticRegressionModel,
    NaiveBayesModel,
    PartialObservation,
    load_model,
    lr_predict,
    model_from_json,
    model_to_json,
    nb_marginal,
    nb_posterior,
    save_model,
    validate_nb,
)
from .conformance import check_conformance, lr_to_nb, nb_to_lr
from .expectation import (
    brute_force_expectation,
    expected_prediction,
    linear_expected_prediction,
)
from .geometric import (
    GeometricProgram,
    GPSolution,
    Monomial,
    Posynomial,
    SolveOptions,
    eval_posynomial,
    solve_gp,
    to_log_convex,
)
from .learning import (
    FitOptions,
    FitReport,
    FitResult,
    build_nacl_program,
    completed_dataset,
    fit_nacl,
    marginal_log_likelihood,
)
from .baselines import Imputer, fit_imputer, fit_ml_nb, impute
from .evaluation import (
    ExperimentConfig,
    ExperimentReport,
    cross_entropy,
    mask_mcar,
    run_experiment,
    weighted_f1,
)
from .explain import (
    ExplanationResult,
    partition_support,
    render_grid,
    sufficient_explanation,
    write_pgm,
)
from .ingest import IngestSchema, binarize, read_dataset, train_lr, write_dataset

__version__ = "0.1.0"
