"""Command-line interface.

Subcommands: ``ingest`` (CSV + schema -> dataset file), ``train-lr``,
``nacl-fit``, ``eval`` (writes report CSV/JSON plus metric figures),
``explain`` (prints the explanation, optionally writes a PGM image), and
``convert`` (model JSON inspection and translation).

Exit codes: 0 success, 1 user error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .baselines import IMPUTER_KINDS, fit_imputer, fit_ml_nb
from .conformance import check_conformance, lr_to_nb, nb_to_lr
from .evaluation import ALL_METRICS, ExperimentConfig, run_experiment
from .explain import render_grid, sufficient_explanation, write_pgm
from .figures import save_metric_figures
from .ingest import FittedStats, IngestSchema, binarize_csv, read_dataset, train_lr, write_dataset
from .learning import FitOptions, fit_nacl
from .models import (
    LogisticRegressionModel,
    NaiveBayesModel,
    load_model,
    save_model,
)

__all__ = ["cli_dispatch", "main"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="conformant", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="binarize a raw CSV into a dataset file")
    p.add_argument("--csv", required=True)
    p.add_argument("--schema", required=True, help="JSON file: label column + per-column kinds")
    p.add_argument("--out", required=True)
    p.add_argument("--stats-out", help="where to write fitted binarization statistics")
    p.add_argument("--stats", help="reuse previously fitted statistics (test split)")
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("train-lr", help="train a logistic regression")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--max-epochs", type=int, default=1000)
    p.set_defaults(func=_cmd_train_lr)

    p = sub.add_parser("nacl-fit", help="fit the conformant naive Bayes model")
    p.add_argument("--lr", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--method", choices=["gp", "reduced"], default="reduced")
    p.add_argument("--alpha", choices=["posterior", "uniform"], default="posterior")
    p.add_argument("--report", help="where to write the fit report JSON")
    p.set_defaults(func=_cmd_nacl_fit)

    p = sub.add_parser("eval", help="benchmark methods under MCAR missingness")
    p.add_argument("--lr", required=True)
    p.add_argument("--data", required=True, help="test dataset file")
    p.add_argument("--nb", help="conformant model JSON (method name: nacl)")
    p.add_argument("--ml-nb", help="maximum-likelihood naive Bayes JSON (method name: ml-nb)")
    p.add_argument("--train", help="training dataset file; fits the imputation baselines")
    p.add_argument("--methods", default=None, help="comma list, e.g. nacl,mean,median")
    p.add_argument("--rates", default="0,0.2,0.4,0.6,0.8")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--metrics", default=None, help=f"comma list from {','.join(ALL_METRICS)}")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("explain", help="sufficient explanation for one row")
    p.add_argument("--lr", required=True)
    p.add_argument("--nb", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--index", type=int, required=True)
    p.add_argument("--search", default="greedy", help="greedy or exact:<max size>")
    p.add_argument("--image-out", help="write a PGM of the explanation")
    p.add_argument("--width", type=int)
    p.add_argument("--height", type=int)
    p.set_defaults(func=_cmd_explain)

    p = sub.add_parser("convert", help="inspect or translate a model JSON")
    p.add_argument("--model", required=True)
    p.add_argument("--to-lr", action="store_true", help="translate a naive Bayes model to its classifier")
    p.add_argument("--to-nb", action="store_true", help="translate a classifier to a conformant model")
    p.add_argument("--theta", help="free conditionals for --to-nb: one value or a comma list")
    p.add_argument("--out", help="output path for a translation")
    p.set_defaults(func=_cmd_convert)
    return parser


def _load_typed(path, expected):
    model = load_model(path)
    if not isinstance(model, expected):
        raise UsageError(f"{path} does not hold a {expected.__name__}")
    return model


def _cmd_ingest(args) -> int:
    schema = IngestSchema.from_json(Path(args.schema).read_text())
    stats = FittedStats.from_json(Path(args.stats).read_text()) if args.stats else None
    dataset, fitted = binarize_csv(args.csv, schema, stats)
    write_dataset(dataset, args.out)
    stats_out = args.stats_out or (str(args.out) + ".stats.json")
    if args.stats is None:
        Path(stats_out).write_text(fitted.to_json() + "\n")
        print(f"wrote {dataset.num_rows} rows x {dataset.num_features} features to {args.out}; stats: {stats_out}")
    else:
        print(f"wrote {dataset.num_rows} rows x {dataset.num_features} features to {args.out} (reused stats)")
    return 0


def _cmd_train_lr(args) -> int:
    data = read_dataset(args.data)
    model = train_lr(data, l2=args.l2, max_epochs=args.max_epochs)
    save_model(model, args.out)
    print(f"trained {model.num_classes}-class model on {data.num_rows} rows -> {args.out}")
    return 0


def _cmd_nacl_fit(args) -> int:
    lr = _load_typed(args.lr, LogisticRegressionModel)
    data = read_dataset(args.data)
    result = fit_nacl(lr, data, FitOptions(method=args.method, alpha_policy=args.alpha))
    save_model(result.model, args.out)
    report = result.report
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_json_dict(), indent=1) + "\n")
    print(
        f"method={report.method} alpha={report.alpha_policy} "
        f"log_likelihood={report.log_likelihood:.6f} iterations={report.iterations} "
        f"conformance_max_dev={report.conformance_max_dev:.3g} "
        f"active_inequalities={report.active_inequalities}"
    )
    if report.status != "ok":
        print(f"solver did not fully converge: status={report.status}", file=sys.stderr)
        return 2
    return 0


def _parse_rates(text):
    return [float(v) for v in text.split(",") if v != ""]


def _cmd_eval(args) -> int:
    lr = _load_typed(args.lr, LogisticRegressionModel)
    test = read_dataset(args.data)
    nb_models = {}
    if args.nb:
        nb_models["nacl"] = _load_typed(args.nb, NaiveBayesModel)
    if args.ml_nb:
        nb_models["ml-nb"] = _load_typed(args.ml_nb, NaiveBayesModel)
    imputers = {}
    train = read_dataset(args.train) if args.train else None
    if train is not None:
        for kind in IMPUTER_KINDS:
            imputers[kind] = fit_imputer(train, kind)
    wanted_methods = [m for m in args.methods.split(",") if m] if args.methods else None
    if (
        "ml-nb" not in nb_models
        and wanted_methods is not None
        and "ml-nb" in wanted_methods
        and train is not None
        and train.labels is not None
    ):
        nb_models["ml-nb"] = fit_ml_nb(train)
    if wanted_methods is not None:
        unknown = [m for m in wanted_methods if m not in nb_models and m not in imputers]
        if unknown:
            raise UsageError(
                f"methods {unknown} unavailable; provide --nb/--ml-nb/--train as needed"
            )
        nb_models = {k: v for k, v in nb_models.items() if k in wanted_methods}
        imputers = {k: v for k, v in imputers.items() if k in wanted_methods}
    if not nb_models and not imputers:
        raise UsageError("no methods selected; pass --nb, --ml-nb, or --train")
    metrics = ALL_METRICS if args.metrics is None else tuple(args.metrics.split(","))
    if test.labels is None:
        metrics = tuple(m for m in metrics if m == "cross_entropy")
    config = ExperimentConfig(
        lr=lr,
        test=test,
        rates=_parse_rates(args.rates),
        nb_models=nb_models,
        imputers=imputers,
        repetitions=args.reps,
        seed=args.seed,
        metrics=metrics,
    )
    report = run_experiment(config)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "report.csv").write_text(report.to_csv())
    (out_dir / "report.json").write_text(report.to_json() + "\n")
    figures = save_metric_figures(report, out_dir)
    print(report.summary())
    print(f"report written to {out_dir} ({len(figures)} figures)")
    return 0


def _cmd_explain(args) -> int:
    lr = _load_typed(args.lr, LogisticRegressionModel)
    nb = _load_typed(args.nb, NaiveBayesModel)
    data = read_dataset(args.data)
    if not 0 <= args.index < data.num_rows:
        raise UsageError(f"--index must be in [0, {data.num_rows})")
    x = data.rows[args.index]
    if args.search == "greedy":
        search, cap = "greedy", 4
    elif args.search.startswith("exact"):
        search = "exact"
        _, _, tail = args.search.partition(":")
        cap = int(tail) if tail else 4
    else:
        raise UsageError("--search must be 'greedy' or 'exact[:<max size>]'")
    ok, dev = check_conformance(nb, lr, 1e-6, sample=None if lr.num_features <= 20 else 4096)
    if not ok:
        print(f"warning: model conformance deviation {dev:.3g} exceeds 1e-6", file=sys.stderr)
    result = sufficient_explanation(lr, nb, x, search=search, exact_cap=cap)
    print(f"support:  {list(result.support)}")
    print(f"opposing: {list(result.opposing)}")
    print(f"explanation ({result.status}, size {result.size}): {list(result.features)}")
    print(f"expected prediction with explanation observed: {result.expected:.4f}")
    if args.image_out:
        n = lr.num_features
        width, height = args.width, args.height
        if width is None or height is None:
            side = int(round(n ** 0.5))
            if side * side != n:
                raise UsageError("--width/--height required for non-square feature counts")
            width = height = side
        image = render_grid(x, result.features, width, height)
        write_pgm(image, args.image_out)
        print(f"image written to {args.image_out}")
    return 0 if result.status == "ok" else 2


def _cmd_convert(args) -> int:
    model = load_model(args.model)
    if isinstance(model, LogisticRegressionModel):
        print(
            f"logistic regression: {model.num_features} features, "
            f"{model.num_classes} classes, weight rows {model.weights.shape[0]}"
        )
        print(f"bias: {model.weights[:, 0].tolist()}")
        if args.to_nb:
            if not args.out:
                raise UsageError("--to-nb needs --out")
            theta_raw = args.theta or "0.5"
            values = [float(v) for v in theta_raw.split(",")]
            theta = (
                np.full(model.num_features, values[0])
                if len(values) == 1
                else np.array(values)
            )
            nb = lr_to_nb(model, theta)
            save_model(nb, args.out)
            print(f"conformant model written to {args.out}")
    elif isinstance(model, NaiveBayesModel):
        print(
            f"naive Bayes: {model.num_features} features, {model.num_classes} classes"
        )
        print(f"prior: {model.class_prior.tolist()}")
        if args.to_lr:
            if not args.out:
                raise UsageError("--to-lr needs --out")
            save_model(nb_to_lr(model), args.out)
            print(f"classifier written to {args.out}")
    return 0


def cli_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
        return int(args.func(args) or 0)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (np.linalg.LinAlgError, FloatingPointError, OverflowError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))
