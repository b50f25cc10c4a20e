"""Render benchmark reports as metric-versus-missing-rate figures."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import ExperimentReport

__all__ = ["save_metric_figures"]

_LABELS = {
    "cross_entropy": "mean cross entropy to full-data predictions",
    "accuracy": "accuracy",
    "weighted_f1": "weighted F1",
}


def save_metric_figures(report: ExperimentReport, out_dir) -> list[Path]:
    """One PNG per metric: a line per method over the missing rates.

    Files are written without volatile metadata so repeated runs are
    byte-identical.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = list(dict.fromkeys(r.metric for r in report.rows))
    methods = list(dict.fromkeys(r.method for r in report.rows))
    written = []
    for metric in metrics:
        fig, ax = plt.subplots(figsize=(5.5, 3.6))
        for method in methods:
            pts = sorted(
                (r.rate, r.mean, r.stderr)
                for r in report.rows
                if r.method == method and r.metric == metric
            )
            if not pts:
                continue
            rates = [p[0] for p in pts]
            means = [p[1] for p in pts]
            errs = [p[2] for p in pts]
            ax.errorbar(rates, means, yerr=errs, marker="o", capsize=3, label=method)
        ax.set_xlabel("fraction of features missing")
        ax.set_ylabel(_LABELS.get(metric, metric))
        ax.grid(True, alpha=0.3)
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"{metric}.png"
        fig.savefig(path, dpi=150, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written
