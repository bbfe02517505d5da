"""Validation statistics and campaign report serialization."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import LengthMismatchError, NoCorrectBaselineError, TooFewPointsError
from .seqcore import gc_content

CSV_COLUMNS = ("grid_value", "clean_acc", "attacked_acc", "success_rate",
               "mean_queries", "gc_pearson")


def pearson(xs, ys) -> float | None:
    """Sample Pearson correlation; None when either variance is zero."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise LengthMismatchError(f"shapes differ: {xs.shape} vs {ys.shape}")
    if xs.size < 2:
        raise TooFewPointsError("need at least 2 points")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    return float((dx @ dy) / np.sqrt(sxx * syy))


def gc_correlation(originals, adversarials) -> float | None:
    """Pearson correlation of paired GC percentages."""
    if len(originals) != len(adversarials):
        raise LengthMismatchError("lists must be pairwise aligned")
    return pearson([gc_content(s) for s in originals],
                   [gc_content(s) for s in adversarials])


def accuracy(outcomes) -> float:
    """Fraction of outcomes whose final prediction equals the true label."""
    if not outcomes:
        raise ValueError("outcomes must be nonempty")
    hits = sum(1 for o in outcomes if o.final_prediction == o.true_label)
    return hits / len(outcomes)


def clean_accuracy(outcomes) -> float:
    if not outcomes:
        raise ValueError("outcomes must be nonempty")
    hits = sum(1 for o in outcomes if o.original_prediction == o.true_label)
    return hits / len(outcomes)


def success_rate(outcomes) -> float:
    """Flipped samples over initially-correct samples."""
    if not outcomes:
        raise ValueError("outcomes must be nonempty")
    baseline = sum(1 for o in outcomes if o.original_prediction == o.true_label)
    if baseline == 0:
        raise NoCorrectBaselineError("no initially-correct sample")
    return sum(1 for o in outcomes if o.success) / baseline


@dataclass(frozen=True)
class ReportRow:
    grid_value: float
    clean_acc: float
    attacked_acc: float
    success_rate: float | None
    mean_queries: float
    gc_pearson: float | None


@dataclass(frozen=True)
class SampleRecord:
    """Per-sample outcome stored in the report (one list per grid value)."""

    id: str
    true_label: int
    original_prediction: int
    final_prediction: int
    success: bool
    queries: int
    n_edits: int
    final_true_prob: float
    adversarial: str

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "true_label": self.true_label,
            "original_prediction": self.original_prediction,
            "final_prediction": self.final_prediction,
            "success": self.success,
            "queries": self.queries,
            "n_edits": self.n_edits,
            "final_true_prob": self.final_true_prob,
            "adversarial": self.adversarial,
        }


@dataclass(frozen=True)
class CampaignReport:
    """Everything one grid sweep produced, ready for serialization."""

    attack_kind: str
    grid_axis: str
    fixed_value: float | None
    seed: int
    victim: str
    rows: tuple[ReportRow, ...]
    samples: tuple[tuple[SampleRecord, ...], ...] = field(default=())
    incomplete: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "attack_kind": self.attack_kind,
            "grid_axis": self.grid_axis,
            "fixed_value": self.fixed_value,
            "seed": self.seed,
            "victim": self.victim,
            "incomplete": self.incomplete,
            "error": self.error,
            "rows": [
                {
                    "grid_value": r.grid_value,
                    "clean_acc": r.clean_acc,
                    "attacked_acc": r.attacked_acc,
                    "success_rate": r.success_rate,
                    "mean_queries": r.mean_queries,
                    "gc_pearson": r.gc_pearson,
                }
                for r in self.rows
            ],
            "samples": [
                [s.to_dict() for s in per_value] for per_value in self.samples
            ],
        }


def _fmt(value: float | None) -> str:
    return "" if value is None else f"{value:.6f}"


def emit_report(report: CampaignReport, path, fmt: str = "csv") -> None:
    """Write a report as CSV (pinned schema and float formatting) or JSON.

    Byte-deterministic for identical reports: 6 decimal places, '.' decimal
    separator, LF line endings.  Incomplete reports get a leading
    "# INCOMPLETE" comment line in CSV form.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    if fmt == "json":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
            fh.write("\n")
        return
    lines = []
    if report.incomplete:
        lines.append("# INCOMPLETE")
    lines.append(",".join(CSV_COLUMNS))
    for row in report.rows:
        lines.append(",".join([
            _fmt(row.grid_value),
            _fmt(row.clean_acc),
            _fmt(row.attacked_acc),
            _fmt(row.success_rate),
            _fmt(row.mean_queries),
            _fmt(row.gc_pearson),
        ]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
