"""Span-level micro precision/recall/F1 with exact-match semantics.

A predicted span counts only if its (start, end, label) triple appears in
the gold sentence verbatim; there is no partial credit. All three ratios
define 0/0 as 0. Scores are exact rationals so a perfect run is exactly 1,
not 0.9999....
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DataError
from .formats import CorpusDocument


@dataclass
class LabelScores:
    """Counts and derived metrics for one label (or the micro total)."""

    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> Fraction:
        return Fraction(self.tp, self.tp + self.fp) if self.tp + self.fp else Fraction(0)

    @property
    def recall(self) -> Fraction:
        return Fraction(self.tp, self.tp + self.fn) if self.tp + self.fn else Fraction(0)

    @property
    def f1(self) -> Fraction:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else Fraction(0)


@dataclass
class EvalReport:
    total: LabelScores = field(default_factory=LabelScores)
    per_label: dict[str, LabelScores] = field(default_factory=dict)


def evaluate(pred: CorpusDocument, gold: CorpusDocument) -> EvalReport:
    """Micro-aggregated exact span match between two token-identical corpora."""
    if len(pred) != len(gold):
        raise DataError(
            f"corpus size mismatch: {len(pred)} predicted vs {len(gold)} gold sentences "
            f"(first divergence at sentence {min(len(pred), len(gold))})"
        )
    report = EvalReport()
    for pred_sent, gold_sent in zip(pred, gold):
        if pred_sent.sentence.tokens != gold_sent.sentence.tokens:
            raise DataError(
                f"tokenization mismatch at sentence {gold_sent.sentence.id}: "
                f"{len(pred_sent.sentence)} vs {len(gold_sent.sentence)} tokens or differing text"
            )
        pred_set = set(pred_sent.entities)
        gold_set = set(gold_sent.entities)
        labels = {e.label for e in pred_set | gold_set if e.label is not None}
        for label in labels:
            p_l = {e for e in pred_set if e.label == label}
            g_l = {e for e in gold_set if e.label == label}
            tp = len(p_l & g_l)
            scores = report.per_label.setdefault(label, LabelScores())
            scores.tp += tp
            scores.fp += len(p_l) - tp
            scores.fn += len(g_l) - tp
    for scores in report.per_label.values():
        report.total.tp += scores.tp
        report.total.fp += scores.fp
        report.total.fn += scores.fn
    return report


def _metric_cell(value: Fraction) -> str:
    return f"{value!s} ({float(value):.4f})"


def render_report(report: EvalReport) -> str:
    """Aligned text table: one row per label plus the micro total."""
    header = ["label", "tp", "fp", "fn", "precision", "recall", "f1"]
    rows = [header]
    for label in sorted(report.per_label):
        s = report.per_label[label]
        rows.append(
            [label, str(s.tp), str(s.fp), str(s.fn)]
            + [_metric_cell(m) for m in (s.precision, s.recall, s.f1)]
        )
    t = report.total
    rows.append(
        ["ALL", str(t.tp), str(t.fp), str(t.fn)]
        + [_metric_cell(m) for m in (t.precision, t.recall, t.f1)]
    )
    widths = [max(len(row[col]) for row in rows) for col in range(len(header))]
    return "\n".join(
        "  ".join(cell.ljust(widths[col]) for col, cell in enumerate(row)).rstrip()
        for row in rows
    ) + "\n"


def report_record(report: EvalReport) -> dict:
    """Machine-readable mirror of the report; fractions rendered as strings."""

    def block(s: LabelScores) -> dict:
        return {
            "tp": s.tp,
            "fp": s.fp,
            "fn": s.fn,
            "precision": str(s.precision),
            "recall": str(s.recall),
            "f1": str(s.f1),
        }

    return {
        "total": block(report.total),
        "per_label": {label: block(s) for label, s in sorted(report.per_label.items())},
    }
