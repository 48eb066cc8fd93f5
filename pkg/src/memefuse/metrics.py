"""Classification metrics: confusion matrix, macro scores, Cohen's kappa.

Per-class precision/recall/F1 use the 0/0 -> 0 convention so macro
averages stay defined for absent classes.  Because "accuracy" averaged
over classes is ambiguous, the report carries both plain accuracy
(trace / total) and balanced accuracy (mean per-class recall), clearly
labeled.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ContractError


def confusion_matrix(truth, pred, num_classes: int) -> np.ndarray:
    """C x C counts with rows = true class, columns = predicted class."""
    truth = np.asarray(truth, dtype=np.int64)
    pred = np.asarray(pred, dtype=np.int64)
    if truth.shape != pred.shape or truth.ndim != 1:
        raise ContractError(f"label sequences must be equal-length 1-D, got {truth.shape} and {pred.shape}")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    if truth.size == 0:
        return counts
    if truth.min() < 0 or truth.max() >= num_classes or pred.min() < 0 or pred.max() >= num_classes:
        raise ContractError(f"labels must lie in [0, {num_classes})")
    np.add.at(counts, (truth, pred), 1)
    return counts


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=den > 0)
    return out


@dataclass
class MetricsReport:
    confusion: np.ndarray
    accuracy: float
    balanced_accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    per_class_precision: list[float]
    per_class_recall: list[float]
    per_class_f1: list[float]
    total: int
    class_names: list[str] | None = None
    kappa: float | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "total": self.total,
            "accuracy": self.accuracy,
            "balanced_accuracy": self.balanced_accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "per_class_precision": self.per_class_precision,
            "per_class_recall": self.per_class_recall,
            "per_class_f1": self.per_class_f1,
            "confusion": self.confusion.tolist(),
        }
        if self.class_names:
            doc["class_names"] = self.class_names
        if self.kappa is not None:
            doc["kappa"] = self.kappa
        doc.update(self.extras)
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        names = self.class_names or [f"class{i}" for i in range(self.confusion.shape[0])]
        width = max(9, max(len(n) for n in names) + 1)
        lines = [
            f"samples            {self.total}",
            f"accuracy           {self.accuracy:.4f}",
            f"balanced accuracy  {self.balanced_accuracy:.4f}  (mean per-class recall)",
            f"macro precision    {self.macro_precision:.4f}",
            f"macro recall       {self.macro_recall:.4f}",
            f"macro F1           {self.macro_f1:.4f}",
            "",
            f"{'class':<{width}}{'prec':>8}{'rec':>8}{'f1':>8}",
        ]
        for i, name in enumerate(names):
            lines.append(
                f"{name:<{width}}{self.per_class_precision[i]:>8.4f}"
                f"{self.per_class_recall[i]:>8.4f}{self.per_class_f1[i]:>8.4f}"
            )
        lines.append("")
        header = " ".join(f"{n[:4]:>6}" for n in names)
        corner = "true/pred"
        lines.append(f"{corner:<{width}}{header}")
        for i, name in enumerate(names):
            row = " ".join(f"{int(v):>6}" for v in self.confusion[i])
            lines.append(f"{name:<{width}}{row}")
        return "\n".join(lines) + "\n"


def macro_scores(confusion: np.ndarray, class_names: list[str] | None = None) -> MetricsReport:
    confusion = np.asarray(confusion)
    if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
        raise ContractError(f"confusion matrix must be square, got {confusion.shape}")
    total = int(confusion.sum())
    if total == 0:
        raise ContractError("confusion matrix holds no samples")
    tp = np.diag(confusion).astype(np.float64)
    fp = confusion.sum(axis=0) - tp
    fn = confusion.sum(axis=1) - tp
    precision = _safe_div(tp, tp + fp)
    recall = _safe_div(tp, tp + fn)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return MetricsReport(
        confusion=confusion,
        accuracy=float(tp.sum() / total),
        balanced_accuracy=float(recall.mean()),
        macro_precision=float(precision.mean()),
        macro_recall=float(recall.mean()),
        macro_f1=float(f1.mean()),
        per_class_precision=[float(x) for x in precision],
        per_class_recall=[float(x) for x in recall],
        per_class_f1=[float(x) for x in f1],
        total=total,
        class_names=class_names,
    )


def cohens_kappa(rater_a, rater_b, num_classes: int) -> float:
    """Chance-corrected agreement (p_o - p_e) / (1 - p_e).

    Degenerate case: if both raters always emit the same single
    category, agreement is perfect and kappa is defined as 1.0.
    """
    a = np.asarray(rater_a, dtype=np.int64)
    b = np.asarray(rater_b, dtype=np.int64)
    if a.size == 0 or a.shape != b.shape or a.ndim != 1:
        raise ContractError("rater sequences must be nonempty, equal-length and 1-D")
    table = confusion_matrix(a, b, num_classes).astype(np.float64)
    n = a.size
    p_o = float(np.trace(table)) / n
    p_e = float((table.sum(axis=1) / n) @ (table.sum(axis=0) / n))
    if abs(1.0 - p_e) < 1e-15:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)
