"""Evaluation metrics for ordinal classifiers.

All metrics are computed from integer class codes, so absolute error is
measured in label units (one step between adjacent classes). Macro F1
averages per-class F1 with the convention that a class with no true and
no predicted samples contributes 0.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DomainError
from .regularizer import OrdinalClassSet


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    per_class_recall: tuple[float, ...]
    macro_f1: float
    mae: float
    confusion: np.ndarray
    loss_curve: tuple[float, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class_recall": list(self.per_class_recall),
            "macro_f1": self.macro_f1,
            "mae": self.mae,
            "confusion": [[int(v) for v in row] for row in self.confusion],
            "loss_curve": list(self.loss_curve),
        }


def compute_metrics(y_true, y_pred, classes: OrdinalClassSet,
                    loss_curve=()) -> MetricsReport:
    """Accuracy, per-class recall, macro F1, label MAE, and confusion.

    Inputs are class codes; confusion rows index true classes in class-set
    order, columns predicted classes.
    """
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape != p.shape or t.ndim != 1 or t.size == 0:
        raise DomainError(
            f"need matching non-empty 1-D label arrays, got {t.shape} and {p.shape}"
        )
    lookup = {c: i for i, c in enumerate(classes.labels)}
    for arr, what in ((t, "true"), (p, "predicted")):
        bad = [int(v) for v in np.unique(arr) if int(v) not in lookup]
        if bad:
            raise DomainError(f"{what} labels {bad} not in class set {classes.labels}")
    n = len(classes)
    confusion = np.zeros((n, n), dtype=np.int64)
    for ti, pi in zip(t, p):
        confusion[lookup[int(ti)], lookup[int(pi)]] += 1

    total = int(confusion.sum())
    accuracy = float(np.trace(confusion)) / total

    recalls = []
    f1s = []
    for i in range(n):
        tp = float(confusion[i, i])
        true_count = float(confusion[i].sum())
        pred_count = float(confusion[:, i].sum())
        recall = tp / true_count if true_count > 0 else 0.0
        precision = tp / pred_count if pred_count > 0 else 0.0
        denom = precision + recall
        f1s.append(2.0 * precision * recall / denom if denom > 0 else 0.0)
        recalls.append(recall)

    mae = float(np.mean(np.abs(t.astype(np.float64) - p.astype(np.float64))))
    return MetricsReport(
        accuracy=accuracy,
        per_class_recall=tuple(recalls),
        macro_f1=float(np.mean(f1s)),
        mae=mae,
        confusion=confusion,
        loss_curve=tuple(float(x) for x in loss_curve),
    )
