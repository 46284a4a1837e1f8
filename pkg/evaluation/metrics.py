"""
Evaluation Metrics
==================

One-vs-rest counts per class from the confusion matrix:

    TP = cm[c][c]    FN = row sum - TP    FP = column sum - TP    TN = rest

precision, recall, specificity and F1 follow directly; a zero denominator
gives 0 and the metric name is listed in the class's `undefined` flags.
AUC is the macro average of per-class one-vs-rest ROC areas (trapezoidal,
via scikit-learn) over classes that have both positives and negatives.
"""

from typing import Dict, Optional, Sequence

import numpy as np
from sklearn.metrics import confusion_matrix, roc_auc_score

from models.errors import DataError, DimensionError
from models.reports import AblationReport, AblationRow, ClassMetrics, ConfusionMatrix, EvalReport

ABLATION_METRICS = ("accuracy", "precision", "recall", "specificity", "f1", "auc")


def build_confusion(labels: Sequence[int], predictions: Sequence[int], n_classes: int) -> ConfusionMatrix:
    counts = confusion_matrix(np.asarray(labels), np.asarray(predictions), labels=list(range(n_classes)))
    return ConfusionMatrix(n_classes=n_classes, counts=counts.astype(int).tolist())


def _ratio(num: float, den: float, name: str, undefined: list) -> float:
    if den == 0:
        undefined.append(name)
        return 0.0
    return float(num / den)


def compute_metrics(
    cm: ConfusionMatrix,
    scores: np.ndarray,
    labels: Sequence[int],
    class_names: Optional[Sequence[str]] = None,
    loss: Optional[float] = None,
    n_parameters: Optional[int] = None,
    n_quantum_parameters: Optional[int] = None,
) -> EvalReport:
    """
    Full report from a confusion matrix plus the per-sample class scores and
    true labels the ROC curves need.
    """
    scores = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.intp).reshape(-1)
    n = cm.n_classes
    total = cm.total
    if total == 0:
        raise DataError("cannot compute metrics over zero samples")
    if scores.shape != (total, n):
        raise DimensionError(f"scores have shape {scores.shape}, confusion matrix implies ({total}, {n})")
    if labels.shape[0] != total:
        raise DimensionError(f"{labels.shape[0]} label(s) for a confusion matrix over {total} sample(s)")
    counts = np.asarray(cm.counts, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= n:
        raise DimensionError(f"labels must lie in [0, {n})")
    if not np.array_equal(np.bincount(labels, minlength=n), counts.sum(axis=1)):
        raise DimensionError("label counts disagree with the confusion matrix rows")
    names = list(class_names) if class_names is not None else [str(c) for c in range(n)]

    per_class = []
    aucs = []
    for c in range(n):
        tp = counts[c, c]
        fn = counts[c, :].sum() - tp
        fp = counts[:, c].sum() - tp
        tn = total - tp - fn - fp
        undefined: list = []
        precision = _ratio(tp, tp + fp, "precision", undefined)
        recall = _ratio(tp, tp + fn, "recall", undefined)
        specificity = _ratio(tn, tn + fp, "specificity", undefined)
        f1 = _ratio(2 * precision * recall, precision + recall, "f1", undefined)

        positives = labels == c
        if positives.all() or not positives.any():
            undefined.append("auc")
            auc = 0.0
        else:
            auc = float(roc_auc_score(positives.astype(int), scores[:, c]))
            aucs.append(auc)

        per_class.append(ClassMetrics(
            label=c, name=names[c], support=int(tp + fn),
            precision=precision, recall=recall, specificity=specificity, f1=f1, auc=auc,
            undefined=undefined,
        ))

    return EvalReport(
        accuracy=cm.trace / total,
        macro_auc=float(np.mean(aucs)) if aucs else 0.0,
        auc_undefined=not aucs,
        n_samples=total,
        per_class=per_class,
        confusion=cm,
        loss=loss,
        n_parameters=n_parameters,
        n_quantum_parameters=n_quantum_parameters,
    )


def ablation_row(dataset: str, cut: bool, report: EvalReport, final_loss: Optional[float] = None) -> AblationRow:
    return AblationRow(
        dataset=dataset,
        cut=cut,
        accuracy=report.accuracy,
        precision=report.macro("precision"),
        recall=report.macro("recall"),
        specificity=report.macro("specificity"),
        f1=report.macro("f1"),
        auc=report.macro_auc,
        final_loss=final_loss,
        n_parameters=report.n_parameters,
    )


def compare_runs(cut_row: AblationRow, uncut_row: AblationRow) -> AblationReport:
    """Side-by-side rows (cut first) and |cut - uncut| per metric."""
    deltas: Dict[str, float] = {
        metric: abs(getattr(cut_row, metric) - getattr(uncut_row, metric)) for metric in ABLATION_METRICS
    }
    return AblationReport(rows=[cut_row, uncut_row], deltas=deltas, max_delta=max(deltas.values()))
