"""Evaluation: confusion matrix, derived metrics, misclassification records,
and CSV artifact export.

Precision/recall/F1 are macro-averaged (unweighted class mean) with the
0/0 convention mapped to 0; weighted variants are carried alongside.  The
correlation coefficient is the multiclass R_K statistic, computed with
exact integer arithmetic in the numerator so degenerate cases come out
exactly 0 or 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .dataset import DatasetBundle
from .encoder import FeatureSource, feature_matrix
from .errors import DataFormatError
from .ssgan import DiscriminatorNet, EpochLog, predict

ConfusionMatrix = np.ndarray  # K x K int64; [i][j] = true class i predicted j


def confusion(preds, truths, k: int) -> ConfusionMatrix:
    """Count predictions into a K x K matrix."""
    preds = np.asarray(preds, dtype=np.int64)
    truths = np.asarray(truths, dtype=np.int64)
    if preds.shape != truths.shape or preds.ndim != 1:
        raise DataFormatError(
            f"predictions and truths must be equal-length vectors, got {preds.shape} vs {truths.shape}"
        )
    if len(preds) and (preds.min() < 0 or preds.max() >= k or truths.min() < 0 or truths.max() >= k):
        raise DataFormatError(f"class indices must lie in [0, {k})")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (truths, preds), 1)
    return cm


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision_macro: float
    recall_macro: float
    f1_macro: float
    mcc: float
    precision_weighted: float
    recall_weighted: float
    total: int


def _safe_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num, dtype=np.float64)
    np.divide(num, den, out=out, where=den != 0)
    return out


def report(cm: ConfusionMatrix) -> MetricsReport:
    """Derive accuracy, macro/weighted P-R, macro F1, and R_K from counts."""
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    if total <= 0:
        raise DataFormatError("metrics need at least one evaluated example")

    diag = cm.diagonal().astype(np.float64)
    row = cm.sum(axis=1).astype(np.float64)  # true-class counts t_k
    col = cm.sum(axis=0).astype(np.float64)  # predicted-class counts p_k

    precision = _safe_div(diag, col)
    recall = _safe_div(diag, row)
    f1 = _safe_div(2.0 * precision * recall, precision + recall)
    weights = row / total

    # R_K with an exact integer numerator; a zero denominator defines MCC = 0.
    c = int(cm.trace())
    s = total
    t = [int(v) for v in cm.sum(axis=1)]
    p = [int(v) for v in cm.sum(axis=0)]
    num = c * s - sum(pk * tk for pk, tk in zip(p, t))
    d1 = s * s - sum(pk * pk for pk in p)
    d2 = s * s - sum(tk * tk for tk in t)
    den_sq = d1 * d2
    if den_sq == 0:
        mcc = 0.0
    else:
        root = math.isqrt(den_sq)
        den = float(root) if root * root == den_sq else math.sqrt(float(d1)) * math.sqrt(float(d2))
        mcc = num / den

    return MetricsReport(
        accuracy=float(diag.sum()) / total,
        precision_macro=float(precision.mean()),
        recall_macro=float(recall.mean()),
        f1_macro=float(f1.mean()),
        mcc=mcc,
        precision_weighted=float(precision @ weights),
        recall_weighted=float(recall @ weights),
        total=total,
    )


@dataclass(frozen=True)
class MisclassRecord:
    text: str
    true_class: str
    predicted_class: str
    prob: float
    runner_up: str
    runner_up_prob: float


def misclass_report(
    disc: DiscriminatorNet,
    bundle: DatasetBundle,
    split: str,
    source: FeatureSource,
) -> list[MisclassRecord]:
    """All misclassified items of a split, most confident mistakes first."""
    items = bundle.split_items(split)
    if not items:
        return []
    probs = np.atleast_2d(predict(disc, feature_matrix(source, items)))
    records = []
    for utt, p in zip(items, probs):
        top2 = np.argsort(p)[::-1][:2]
        if int(top2[0]) == utt.label:
            continue
        records.append(MisclassRecord(
            text=utt.text,
            true_class=bundle.vocab.names[utt.label],
            predicted_class=bundle.vocab.names[int(top2[0])],
            prob=float(p[top2[0]]),
            runner_up=bundle.vocab.names[int(top2[1])],
            runner_up_prob=float(p[top2[1]]),
        ))
    records.sort(key=lambda r: -r.prob)
    return records


def fmt9(x: float) -> str:
    """Nine significant digits, the artifact-wide float convention."""
    return format(float(x), ".9g")


CURVE_FIELDS = (
    "epoch", "l_sup", "l_unsup_real", "l_unsup_fake", "l_d",
    "l_fm", "l_fool", "l_g", "train_accuracy", "validation_accuracy",
)


def export_curves(logs: list[EpochLog], path: str) -> None:
    """Per-epoch loss/accuracy curves as CSV."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CURVE_FIELDS)
        for log in logs:
            writer.writerow([log.epoch] + [fmt9(getattr(log, f)) for f in CURVE_FIELDS[1:]])


def export_confusion_csv(cm: ConfusionMatrix, vocab, path: str) -> None:
    """K x K counts with class-name header row and column."""
    names = list(vocab.names) if hasattr(vocab, "names") else list(vocab)
    cm = np.asarray(cm)
    if cm.shape != (len(names), len(names)):
        raise DataFormatError(f"confusion shape {cm.shape} does not match {len(names)} classes")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["class"] + names)
        for name, row in zip(names, cm):
            writer.writerow([name] + [int(v) for v in row])
