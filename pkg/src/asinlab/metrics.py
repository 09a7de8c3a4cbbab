"""Evaluation statistics for the scenario experiments."""
import csv
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from ._validation import check_binary, check_vector
from .exceptions import DegenerateDataError, DimensionError, InsufficientDataError
from .io import fmt


@dataclass(frozen=True)
class EvalSummary:
    n: int
    accuracy: float | None = None
    tp: int | None = None
    fp: int | None = None
    tn: int | None = None
    fn: int | None = None
    auc: float | None = None
    pearson_r: float | None = None

    FIELDS = ("n", "accuracy", "tp", "fp", "tn", "fn", "auc", "pearson_r")

    def row(self):
        out = []
        for name in self.FIELDS:
            v = getattr(self, name)
            out.append("" if v is None else (str(v) if isinstance(v, (int, np.integer)) else fmt(v)))
        return out


def write_summary_csv(path, summary):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EvalSummary.FIELDS)
        w.writerow(summary.row())


def read_summary_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    kw = {}
    for name, v in rows[0].items():
        if v == "":
            continue
        kw[name] = int(v) if name in ("n", "tp", "fp", "tn", "fn") else float(v)
    return EvalSummary(**kw)


def accuracy_confusion(preds, truths):
    """Confusion counts and accuracy of binary predictions."""
    p = check_binary(preds, "preds")
    t = check_binary(truths, "truths")
    if p.shape[0] != t.shape[0]:
        raise DimensionError(f"preds has {p.shape[0]} items, truths has {t.shape[0]}")
    if p.shape[0] == 0:
        raise InsufficientDataError("no predictions")
    tp = int(np.sum((p == 1) & (t == 1)))
    fp = int(np.sum((p == 1) & (t == 0)))
    tn = int(np.sum((p == 0) & (t == 0)))
    fn = int(np.sum((p == 0) & (t == 1)))
    n = p.shape[0]
    return EvalSummary(n=n, accuracy=(tp + tn) / n, tp=tp, fp=fp, tn=tn, fn=fn)


def roc_auc(scores, truths):
    """Area under the ROC curve via the Mann-Whitney rank statistic (ties count half)."""
    s = check_vector(scores, "scores")
    t = check_binary(truths, "truths")
    if s.shape[0] != t.shape[0]:
        raise DimensionError("scores and truths differ in length")
    n1 = int(t.sum())
    n0 = t.shape[0] - n1
    if n1 == 0 or n0 == 0:
        raise DegenerateDataError("ROC AUC needs both classes")
    ranks = rankdata(s)
    u = ranks[t == 1].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def roc_curve(scores, truths):
    """(P_fp, P_d) at every distinct score used as a ``>=`` threshold, ascending threshold."""
    s = check_vector(scores, "scores")
    t = check_binary(truths, "truths")
    thresholds = np.unique(s)
    pfp = np.array([np.mean(s[t == 0] >= th) for th in thresholds])
    pd = np.array([np.mean(s[t == 1] >= th) for th in thresholds])
    return thresholds, pfp, pd


def pearson_r(actual, estimated):
    a = check_vector(actual, "actual")
    e = check_vector(estimated, "estimated", length=a.shape[0])
    if a.shape[0] < 3:
        raise InsufficientDataError("pearson_r needs at least 3 pairs")
    da, de = a - a.mean(), e - e.mean()
    sa, se = np.sqrt(da @ da), np.sqrt(de @ de)
    if sa == 0 or se == 0:
        raise DegenerateDataError("pearson_r is undefined for zero-variance input")
    return float(np.clip((da @ de) / (sa * se), -1.0, 1.0))
