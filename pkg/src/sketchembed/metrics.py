"""Pair-counting clustering metrics and assignment accuracy."""
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import InputFormatError, ParameterError
from .graph import Partition


def _labels(x):
    return x.labels if isinstance(x, Partition) else np.asarray(x, dtype=np.int64)


def _comb2(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def contingency(pred, truth):
    """Dense ``K_pred x K_truth`` table of co-occurrence counts."""
    p, t = _labels(pred), _labels(truth)
    if p.shape != t.shape:
        raise InputFormatError(f"length mismatch: {p.shape[-1]} predicted vs {t.shape[-1]} truth labels")
    _, p = np.unique(p, return_inverse=True)
    _, t = np.unique(t, return_inverse=True)
    p, t = p.ravel(), t.ravel()
    kp = int(p.max()) + 1 if len(p) else 0
    kt = int(t.max()) + 1 if len(t) else 0
    return np.bincount(p * kt + t, minlength=kp * kt).reshape(kp, kt)


def pair_counts(pred, truth):
    """Return ``(tp, pred_pairs, truth_pairs)`` from contingency tables.

    Accepts label arrays of shape ``(..., n)`` that broadcast against each
    other; labels must be non-negative integers. Returns arrays of the
    broadcast leading shape (scalars for 1-D input).
    """
    p, t = _labels(pred), _labels(truth)
    if p.shape[-1] != t.shape[-1]:
        raise InputFormatError(f"length mismatch: {p.shape[-1]} predicted vs {t.shape[-1]} truth labels")
    if p.ndim == 1 and t.ndim == 1:
        table = contingency(p, t)
        return (int(_comb2(table).sum()), int(_comb2(table.sum(1)).sum()),
                int(_comb2(table.sum(0)).sum()))
    P, T = np.broadcast_arrays(p, t)
    lead, n = P.shape[:-1], P.shape[-1]
    P, T = P.reshape(-1, n), T.reshape(-1, n)
    if P.size and (P.min() < 0 or T.min() < 0):
        raise ParameterError("batched labels must be non-negative")
    kp, kt = int(P.max()) + 1, int(T.max()) + 1
    cells = kp * kt
    joint = P * kt + T + (np.arange(len(P)) * cells)[:, None]
    table = np.bincount(joint.ravel(), minlength=len(P) * cells).reshape(len(P), kp, kt)
    tp = _comb2(table).sum((1, 2))
    pp = _comb2(table.sum(2)).sum(1)
    tt = _comb2(table.sum(1)).sum(1)
    return tp.reshape(lead), pp.reshape(lead), tt.reshape(lead)


def pairwise_pr(pred, truth):
    """Pairwise precision and recall over unordered vertex pairs.

    precision = co-clustered in both / co-clustered in ``pred`` (1 if none),
    recall = co-clustered in both / co-clustered in ``truth`` (1 if none).
    """
    n = _labels(pred).shape[-1]
    if n < 2:
        raise ParameterError(f"need at least 2 vertices, got {n}")
    tp, pp, tt = pair_counts(pred, truth)
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(pp > 0, tp / np.maximum(pp, 1), 1.0)
        rec = np.where(tt > 0, tp / np.maximum(tt, 1), 1.0)
    if np.ndim(prec) == 0:
        return float(prec), float(rec)
    return prec, rec


def accuracy(pred, truth):
    """Best fraction of matched vertices over one-to-one label assignments."""
    table = contingency(pred, truth)
    n = int(table.sum())
    if n == 0:
        return 1.0
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum()) / n


@dataclass
class MetricsReport:
    pp: float
    pr: float
    acc: float
    trials: int = 1
    per_trial: list = field(default_factory=list)

    @classmethod
    def from_trials(cls, values):
        """``values`` is a list of ``(pp, pr, acc)`` tuples."""
        arr = np.asarray(values, dtype=np.float64).reshape(-1, 3)
        pp, pr, acc = arr.mean(0)
        return cls(float(pp), float(pr), float(acc), len(arr),
                   [dict(pp=float(a), pr=float(b), acc=float(c)) for a, b, c in arr])

    def to_dict(self):
        return asdict(self)


def evaluate(pred, truth):
    pp, pr = pairwise_pr(pred, truth)
    acc = accuracy(pred, truth)
    return MetricsReport(pp, pr, acc, 1, [dict(pp=pp, pr=pr, acc=acc)])
