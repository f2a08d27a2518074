"""Classifier evaluation metrics: AUC, H-measure, and KS.

All three consume aligned score/label vectors, treat larger scores as more
positive, and land in [0, 1].  They depend only on the rank structure of
the scores, so any strictly increasing transform of the scores leaves them
unchanged.

The H-measure is the expected minimum misclassification loss under a
Beta-distributed cost ratio, normalized against the best score-free
classifier.  For a cost c in (0, 1), classifying a positive as negative
costs (1 - c) and the reverse costs c; thresholding at t gives expected
loss

    L(c, t) = c * p0 * FPR(t) + (1 - c) * p1 * (1 - TPR(t))

with class priors p0, p1.  Minimizing over t for every c and averaging
over c ~ Beta(a, b) has a closed form on the ROC convex hull: the optimal
operating point only ever moves along hull vertices, switching at costs
determined by the hull slopes, and each piece integrates to incomplete
beta functions.
"""

import numpy as np
from scipy.special import betainc
from scipy.stats import rankdata


class MetricError(ValueError):
    """The metric is undefined for this input (e.g. one class only)."""


def _validate(scores, labels):
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if scores.shape != labels.shape:
        raise MetricError("scores and labels must align, got %d vs %d"
                          % (scores.size, labels.size))
    if scores.size == 0:
        raise MetricError("empty score vector")
    if not np.all(np.isfinite(scores)):
        raise MetricError("scores must be finite")
    if np.any(scores < 0) or np.any(scores > 1):
        raise MetricError("scores must lie in [0, 1]")
    if not np.all((labels == 0) | (labels == 1)):
        raise MetricError("labels must be 0 or 1")
    if not (np.any(labels == 1) and np.any(labels == 0)):
        raise MetricError("metric undefined with a single class")
    return scores, labels


def auc(scores, labels):
    """Mann-Whitney AUC: (concordant + half the ties) / (n1 * n0).

    Computed from average ranks; ties contribute half a pair, so the
    result matches the exhaustive pairwise count exactly.
    """
    scores, labels = _validate(scores, labels)
    pos = labels == 1
    n1 = int(pos.sum())
    n0 = scores.size - n1
    ranks = rankdata(scores, method="average")
    u = ranks[pos].sum() - n1 * (n1 + 1) / 2.0
    return u / (n1 * n0)


def roc_points(scores, labels):
    """ROC vertices (fpr, tpr) from (0,0) to (1,1), thresholds descending."""
    scores, labels = _validate(scores, labels)
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    y = labels[order]
    n1 = y.sum()
    n0 = y.size - n1
    boundary = np.flatnonzero(np.diff(s) != 0)
    cuts = np.concatenate([boundary, [y.size - 1]])
    tp = np.cumsum(y)[cuts]
    fp = (cuts + 1) - tp
    fpr = np.concatenate([[0.0], fp / n0])
    tpr = np.concatenate([[0.0], tp / n1])
    return np.column_stack([fpr, tpr])


def _upper_hull(points):
    # concave majorant: slopes non-increasing left to right
    hull = []
    for p in points:
        while len(hull) >= 2:
            x0, y0 = hull[-2]
            x1, y1 = hull[-1]
            if (x1 - x0) * (p[1] - y1) - (y1 - y0) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append((p[0], p[1]))
    return np.asarray(hull)


def _beta_piece(a, b, lo, hi):
    # integrals of c and (1 - c) against the Beta(a, b) density on [lo, hi]
    ic = a / (a + b) * (betainc(a + 1, b, hi) - betainc(a + 1, b, lo))
    icomp = b / (a + b) * (betainc(a, b + 1, hi) - betainc(a, b + 1, lo))
    return ic, icomp


def h_measure(scores, labels, a=2.0, b=2.0):
    """Hand's H: 1 minus normalized expected minimum misclassification loss.

    The cost ratio c is drawn from Beta(a, b); the default is the
    symmetric, dataset-independent Beta(2, 2).  Perfect separation gives
    1, score-free performance gives 0.
    """
    if a <= 0 or b <= 0:
        raise MetricError("severity parameters must be positive")
    scores, labels = _validate(scores, labels)
    n = scores.size
    p1 = labels.sum() / n
    p0 = 1.0 - p1

    hull = _upper_hull(roc_points(scores, labels))
    # switch costs between consecutive hull vertices; vertex i is optimal
    # for costs between the switch below and the switch above it.  The
    # switch for a segment with slope s is s*p1/(p0 + s*p1), written here
    # from the deltas so vertical segments land on 1 without overflow.
    dx = np.diff(hull[:, 0])
    dy = np.diff(hull[:, 1])
    switch = dy * p1 / (dx * p0 + dy * p1)

    # cost interval for vertex i runs from switch[i] up to switch[i-1]
    bounds = np.concatenate([[0.0], switch[::-1], [1.0]])
    loss = 0.0
    m = hull.shape[0]
    for i in range(m):
        lo = bounds[m - 1 - i]
        hi = bounds[m - i]
        if hi <= lo:
            continue
        ic, icomp = _beta_piece(a, b, lo, hi)
        loss += p0 * hull[i, 0] * ic + p1 * (1.0 - hull[i, 1]) * icomp
    ic, icomp = _beta_piece(a, b, 0.0, p1)
    ic2, icomp2 = _beta_piece(a, b, p1, 1.0)
    loss_ref = p0 * ic + p1 * icomp2
    if loss_ref <= 0:
        raise MetricError("degenerate priors give a zero reference loss")
    h = 1.0 - loss / loss_ref
    return float(min(1.0, max(0.0, h)))


def ks(scores, labels):
    """Largest gap between the class-conditional score CDFs.

    Evaluated at the sorted distinct score values, which is where the
    supremum of |F1 - F0| is attained for step CDFs.
    """
    scores, labels = _validate(scores, labels)
    pos = labels == 1
    n1 = int(pos.sum())
    n0 = scores.size - n1
    order = np.argsort(scores, kind="stable")
    s = scores[order]
    y = labels[order]
    f1 = np.cumsum(y) / n1
    f0 = np.cumsum(1.0 - y) / n0
    last = np.concatenate([np.flatnonzero(np.diff(s) != 0), [s.size - 1]])
    return float(np.max(np.abs(f1[last] - f0[last])))


def metric_report(scores, labels, a=2.0, b=2.0):
    """All three metrics plus sample counts, ready for metrics.json."""
    s, l = _validate(scores, labels)
    return {
        "auc": float(auc(s, l)),
        "h_measure": float(h_measure(s, l, a=a, b=b)),
        "ks": float(ks(s, l)),
        "n": int(s.size),
        "n_pos": int(l.sum()),
    }
