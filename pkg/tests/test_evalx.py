"""Tests for the ranking metrics.

AUC is checked against a counted-pairs oracle, KS against a brute-force
threshold scan, and the H-measure against direct numeric integration of
the minimum-cost envelope under the Beta(2, 2) cost density.
"""

import math

import numpy as np
import pytest

from bankmodal import evalx
from bankmodal.evalx import MetricError, auc, h_measure, ks, metric_report
from bankmodal.rng import stream


def pairs_auc(scores, labels):
    # count wins plus half-ties over every positive/negative pair
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    pos = scores[labels == 1]
    neg = scores[labels == 0]
    total = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                total += 1.0
            elif sp == sn:
                total += 0.5
    return total / (pos.size * neg.size)


def random_case(seed, n=200, ties=False):
    gen = stream(seed, "evalx/case")
    scores = gen.random(n)
    if ties:
        scores = np.round(scores, 1)
    labels = (gen.random(n) < 0.3).astype(float)
    if labels.sum() == 0:
        labels[0] = 1.0
    if labels.sum() == n:
        labels[0] = 0.0
    return scores, labels


class TestAuc:
    def test_hand_case(self):
        got = auc([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
        assert math.isclose(got, 0.75, rel_tol=0, abs_tol=1e-12)

    def test_perfect_and_reversed(self):
        assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0
        assert auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0

    def test_constant_scores_give_half(self):
        assert math.isclose(auc([0.5] * 6, [0, 1, 0, 1, 0, 1]), 0.5,
                            rel_tol=0, abs_tol=1e-12)

    @pytest.mark.parametrize("seed,ties", [(1, False), (2, True), (3, True)])
    def test_matches_counted_pairs(self, seed, ties):
        scores, labels = random_case(seed, ties=ties)
        assert math.isclose(auc(scores, labels), pairs_auc(scores, labels),
                            rel_tol=0, abs_tol=1e-12)

    def test_score_flip_complements(self):
        scores, labels = random_case(4, ties=True)
        assert math.isclose(auc(1.0 - scores, labels), 1.0 - auc(scores, labels),
                            rel_tol=0, abs_tol=1e-12)


class TestKs:
    def test_perfect_separation(self):
        assert ks([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_identical_distributions(self):
        assert ks([0.3, 0.3, 0.3, 0.3], [0, 1, 0, 1]) == 0.0

    def test_hand_case(self):
        got = ks([0.1, 0.2, 0.6, 0.8], [0, 1, 0, 1])
        assert math.isclose(got, 0.5, rel_tol=0, abs_tol=1e-12)

    @pytest.mark.parametrize("seed", [5, 6])
    def test_matches_threshold_scan(self, seed):
        scores, labels = random_case(seed, ties=(seed == 6))
        pos = scores[labels == 1]
        neg = scores[labels == 0]
        want = 0.0
        for t in np.unique(scores):
            gap = abs(np.mean(pos <= t) - np.mean(neg <= t))
            want = max(want, gap)
        assert math.isclose(ks(scores, labels), want, rel_tol=0, abs_tol=1e-12)


class TestHMeasure:
    def test_perfect_is_one(self):
        assert h_measure([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_uninformative_is_zero(self):
        assert h_measure([0.4] * 8, [0, 1, 0, 1, 0, 1, 0, 1]) == 0.0

    @pytest.mark.parametrize("seed,a,b", [(7, 2.0, 2.0), (8, 2.0, 2.0), (9, 3.0, 1.5)])
    def test_matches_numeric_integration(self, seed, a, b):
        scores, labels = random_case(seed, n=80, ties=True)
        n = scores.size
        p1 = labels.sum() / n
        p0 = 1.0 - p1
        # empirical ROC over every threshold, ends included
        ts = np.concatenate([[-np.inf], np.unique(scores)])
        fpr = np.array([np.mean(scores[labels == 0] > t) for t in ts])
        tpr = np.array([np.mean(scores[labels == 1] > t) for t in ts])
        c = np.linspace(0.0, 1.0, 20_001)
        from scipy.stats import beta as beta_dist
        dens = beta_dist.pdf(c, a, b)
        env = np.min(c[:, None] * p0 * fpr[None, :]
                     + (1.0 - c)[:, None] * p1 * (1.0 - tpr)[None, :], axis=1)
        ref = np.minimum(c * p0, (1.0 - c) * p1)
        want = 1.0 - np.trapezoid(env * dens, c) / np.trapezoid(ref * dens, c)
        assert math.isclose(h_measure(scores, labels, a=a, b=b), want,
                            rel_tol=0, abs_tol=1e-4)

    def test_severity_validation(self):
        with pytest.raises(MetricError):
            h_measure([0.2, 0.8], [0, 1], a=0.0)
        with pytest.raises(MetricError):
            h_measure([0.2, 0.8], [0, 1], b=-1.0)


class TestRankInvariance:
    @pytest.mark.parametrize("metric", [auc, h_measure, ks])
    def test_strictly_increasing_transforms(self, metric):
        scores, labels = random_case(10, ties=True)
        base = metric(scores, labels)
        cubed = metric(scores**3, labels)
        squashed = metric(1.0 / (1.0 + np.exp(-(4.0 * scores - 2.0))), labels)
        assert math.isclose(base, cubed, rel_tol=0, abs_tol=1e-12)
        assert math.isclose(base, squashed, rel_tol=0, abs_tol=1e-12)


class TestValidation:
    def test_error_cases(self):
        with pytest.raises(MetricError):
            auc([0.5], [0, 1])  # length mismatch
        with pytest.raises(MetricError):
            auc([], [])
        with pytest.raises(MetricError):
            auc([0.5, np.nan], [0, 1])
        with pytest.raises(MetricError):
            auc([0.5, 1.5], [0, 1])  # out of [0, 1]
        with pytest.raises(MetricError):
            auc([0.4, 0.6], [0, 0.5])  # soft label
        with pytest.raises(MetricError):
            auc([0.4, 0.6], [1, 1])  # single class

    def test_report_fields(self):
        scores, labels = random_case(11)
        rep = metric_report(scores, labels)
        assert set(rep) == {"auc", "h_measure", "ks", "n", "n_pos"}
        assert rep["n"] == 200
        assert rep["n_pos"] == int(labels.sum())
        assert rep["auc"] == auc(scores, labels)
        assert rep["ks"] == ks(scores, labels)
        assert rep["h_measure"] == h_measure(scores, labels)
