"""Ranking metrics for rare-event classifiers: AUC, H-measure, KS.

All three depend only on the ordering of the scores, so any strictly
increasing recalibration leaves them untouched. The H-measure weights
misclassification costs by a Beta density instead of the implicit
classifier-specific weighting behind AUC.
"""

import numpy as np

from bankmodal import evalx
from bankmodal.rng import stream


def main():
    labels = np.array([1, 1, 1, 0, 0, 0, 0, 0], dtype=float)
    crisp = np.array([0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2])
    muddled = np.array([0.9, 0.5, 0.45, 0.6, 0.55, 0.4, 0.3, 0.2])

    print("perfect ranking:  auc %.3f  h %.3f  ks %.3f"
          % (evalx.auc(crisp, labels), evalx.h_measure(crisp, labels),
             evalx.ks(crisp, labels)))
    print("muddled ranking:  auc %.3f  h %.3f  ks %.3f"
          % (evalx.auc(muddled, labels), evalx.h_measure(muddled, labels),
             evalx.ks(muddled, labels)))

    # invariance under strictly increasing transforms
    rng = stream(0, "demo/metrics")
    scores = rng.random(400)
    y = (rng.random(400) < 0.25).astype(float)
    for name, twist in (("cube", scores ** 3),
                        ("sigmoid", 1 / (1 + np.exp(-(6 * scores - 3))))):
        gap = abs(evalx.auc(twist, y) - evalx.auc(scores, y))
        print("auc shift under %-7s %.1e" % (name + ":", gap))

    # AUC equals the probability a random positive outranks a random negative
    pos, neg = scores[y == 1], scores[y == 0]
    wins = sum(float(np.sum(s > neg)) + 0.5 * float(np.sum(s == neg))
               for s in pos)
    print("\npairwise win rate %.10f  auc %.10f"
          % (wins / (pos.size * neg.size), evalx.auc(scores, y)))

    # severity weighting: a > b leans the cost density toward false negatives
    informative = np.clip(scores + 0.8 * y * rng.random(400), 0.0, 1.0)
    for a, b in ((2.0, 2.0), (4.0, 1.5), (1.5, 4.0)):
        print("h_measure a=%.1f b=%.1f  %.4f"
              % (a, b, evalx.h_measure(informative, y, a=a, b=b)))

    report = evalx.metric_report(informative, y)
    print("\nmetric_report: %s" % report)


if __name__ == "__main__":
    main()
