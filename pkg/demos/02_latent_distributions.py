"""Diagonal-Gaussian toolkit: heads, reparameterized sampling, KL terms.

Shows the pieces the generative model is assembled from, with the sanity
identities each one obeys.
"""

import math

import numpy as np

from bankmodal import dists
from bankmodal.rng import stream


def main():
    rng = stream(0, "demo/dists")

    mu = np.array([[0.0, 1.0], [2.0, -1.0]])
    log_var = np.array([[0.0, math.log(4.0)], [math.log(0.25), 0.0]])
    q = dists.GaussianParams(mu=mu, log_var=log_var)
    print("mu:\n%s\nsigma:\n%s" % (q.mu, q.sigma))

    # reparameterization: z = mu + sigma * eps, so averaging many draws
    # recovers the mean and the spread recovers sigma
    draws = np.stack([dists.sample_gaussian(q, rng=rng).z for _ in range(4000)])
    print("\nsample mean error %.4f, sample std error %.4f"
          % (np.abs(draws.mean(axis=0) - q.mu).max(),
             np.abs(draws.std(axis=0) - q.sigma).max()))

    # KL to the standard normal, per row, with three hand-checkable cases
    std = dists.GaussianParams(mu=np.zeros((1, 1)), log_var=np.zeros((1, 1)))
    shifted = dists.GaussianParams(mu=np.ones((1, 1)), log_var=np.zeros((1, 1)))
    narrow = dists.GaussianParams(
        mu=np.zeros((1, 1)), log_var=np.full((1, 1), math.log(0.25)))
    print("\nKL(N(0,1) || N(0,1))    = %.12f  (expect 0)"
          % dists.kl_to_standard_normal(std)[0, 0])
    print("KL(N(1,1) || N(0,1))    = %.12f  (expect 0.5)"
          % dists.kl_to_standard_normal(shifted)[0, 0])
    print("KL(N(0,1/4) || N(0,1))  = %.12f  (expect ln2 - 3/8 = %.12f)"
          % (dists.kl_to_standard_normal(narrow)[0, 0], math.log(2.0) - 0.375))

    # the general two-Gaussian form agrees with the specialized one
    p_std = dists.GaussianParams(mu=np.zeros_like(mu), log_var=np.zeros_like(mu))
    gap = np.abs(dists.kl_gaussians(q, p_std)
                 - dists.kl_to_standard_normal(q)).max()
    print("\ngeneral vs specialized KL, max gap: %.2e" % gap)

    # log densities: the Gaussian integrates to one over a grid
    grid = np.linspace(-8.0, 8.0, 20001).reshape(-1, 1)
    one = dists.GaussianParams(mu=np.zeros((1, 1)), log_var=np.zeros((1, 1)))
    pdf = np.exp([dists.gaussian_log_pdf(g.reshape(1, 1), one)[0, 0] for g in grid])
    print("unit Gaussian total mass on grid: %.6f" % np.trapezoid(pdf, grid.ravel()))

    pi, clamped = dists.clamp_pi(np.array([[0.0, 0.5, 1.0]]))
    print("\nclamped Bernoulli means stay strictly inside (0,1): %s" % (pi,))
    print("mask is 1 where the value passed through unchanged: %s" % (clamped,))


if __name__ == "__main__":
    main()
