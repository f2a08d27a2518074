"""Diagonal-Gaussian and Bernoulli primitives with analytic gradients.

All Gaussian families here are diagonal: parameters are per-row mean and
log-variance matrices of equal shape (n, d). Log-variances are clamped to
[LOG_VAR_MIN, LOG_VAR_MAX] at construction so the exponentials stay
tame; the clamp mask needed for backprop is produced by gaussian_head.
Reductions are per row: kl_* and *_log_* return (n, 1) columns.

Each forward op has a *_grads companion returning the exact partial
derivatives its callers chain into the network backward passes; every one
of them is audited against central finite differences in the test suite.
"""

from dataclasses import dataclass

import numpy as np

from .numcore import ShapeError, as_matrix, check_finite, clamp

LOG_VAR_MIN = -10.0
LOG_VAR_MAX = 10.0
PI_EPS = 1e-7
LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GaussianParams:
    """Per-row diagonal Gaussian: mu and log_var, both (n, d)."""

    mu: np.ndarray
    log_var: np.ndarray

    def __post_init__(self):
        mu = as_matrix(self.mu, "mu")
        lv = as_matrix(self.log_var, "log_var")
        if mu.shape != lv.shape:
            raise ShapeError(
                "mu shape %r != log_var shape %r" % (mu.shape, lv.shape)
            )
        check_finite(mu, "mu")
        check_finite(lv, "log_var")
        if np.any(lv < LOG_VAR_MIN) or np.any(lv > LOG_VAR_MAX):
            raise ShapeError(
                "log_var outside clamp range [%g, %g]" % (LOG_VAR_MIN, LOG_VAR_MAX)
            )
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "log_var", lv)

    @property
    def sigma(self):
        return np.exp(0.5 * self.log_var)

    @property
    def var(self):
        return np.exp(self.log_var)


@dataclass(frozen=True)
class BernoulliParams:
    """Per-row success probability, (n, 1), already clamped inside (0, 1)."""

    pi: np.ndarray

    def __post_init__(self):
        pi = as_matrix(self.pi, "pi")
        check_finite(pi, "pi")
        if np.any(pi <= 0.0) or np.any(pi >= 1.0):
            raise ShapeError("pi must lie strictly inside (0, 1)")
        object.__setattr__(self, "pi", pi)


@dataclass(frozen=True)
class GaussianSample:
    """A reparameterized draw z = mu + sigma * eps, keeping eps for backprop."""

    z: np.ndarray
    eps: np.ndarray


def gaussian_head(mu_raw, log_var_raw):
    """Build GaussianParams from raw head outputs.

    Clamps the log-variance to [LOG_VAR_MIN, LOG_VAR_MAX] and returns the
    clamp's pass-through mask, which callers multiply into the log-var
    gradient on the way back to the head.
    """
    lv, mask = clamp(as_matrix(log_var_raw, "log_var"), LOG_VAR_MIN, LOG_VAR_MAX)
    return GaussianParams(mu=as_matrix(mu_raw, "mu"), log_var=lv), mask


def clamp_pi(pi_raw):
    """Clamp probabilities to [PI_EPS, 1 - PI_EPS]; returns (pi, mask)."""
    return clamp(as_matrix(pi_raw, "pi"), PI_EPS, 1.0 - PI_EPS)


def sample_gaussian(params, rng=None, eps=None):
    """Location-scale draw z = mu + sigma * eps with eps ~ N(0, I).

    Pass `eps` to pin the noise (tests, finite differencing); otherwise it
    is drawn from `rng`. Gradients flow to mu and log_var through the
    stored eps: dz/dmu = 1, dz/dlog_var = 0.5 * sigma * eps.
    """
    if eps is None:
        if rng is None:
            raise ShapeError("sample_gaussian needs an rng when eps is not given")
        eps = rng.standard_normal(params.mu.shape)
    else:
        eps = as_matrix(eps, "eps")
        if eps.shape != params.mu.shape:
            raise ShapeError(
                "eps shape %r != mu shape %r" % (eps.shape, params.mu.shape)
            )
    z = params.mu + params.sigma * eps
    return GaussianSample(z=z, eps=eps)


def sample_grads(params, sample, dz):
    """Chain dLoss/dz through z = mu + sigma*eps: returns (dmu, dlog_var)."""
    dmu = dz
    dlog_var = dz * sample.eps * 0.5 * params.sigma
    return dmu, dlog_var


def kl_to_standard_normal(params):
    """KL[N(mu, var) || N(0, I)] per row, shape (n, 1).

    Closed form per dimension: -0.5 * (1 + log_var - mu^2 - var).
    """
    term = 1.0 + params.log_var - params.mu**2 - params.var
    return -0.5 * term.sum(axis=1, keepdims=True)


def kl_std_normal_grads(params):
    """Partials of kl_to_standard_normal w.r.t. (mu, log_var), per element."""
    dmu = params.mu
    dlog_var = 0.5 * (params.var - 1.0)
    return dmu, dlog_var


def kl_gaussians(q, p):
    """KL[q || p] between diagonal Gaussians, per row, shape (n, 1).

    Per dimension: 0.5*(lv_p - lv_q) + (var_q + (mu_q-mu_p)^2)/(2 var_p) - 0.5.
    Always nonnegative; zero iff q == p.
    """
    if q.mu.shape != p.mu.shape:
        raise ShapeError(
            "q shape %r != p shape %r" % (q.mu.shape, p.mu.shape)
        )
    dmu = q.mu - p.mu
    term = 0.5 * (p.log_var - q.log_var) + (q.var + dmu**2) / (2.0 * p.var) - 0.5
    return term.sum(axis=1, keepdims=True)


def kl_gaussians_grads(q, p):
    """Partials of kl_gaussians w.r.t. (mu_q, lv_q, mu_p, lv_p), per element."""
    diff = q.mu - p.mu
    inv_vp = 1.0 / p.var
    dmu_q = diff * inv_vp
    dmu_p = -dmu_q
    dlv_q = 0.5 * (q.var * inv_vp - 1.0)
    dlv_p = 0.5 - (q.var + diff**2) * (0.5 * inv_vp)
    return dmu_q, dlv_q, dmu_p, dlv_p


def gaussian_log_pdf(x, params):
    """log N(x | mu, var) per row, shape (n, 1); diagonal covariance."""
    x = as_matrix(x, "x")
    if x.shape != params.mu.shape:
        raise ShapeError(
            "x shape %r != mu shape %r" % (x.shape, params.mu.shape)
        )
    diff = x - params.mu
    term = -0.5 * (LOG_2PI + params.log_var + diff**2 / params.var)
    return term.sum(axis=1, keepdims=True)


def gaussian_log_pdf_grads(x, params):
    """Partials of gaussian_log_pdf w.r.t. (x, mu, log_var), per element."""
    diff = x - params.mu
    inv_v = 1.0 / params.var
    dmu = diff * inv_v
    dx = -dmu
    dlog_var = -0.5 + 0.5 * diff**2 * inv_v
    return dx, dmu, dlog_var


def bernoulli_log_pmf(y, params):
    """y*log(pi) + (1-y)*log(1-pi) per row, shape (n, 1); y in {0, 1}."""
    y = as_matrix(y, "y")
    if y.shape != params.pi.shape:
        raise ShapeError(
            "y shape %r != pi shape %r" % (y.shape, params.pi.shape)
        )
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ShapeError("labels must be exactly 0 or 1")
    return y * np.log(params.pi) + (1.0 - y) * np.log1p(-params.pi)
