"""Conditional multimodal discriminative (CMMD) model.

Five dense networks over a shared latent space z of dimension d:

  * encoder   q(z|xo, xm, y)   phi-side, trains the representation
  * auxiliary q(z|xo)          phi-side, regularizes toward xo-only inference
  * prior     p(z|xo)          theta-side, the test-time representation
  * decoder   p(xm|xo, z)      theta-side, reconstructs the text modality
  * classifier p(y|z)          theta-side, bankruptcy probability

Training maximizes the omega-weighted objective

  J = E_q[log p(xm|xo,z) + log p(y|z)]
      - omega     * KL[q(z|xo,xm,y) || p(z|xo)]
      - (1-omega) * KL[q(z|xo)      || p(z|xo)]

estimated with one reparameterized sample per term and averaged over the
batch; omega=1 recovers the plain evidence lower bound. The decoder
consumes the posterior sample during training, but the classifier always
consumes a PRIOR sample, so nothing the classifier sees at training time
depends on xm. At test time xm is not needed at all: predict() scores
rows from xo alone and does not even accept an xm argument.

All gradients are accumulated by hand-written backward rules (numcore,
dists) and are finite-difference audited in the test suite.
"""

import json
import struct
import zlib
from dataclasses import dataclass, field, replace

import numpy as np

from . import dists, numcore
from . import rng as _rng
from .numcore import (
    HeadSpec,
    MlpSpec,
    NonFiniteError,
    ParamStore,
    ShapeError,
    UsageError,
    as_matrix,
)

BUNDLE_MAGIC = b"CMMD1\n"


class BundleError(RuntimeError):
    """A model bundle failed validation (magic, manifest, or checksum)."""


@dataclass(frozen=True)
class CmmdConfig:
    xo_dim: int
    xm_dim: int
    latent_dim: int = 50
    encoder_layers: tuple = (100, 100, 100)
    prior_layers: tuple = (100, 100, 100)
    decoder_layers: tuple = (100, 100, 100)
    classifier_layers: tuple = (150, 150)
    hidden_activation: str = "relu"
    dropout: float = 0.1
    omega: float = 0.75
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 100
    batch_size: int = 64
    predict_samples: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.xo_dim < 1 or self.xm_dim < 1:
            raise UsageError("xo_dim and xm_dim must be positive")
        if self.latent_dim < 1:
            raise UsageError("latent_dim must be >= 1")
        if not (0.0 <= self.omega <= 1.0):
            raise UsageError("omega must lie in [0, 1], got %r" % (self.omega,))
        if not (0.0 <= self.dropout < 1.0):
            raise UsageError("dropout must lie in [0, 1)")
        if self.epochs < 1 or self.batch_size < 1:
            raise UsageError("epochs and batch_size must be positive")
        if self.predict_samples < 1:
            raise UsageError("predict_samples must be >= 1")
        if self.hidden_activation not in numcore.ACTIVATIONS:
            raise UsageError(
                "unknown hidden_activation %r; choose one of %s"
                % (self.hidden_activation, ", ".join(numcore.ACTIVATIONS))
            )
        for name in ("encoder_layers", "prior_layers", "decoder_layers", "classifier_layers"):
            object.__setattr__(self, name, tuple(int(v) for v in getattr(self, name)))

    def to_dict(self):
        d = {
            "xo_dim": self.xo_dim,
            "xm_dim": self.xm_dim,
            "latent_dim": self.latent_dim,
            "encoder_layers": list(self.encoder_layers),
            "prior_layers": list(self.prior_layers),
            "decoder_layers": list(self.decoder_layers),
            "classifier_layers": list(self.classifier_layers),
            "hidden_activation": self.hidden_activation,
            "dropout": self.dropout,
            "omega": self.omega,
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "epochs": self.epochs,
            "batch_size": self.batch_size,
            "predict_samples": self.predict_samples,
            "seed": self.seed,
        }
        return d

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise UsageError("unknown config keys: %s" % ", ".join(sorted(unknown)))
        return cls(**d)


@dataclass
class LossBreakdown:
    """Per-batch means of the objective's four components and their total.

    total = -recon_xm - class_ll + omega*kl_post_prior + (1-omega)*kl_aux_prior
    (minimizing total maximizes the objective).
    """

    recon_xm: float
    class_ll: float
    kl_post_prior: float
    kl_aux_prior: float
    total: float

    FIELDS = ("recon_xm", "class_ll", "kl_post_prior", "kl_aux_prior", "total")

    def as_tuple(self):
        return (self.recon_xm, self.class_ll, self.kl_post_prior, self.kl_aux_prior, self.total)


def elbo_estimate(breakdown):
    """Single-sample lower-bound estimate implied by a LossBreakdown.

    At omega=1 the training total equals exactly the negation of this.
    """
    return breakdown.recon_xm + breakdown.class_ll - breakdown.kl_post_prior


@dataclass
class TrainHistory:
    epochs: list = field(default_factory=list)
    batches: list = field(default_factory=list)


# network names; the phi/theta prefixes partition the parameter store
ENC, AUX, PRIOR, DEC, CLS = "phi/enc", "phi/aux", "theta/prior", "theta/dec", "theta/cls"


def _build_specs(cfg):
    act = cfg.hidden_activation
    d = cfg.latent_dim
    return {
        ENC: MlpSpec(
            name=ENC,
            layer_sizes=(cfg.xo_dim + cfg.xm_dim + 1,) + cfg.encoder_layers,
            heads=(HeadSpec("mu", d), HeadSpec("log_var", d)),
            hidden_activation=act,
            dropout_rate=cfg.dropout,
        ),
        AUX: MlpSpec(
            name=AUX,
            layer_sizes=(cfg.xo_dim,) + cfg.prior_layers,
            heads=(HeadSpec("mu", d), HeadSpec("log_var", d)),
            hidden_activation=act,
            dropout_rate=cfg.dropout,
        ),
        PRIOR: MlpSpec(
            name=PRIOR,
            layer_sizes=(cfg.xo_dim,) + cfg.prior_layers,
            heads=(HeadSpec("mu", d), HeadSpec("log_var", d)),
            hidden_activation=act,
            dropout_rate=cfg.dropout,
        ),
        DEC: MlpSpec(
            name=DEC,
            layer_sizes=(cfg.xo_dim + d,) + cfg.decoder_layers,
            heads=(HeadSpec("mu", cfg.xm_dim), HeadSpec("log_var", cfg.xm_dim)),
            hidden_activation=act,
            dropout_rate=cfg.dropout,
        ),
        CLS: MlpSpec(
            name=CLS,
            layer_sizes=(d,) + cfg.classifier_layers,
            heads=(HeadSpec("logit", 1),),
            hidden_activation=act,
            dropout_rate=cfg.dropout,
        ),
    }


class CmmdModel:
    """Config + parameter store + the five network specs."""

    def __init__(self, config, params):
        self.config = config
        self.params = params
        self.specs = _build_specs(config)

    @classmethod
    def new(cls, config):
        """Fresh model: Glorot weights, zero biases, one stream per tensor."""
        store = ParamStore()
        for spec in _build_specs(config).values():
            numcore.init_mlp(spec, store, config.seed)
        return cls(config, store)


def _check_batch(model, xo, xm=None, y=None):
    cfg = model.config
    xo = as_matrix(xo, "xo")
    if xo.shape[1] != cfg.xo_dim:
        raise ShapeError("xo has %d columns, config says %d" % (xo.shape[1], cfg.xo_dim))
    out = [xo]
    if xm is not None:
        xm = as_matrix(xm, "xm")
        if xm.shape != (xo.shape[0], cfg.xm_dim):
            raise ShapeError(
                "xm shape %r, expected %r" % (xm.shape, (xo.shape[0], cfg.xm_dim))
            )
        out.append(xm)
    if y is not None:
        y = as_matrix(y, "y")
        if y.shape != (xo.shape[0], 1):
            raise ShapeError("y shape %r, expected %r" % (y.shape, (xo.shape[0], 1)))
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ShapeError("labels must be exactly 0 or 1")
        out.append(y)
    return out if len(out) > 1 else xo


def encode_posterior(model, xo, xm, y, train_mode=False, rng=None):
    """Gaussian q(z|xo, xm, y) from the phi-side encoder."""
    xo, xm, y = _check_batch(model, xo, xm, y)
    heads, _ = numcore.mlp_forward(
        model.specs[ENC], model.params, np.hstack([xo, xm, y]), train_mode, rng
    )
    params, _ = dists.gaussian_head(heads["mu"], heads["log_var"])
    return params


def encode_prior(model, xo, train_mode=False, rng=None):
    """Gaussian p(z|xo) from the theta-side prior network."""
    xo = _check_batch(model, xo)
    heads, _ = numcore.mlp_forward(model.specs[PRIOR], model.params, xo, train_mode, rng)
    params, _ = dists.gaussian_head(heads["mu"], heads["log_var"])
    return params


def encode_aux(model, xo, train_mode=False, rng=None):
    """Gaussian q(z|xo) from the phi-side auxiliary head."""
    xo = _check_batch(model, xo)
    heads, _ = numcore.mlp_forward(model.specs[AUX], model.params, xo, train_mode, rng)
    params, _ = dists.gaussian_head(heads["mu"], heads["log_var"])
    return params


def decode_xm(model, xo, z, train_mode=False, rng=None):
    """Gaussian p(xm|xo, z) over the text modality."""
    xo = _check_batch(model, xo)
    z = as_matrix(z, "z")
    if z.shape != (xo.shape[0], model.config.latent_dim):
        raise ShapeError(
            "z shape %r, expected %r" % (z.shape, (xo.shape[0], model.config.latent_dim))
        )
    heads, _ = numcore.mlp_forward(
        model.specs[DEC], model.params, np.hstack([xo, z]), train_mode, rng
    )
    params, _ = dists.gaussian_head(heads["mu"], heads["log_var"])
    return params


def classify(model, z):
    """Bernoulli p(y|z): pi = sigmoid(classifier logits), clamped."""
    z = as_matrix(z, "z")
    if z.shape[1] != model.config.latent_dim:
        raise ShapeError("z has %d columns, latent_dim is %d" % (z.shape[1], model.config.latent_dim))
    heads, _ = numcore.mlp_forward(model.specs[CLS], model.params, z)
    pi, _ = dists.clamp_pi(numcore.sigmoid(heads["logit"]))
    return dists.BernoulliParams(pi=pi)


class _LossCtx:
    __slots__ = (
        "n",
        "xo",
        "xm",
        "y",
        "tapes",
        "q",
        "p",
        "a",
        "mask_q",
        "mask_p",
        "mask_a",
        "mask_x",
        "mask_pi",
        "s_q",
        "s_p",
        "px",
        "pi",
    )


def _loss_forward(model, xo, xm, y, eps_q, eps_p, train_mode, dropout_rngs=None):
    """One objective evaluation with pinned latent noise.

    eps_q drives the posterior sample feeding the decoder; eps_p drives
    the prior sample feeding the classifier. Keeping them explicit makes
    the loss a deterministic function of (params, data, noise), which the
    finite-difference audits rely on.
    """
    cfg = model.config
    params = model.params
    specs = model.specs
    n = xo.shape[0]
    dropout_rngs = dropout_rngs or {}

    ctx = _LossCtx()
    ctx.n = n
    ctx.xo, ctx.xm, ctx.y = xo, xm, y
    ctx.tapes = {}

    heads, tape = numcore.mlp_forward(
        specs[ENC], params, np.hstack([xo, xm, y]), train_mode, dropout_rngs.get(ENC)
    )
    ctx.tapes[ENC] = tape
    ctx.q, ctx.mask_q = dists.gaussian_head(heads["mu"], heads["log_var"])

    heads, tape = numcore.mlp_forward(
        specs[PRIOR], params, xo, train_mode, dropout_rngs.get(PRIOR)
    )
    ctx.tapes[PRIOR] = tape
    ctx.p, ctx.mask_p = dists.gaussian_head(heads["mu"], heads["log_var"])

    heads, tape = numcore.mlp_forward(
        specs[AUX], params, xo, train_mode, dropout_rngs.get(AUX)
    )
    ctx.tapes[AUX] = tape
    ctx.a, ctx.mask_a = dists.gaussian_head(heads["mu"], heads["log_var"])

    ctx.s_q = dists.sample_gaussian(ctx.q, eps=eps_q)
    ctx.s_p = dists.sample_gaussian(ctx.p, eps=eps_p)

    heads, tape = numcore.mlp_forward(
        specs[DEC], params, np.hstack([xo, ctx.s_q.z]), train_mode, dropout_rngs.get(DEC)
    )
    ctx.tapes[DEC] = tape
    ctx.px, ctx.mask_x = dists.gaussian_head(heads["mu"], heads["log_var"])

    heads, tape = numcore.mlp_forward(
        specs[CLS], params, ctx.s_p.z, train_mode, dropout_rngs.get(CLS)
    )
    ctx.tapes[CLS] = tape
    ctx.pi, ctx.mask_pi = dists.clamp_pi(numcore.sigmoid(heads["logit"]))

    recon = float(np.mean(dists.gaussian_log_pdf(xm, ctx.px)))
    class_ll = float(np.mean(dists.bernoulli_log_pmf(y, dists.BernoulliParams(ctx.pi))))
    klp = float(np.mean(dists.kl_gaussians(ctx.q, ctx.p)))
    kla = float(np.mean(dists.kl_gaussians(ctx.a, ctx.p)))
    w = cfg.omega
    total = -recon - class_ll + w * klp + (1.0 - w) * kla

    parts = {
        "recon_xm": recon,
        "class_ll": class_ll,
        "kl_post_prior": klp,
        "kl_aux_prior": kla,
        "total": total,
    }
    for name, value in parts.items():
        if not np.isfinite(value):
            raise NonFiniteError("loss component %s is not finite" % name)
    return LossBreakdown(**parts), ctx


def _loss_backward(model, ctx):
    """Accumulate d total / d params for one _loss_forward context."""
    cfg = model.config
    params = model.params
    n = ctx.n
    w = cfg.omega
    neg = -1.0 / n

    # reconstruction term through the decoder
    _, dmu_x, dlv_x = dists.gaussian_log_pdf_grads(ctx.xm, ctx.px)
    d_dec_in = numcore.mlp_backward(
        ctx.tapes[DEC],
        {"mu": neg * dmu_x, "log_var": neg * dlv_x * ctx.mask_x},
        params,
    )
    dz_q = d_dec_in[:, cfg.xo_dim :]

    # classification term through the classifier
    dlogit = neg * (ctx.y - ctx.pi) * ctx.mask_pi
    dz_p = numcore.mlp_backward(ctx.tapes[CLS], {"logit": dlogit}, params)

    # the two KL penalties
    sq = w / n
    sa = (1.0 - w) / n
    dmu_q1, dlv_q1, dmu_p1, dlv_p1 = dists.kl_gaussians_grads(ctx.q, ctx.p)
    dmu_a2, dlv_a2, dmu_p2, dlv_p2 = dists.kl_gaussians_grads(ctx.a, ctx.p)

    # reparameterized samples route the decoder/classifier pulls back
    # into the heads that produced them
    dmu_q_s, dlv_q_s = dists.sample_grads(ctx.q, ctx.s_q, dz_q)
    dmu_p_s, dlv_p_s = dists.sample_grads(ctx.p, ctx.s_p, dz_p)

    numcore.mlp_backward(
        ctx.tapes[ENC],
        {
            "mu": sq * dmu_q1 + dmu_q_s,
            "log_var": (sq * dlv_q1 + dlv_q_s) * ctx.mask_q,
        },
        params,
    )
    numcore.mlp_backward(
        ctx.tapes[PRIOR],
        {
            "mu": sq * dmu_p1 + sa * dmu_p2 + dmu_p_s,
            "log_var": (sq * dlv_p1 + sa * dlv_p2 + dlv_p_s) * ctx.mask_p,
        },
        params,
    )
    numcore.mlp_backward(
        ctx.tapes[AUX],
        {"mu": sa * dmu_a2, "log_var": sa * dlv_a2 * ctx.mask_a},
        params,
    )


def loss(model, xo, xm, y, rng, train_mode=False):
    """Objective breakdown on one batch; latent noise drawn from `rng`."""
    xo, xm, y = _check_batch(model, xo, xm, y)
    d = model.config.latent_dim
    eps_q = rng.standard_normal((xo.shape[0], d))
    eps_p = rng.standard_normal((xo.shape[0], d))
    dropout_rngs = None
    if train_mode and model.config.dropout > 0.0:
        dropout_rngs = {name: rng for name in model.specs}
    breakdown, _ = _loss_forward(model, xo, xm, y, eps_q, eps_p, train_mode, dropout_rngs)
    return breakdown


def train(model, xo, xm, y, record_batches=False):
    """Minibatch Adam over shuffled data for config.epochs epochs.

    Every stochastic site draws from its own (seed, label) stream, so two
    runs with the same config and data produce bit-identical parameters.
    Returns a TrainHistory with per-epoch mean breakdowns (and per-batch
    breakdowns when record_batches is set).
    """
    cfg = model.config
    xo, xm, y = _check_batch(model, xo, xm, y)
    n = xo.shape[0]
    if n == 0:
        raise UsageError("training set is empty")
    d = cfg.latent_dim
    history = TrainHistory()
    for epoch in range(cfg.epochs):
        order = _rng.stream(cfg.seed, "train/shuffle/%d" % epoch).permutation(n)
        records = []
        for bi, start in enumerate(range(0, n, cfg.batch_size)):
            idx = order[start : start + cfg.batch_size]
            m = idx.size
            eps_q = _rng.stream(cfg.seed, "train/eps_q/%d/%d" % (epoch, bi)).standard_normal((m, d))
            eps_p = _rng.stream(cfg.seed, "train/eps_p/%d/%d" % (epoch, bi)).standard_normal((m, d))
            dropout_rngs = None
            if cfg.dropout > 0.0:
                dropout_rngs = {
                    name: _rng.stream(cfg.seed, "train/dropout/%s/%d/%d" % (name, epoch, bi))
                    for name in model.specs
                }
            breakdown, ctx = _loss_forward(
                model, xo[idx], xm[idx], y[idx], eps_q, eps_p, True, dropout_rngs
            )
            _loss_backward(model, ctx)
            numcore.adam_step(model.params, cfg.lr, cfg.beta1, cfg.beta2, cfg.eps)
            records.append(breakdown)
        if record_batches:
            history.batches.extend(records)
        means = [
            float(np.mean([getattr(r, f) for r in records])) for f in LossBreakdown.FIELDS
        ]
        history.epochs.append(LossBreakdown(*means))
    return history


def predict(model, xo, n_samples=None, rng=None):
    """Bankruptcy scores from xo alone: mean pi over prior draws.

    Deliberately takes no xm argument; the whole point of the model is
    scoring rows whose text modality is missing.
    """
    cfg = model.config
    xo = _check_batch(model, xo)
    if n_samples is None:
        n_samples = cfg.predict_samples
    if n_samples < 1:
        raise UsageError("n_samples must be >= 1")
    if rng is None:
        rng = _rng.stream(cfg.seed, "predict")
    prior = encode_prior(model, xo)
    acc = np.zeros((xo.shape[0], 1))
    for _ in range(n_samples):
        z = dists.sample_gaussian(prior, rng=rng).z
        acc += classify(model, z).pi
    return (acc / n_samples).ravel()


def generate_xm(model, xo, rng=None):
    """Impute the missing modality: decoder mean at z ~ p(z|xo)."""
    cfg = model.config
    xo = _check_batch(model, xo)
    if rng is None:
        rng = _rng.stream(cfg.seed, "generate")
    prior = encode_prior(model, xo)
    z = dists.sample_gaussian(prior, rng=rng).z
    return decode_xm(model, xo, z).mu


def save(model, path):
    """Write the model bundle; see load() for the layout."""
    manifest = []
    chunks = []
    offset = 0
    for name, p in model.params.items():
        raw = np.ascontiguousarray(p.value, dtype="<f8").tobytes()
        manifest.append(
            {"name": name, "rows": int(p.value.shape[0]), "cols": int(p.value.shape[1]), "offset": offset}
        )
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    meta = json.dumps(
        {"config": model.config.to_dict(), "manifest": manifest},
        sort_keys=True,
        separators=(",", ":"),
    ).encode("utf-8")
    with open(path, "wb") as f:
        f.write(BUNDLE_MAGIC)
        f.write(struct.pack("<Q", len(meta)))
        f.write(meta)
        f.write(payload)
        f.write(struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF))


def load(path):
    """Read a model bundle written by save().

    Layout: magic "CMMD1\\n"; uint64 LE metadata length; JSON metadata
    (config + tensor manifest with byte offsets); packed little-endian
    float64 payload in manifest order; CRC-32 of the payload.
    """
    with open(path, "rb") as f:
        blob = f.read()
    if not blob.startswith(BUNDLE_MAGIC):
        raise BundleError("bad magic string; not a model bundle")
    pos = len(BUNDLE_MAGIC)
    if len(blob) < pos + 8:
        raise BundleError("truncated bundle header")
    (meta_len,) = struct.unpack_from("<Q", blob, pos)
    pos += 8
    if len(blob) < pos + meta_len + 4:
        raise BundleError("truncated bundle metadata")
    try:
        meta = json.loads(blob[pos : pos + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BundleError("unreadable bundle metadata: %s" % exc) from None
    pos += meta_len
    try:
        config = CmmdConfig.from_dict(meta["config"])
        manifest = meta["manifest"]
    except (KeyError, TypeError, UsageError) as exc:
        raise BundleError("invalid bundle metadata: %s" % exc) from None

    payload_len = sum(int(m["rows"]) * int(m["cols"]) * 8 for m in manifest)
    if len(blob) != pos + payload_len + 4:
        raise BundleError("bundle payload length mismatch")
    payload = blob[pos : pos + payload_len]
    (crc_stored,) = struct.unpack_from("<I", blob, pos + payload_len)
    if zlib.crc32(payload) & 0xFFFFFFFF != crc_stored:
        raise BundleError("bundle checksum mismatch")

    expected = []
    for spec in _build_specs(config).values():
        expected.extend(spec.param_shapes())
    if len(expected) != len(manifest):
        raise BundleError("manifest does not match config")
    store = ParamStore()
    for (name, shape), m in zip(expected, manifest):
        if m["name"] != name or (int(m["rows"]), int(m["cols"])) != shape:
            raise BundleError("manifest entry %r does not match config" % m.get("name"))
        start = int(m["offset"])
        count = shape[0] * shape[1]
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=start)
        store.add(name, arr.reshape(shape).astype(np.float64))
    return CmmdModel(config, store)
