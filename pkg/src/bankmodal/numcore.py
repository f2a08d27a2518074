"""Dense-network engine: float64 MLPs with hand-written backward rules.

Everything here is plain numpy. Weights live in a ParamStore keyed by
hierarchical names, forward passes record a tape, and backward passes
replay the tape in reverse applying analytic derivative rules. Training
uses Adam with bias correction. grad_check compares the analytic
gradients against central finite differences and is the ground truth the
rest of the package is audited with.

Conventions:
  * a batch is a (n, dim) float64 matrix, one row per observation
  * weight matrices are (out, in), biases are (out, 1)
  * dropout is inverted dropout, applied to hidden activations only
"""

from dataclasses import dataclass

import numpy as np

from . import rng as _rng

ACTIVATIONS = ("identity", "relu", "tanh", "sigmoid", "softplus")


class ShapeError(ValueError):
    """A tensor does not have the shape an operation requires."""


class NonFiniteError(FloatingPointError):
    """A tensor picked up a NaN or infinity; message names the tensor."""


class UsageError(RuntimeError):
    """An API contract was violated (e.g. a tape replayed twice)."""


def as_matrix(x, name="tensor"):
    """Coerce to a 2-D float64 array, rejecting anything else."""
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError("%s must be 2-D, got shape %r" % (name, a.shape))
    return a


def check_finite(x, name):
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("non-finite values in %s" % name)
    return x


def activate(kind, z):
    """Apply an elementwise activation to pre-activations z."""
    if kind == "identity":
        return z
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    if kind == "sigmoid":
        return sigmoid(z)
    if kind == "softplus":
        # log(1 + e^z) computed stably for large |z|
        return np.logaddexp(0.0, z)
    raise UsageError("unknown activation %r" % (kind,))


def activate_grad(kind, z, fz):
    """d activation / d pre-activation, given z and fz = activate(kind, z)."""
    if kind == "identity":
        return np.ones_like(z)
    if kind == "relu":
        return (z > 0.0).astype(np.float64)
    if kind == "tanh":
        return 1.0 - fz * fz
    if kind == "sigmoid":
        return fz * (1.0 - fz)
    if kind == "softplus":
        return sigmoid(z)
    raise UsageError("unknown activation %r" % (kind,))


def sigmoid(z):
    """Numerically stable logistic function."""
    out = np.empty_like(np.asarray(z, dtype=np.float64))
    z = np.asarray(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def clamp(x, lo, hi):
    """Clip x to [lo, hi]; also return the pass-through gradient mask."""
    y = np.clip(x, lo, hi)
    mask = ((x > lo) & (x < hi)).astype(np.float64)
    return y, mask


@dataclass
class Param:
    value: np.ndarray
    grad: np.ndarray
    adam_m: np.ndarray
    adam_v: np.ndarray


class ParamStore:
    """Named, shaped, insertion-ordered parameter collection.

    Each entry owns its gradient and Adam moment buffers. Iteration order
    is insertion order everywhere (flatten, adam_step, serialization), so
    a store's layout is a pure function of the creation sequence.
    """

    def __init__(self):
        self._entries = {}
        self.step = 0

    def add(self, name, value):
        if name in self._entries:
            raise UsageError("duplicate parameter name %r" % name)
        v = as_matrix(value, name).copy()
        self._entries[name] = Param(
            value=v,
            grad=np.zeros_like(v),
            adam_m=np.zeros_like(v),
            adam_v=np.zeros_like(v),
        )
        return self._entries[name].value

    def __contains__(self, name):
        return name in self._entries

    def __getitem__(self, name):
        try:
            return self._entries[name].value
        except KeyError:
            raise KeyError("no parameter named %r" % name) from None

    def entry(self, name):
        try:
            return self._entries[name]
        except KeyError:
            raise KeyError("no parameter named %r" % name) from None

    def grad(self, name):
        return self.entry(name).grad

    def names(self):
        return list(self._entries)

    def items(self):
        return self._entries.items()

    def n_params(self):
        return sum(p.value.size for p in self._entries.values())

    def zero_grads(self):
        for p in self._entries.values():
            p.grad[...] = 0.0

    def flatten(self):
        """Concatenate all values in insertion order into one vector."""
        if not self._entries:
            return np.zeros(0)
        return np.concatenate([p.value.ravel() for p in self._entries.values()])

    def load_flat(self, vec):
        vec = np.asarray(vec, dtype=np.float64).ravel()
        if vec.size != self.n_params():
            raise ShapeError(
                "flat vector has %d entries, store holds %d"
                % (vec.size, self.n_params())
            )
        off = 0
        for p in self._entries.values():
            n = p.value.size
            p.value[...] = vec[off : off + n].reshape(p.value.shape)
            off += n


@dataclass(frozen=True)
class HeadSpec:
    """One output head: a dense layer from the trunk to `size` units."""

    name: str
    size: int
    activation: str = "identity"


@dataclass(frozen=True)
class MlpSpec:
    """Architecture of one network.

    layer_sizes[0] is the input width; the remaining entries are hidden
    widths. Heads attach to the last trunk activation (or directly to the
    input when there are no hidden layers).
    """

    name: str
    layer_sizes: tuple
    heads: tuple
    hidden_activation: str = "tanh"
    dropout_rate: float = 0.0

    def __post_init__(self):
        if len(self.layer_sizes) < 1:
            raise UsageError("layer_sizes must at least name the input width")
        if any(int(s) <= 0 for s in self.layer_sizes):
            raise UsageError("layer sizes must be positive: %r" % (self.layer_sizes,))
        if not self.heads:
            raise UsageError("an MLP needs at least one head")
        if self.hidden_activation not in ACTIVATIONS:
            raise UsageError("unknown activation %r" % (self.hidden_activation,))
        for h in self.heads:
            if h.activation not in ACTIVATIONS:
                raise UsageError("unknown activation %r" % (h.activation,))
            if h.size <= 0:
                raise UsageError("head %r must have positive size" % (h.name,))
        if not (0.0 <= self.dropout_rate < 1.0):
            raise UsageError("dropout_rate must be in [0, 1), got %r" % self.dropout_rate)

    @property
    def input_dim(self):
        return int(self.layer_sizes[0])

    def trunk_shapes(self):
        """(name, (out, in)) pairs for the hidden stack, in order."""
        out = []
        sizes = [int(s) for s in self.layer_sizes]
        for i in range(len(sizes) - 1):
            out.append(("%s/L%d/W" % (self.name, i), (sizes[i + 1], sizes[i])))
            out.append(("%s/L%d/b" % (self.name, i), (sizes[i + 1], 1)))
        return out

    def head_shapes(self):
        last = int(self.layer_sizes[-1])
        out = []
        for h in self.heads:
            out.append(("%s/%s/W" % (self.name, h.name), (int(h.size), last)))
            out.append(("%s/%s/b" % (self.name, h.name), (int(h.size), 1)))
        return out

    def param_shapes(self):
        return self.trunk_shapes() + self.head_shapes()


def glorot_uniform(shape, gen):
    """Uniform init on +-sqrt(6 / (fan_in + fan_out)); fan from (out, in)."""
    out, inn = shape
    limit = np.sqrt(6.0 / (inn + out))
    return gen.uniform(-limit, limit, size=shape)


def init_mlp(spec, store, seed):
    """Create the spec's parameters in `store`, Glorot weights, zero biases.

    Each weight matrix draws from its own labeled stream, so two networks
    initialized under the same seed never share draws.
    """
    for name, shape in spec.param_shapes():
        if name.endswith("/b"):
            store.add(name, np.zeros(shape))
        else:
            gen = _rng.stream(seed, "init/%s" % name)
            store.add(name, glorot_uniform(shape, gen))


class Tape:
    """Record of one forward pass, consumed exactly once by mlp_backward."""

    __slots__ = (
        "spec",
        "x",
        "pre",
        "act",
        "drop_mask",
        "head_pre",
        "head_out",
        "train_mode",
        "used",
    )

    def __init__(self, spec, x, train_mode):
        self.spec = spec
        self.x = x
        self.pre = []
        self.act = []
        self.drop_mask = []
        self.head_pre = {}
        self.head_out = {}
        self.train_mode = train_mode
        self.used = False


def mlp_forward(spec, store, x, train_mode=False, rng=None, fixed_masks=None):
    """Run the network; return ({head name: output}, tape).

    With train_mode on and a positive dropout rate, `rng` supplies the
    dropout draws (one mask per hidden layer, applied after the
    activation, inverted scaling). With train_mode off the pass is a pure
    function of (params, x). `fixed_masks` lets tests pin the masks.
    """
    x = as_matrix(x, "%s input" % spec.name)
    if x.shape[1] != spec.input_dim:
        raise ShapeError(
            "%s expects input width %d, got %d"
            % (spec.name, spec.input_dim, x.shape[1])
        )
    check_finite(x, "%s input" % spec.name)

    use_dropout = train_mode and spec.dropout_rate > 0.0
    if use_dropout and rng is None and fixed_masks is None:
        raise UsageError("dropout requires an rng (or fixed masks) in train mode")

    tape = Tape(spec, x, train_mode)
    a = x
    n_hidden = len(spec.layer_sizes) - 1
    keep = 1.0 - spec.dropout_rate
    for i in range(n_hidden):
        W = store["%s/L%d/W" % (spec.name, i)]
        b = store["%s/L%d/b" % (spec.name, i)]
        z = a @ W.T + b.T
        h = activate(spec.hidden_activation, z)
        if use_dropout:
            if fixed_masks is not None:
                mask = np.asarray(fixed_masks[i], dtype=np.float64)
            else:
                mask = (rng.random(h.shape) >= spec.dropout_rate).astype(np.float64)
            h = h * mask / keep
        else:
            mask = None
        tape.pre.append(z)
        tape.act.append(h)
        tape.drop_mask.append(mask)
        a = h

    outputs = {}
    for head in spec.heads:
        W = store["%s/%s/W" % (spec.name, head.name)]
        b = store["%s/%s/b" % (spec.name, head.name)]
        z = a @ W.T + b.T
        out = activate(head.activation, z)
        tape.head_pre[head.name] = z
        tape.head_out[head.name] = out
        outputs[head.name] = out
    return outputs, tape


def mlp_backward(tape, head_grads, store):
    """Backpropagate head gradients through the taped pass.

    head_grads maps head name -> dLoss/dOutput of matching shape; heads
    omitted from the dict contribute nothing. Parameter gradients are
    ACCUMULATED into the store. Returns dLoss/dInput. A tape can only be
    consumed once.
    """
    if tape.used:
        raise UsageError("tape for %s already consumed" % tape.spec.name)
    tape.used = True
    spec = tape.spec

    unknown = set(head_grads) - {h.name for h in spec.heads}
    if unknown:
        raise UsageError("gradients for unknown heads %r" % sorted(unknown))

    n_hidden = len(spec.layer_sizes) - 1
    a_last = tape.act[-1] if n_hidden else tape.x
    da = np.zeros_like(a_last)
    for head in spec.heads:
        if head.name not in head_grads:
            continue
        g = as_matrix(head_grads[head.name], "grad for head %s" % head.name)
        z = tape.head_pre[head.name]
        if g.shape != z.shape:
            raise ShapeError(
                "grad for head %s has shape %r, expected %r"
                % (head.name, g.shape, z.shape)
            )
        dz = g * activate_grad(head.activation, z, tape.head_out[head.name])
        wname = "%s/%s/W" % (spec.name, head.name)
        bname = "%s/%s/b" % (spec.name, head.name)
        store.grad(wname)[...] += dz.T @ a_last
        store.grad(bname)[...] += dz.sum(axis=0)[:, None]
        da = da + dz @ store[wname]

    keep = 1.0 - spec.dropout_rate
    for i in range(n_hidden - 1, -1, -1):
        mask = tape.drop_mask[i]
        if mask is not None:
            da = da * mask / keep
        z = tape.pre[i]
        h_raw = tape.act[i]
        # act[i] stores the post-dropout value; recompute f(z) cheaply
        # only where the grad rule needs it (tanh/sigmoid use fz).
        if mask is not None and spec.hidden_activation in ("tanh", "sigmoid"):
            fz = activate(spec.hidden_activation, z)
        else:
            fz = h_raw
        dz = da * activate_grad(spec.hidden_activation, z, fz)
        a_prev = tape.act[i - 1] if i > 0 else tape.x
        wname = "%s/L%d/W" % (spec.name, i)
        bname = "%s/L%d/b" % (spec.name, i)
        store.grad(wname)[...] += dz.T @ a_prev
        store.grad(bname)[...] += dz.sum(axis=0)[:, None]
        da = dz @ store[wname]
    return da


def adam_step(store, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One Adam update over every parameter; zeroes gradients afterwards.

    Uses bias-corrected first and second moments:
        m <- b1 m + (1-b1) g        mhat = m / (1 - b1^t)
        v <- b2 v + (1-b2) g^2      vhat = v / (1 - b2^t)
        w <- w - lr * mhat / (sqrt(vhat) + eps)
    """
    if lr < 0:
        raise UsageError("learning rate must be nonnegative")
    t = store.step + 1
    c1 = 1.0 - beta1**t
    c2 = 1.0 - beta2**t
    for name, p in store.items():
        if not np.all(np.isfinite(p.grad)):
            raise NonFiniteError("non-finite gradient in %s" % name)
        p.adam_m[...] = beta1 * p.adam_m + (1.0 - beta1) * p.grad
        p.adam_v[...] = beta2 * p.adam_v + (1.0 - beta2) * (p.grad * p.grad)
        mhat = p.adam_m / c1
        vhat = p.adam_v / c2
        p.value[...] = p.value - lr * (mhat / (np.sqrt(vhat) + eps))
        p.grad[...] = 0.0
    store.step = t


@dataclass
class GradCheckEntry:
    name: str
    n_checked: int
    max_rel_err: float
    worst_index: tuple
    flagged: bool


@dataclass
class GradCheckReport:
    entries: list
    tolerance: float

    @property
    def ok(self):
        return not any(e.flagged for e in self.entries)

    def worst(self):
        return max(self.entries, key=lambda e: e.max_rel_err)

    def flagged_names(self):
        return [e.name for e in self.entries if e.flagged]


def grad_check(loss_fn, store, tolerance=1e-4, h=1e-5, max_coords=100, seed=0):
    """Compare store gradients against central finite differences.

    The caller runs its analytic backward pass first so that store grads
    hold d loss / d param, then passes `loss_fn` () -> float evaluating
    the SAME loss at the store's current values (any sampling noise must
    be frozen inside the closure). Per tensor at most `max_coords`
    coordinates are probed, chosen by a deterministic labeled stream.
    Relative error uses max(|analytic|, |fd|, 1e-8) as denominator.
    """
    analytic = {name: p.grad.copy() for name, p in store.items()}
    entries = []
    for name, p in store.items():
        size = p.value.size
        if size <= max_coords:
            coords = np.arange(size)
        else:
            gen = _rng.stream(seed, "gradcheck/%s" % name)
            coords = gen.choice(size, size=max_coords, replace=False)
            coords.sort()
        flat = p.value.ravel()
        a_flat = analytic[name].ravel()
        max_rel = 0.0
        worst = (0,)
        for c in coords:
            keep = flat[c]
            flat[c] = keep + h
            f_plus = float(loss_fn())
            flat[c] = keep - h
            f_minus = float(loss_fn())
            flat[c] = keep
            fd = (f_plus - f_minus) / (2.0 * h)
            a = a_flat[c]
            rel = abs(fd - a) / max(abs(fd), abs(a), 1e-8)
            if rel > max_rel:
                max_rel = rel
                worst = np.unravel_index(int(c), p.value.shape)
        entries.append(
            GradCheckEntry(
                name=name,
                n_checked=len(coords),
                max_rel_err=max_rel,
                worst_index=worst,
                flagged=max_rel > tolerance,
            )
        )
    return GradCheckReport(entries=entries, tolerance=tolerance)
