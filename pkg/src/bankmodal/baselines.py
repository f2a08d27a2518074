"""Benchmark classifiers: logistic regression, naive Bayes, k-NN, MLP.

Each produces probabilistic scores so the evaluation metrics apply
uniformly.  Logistic regression trains by full-batch proximal gradient
descent with an L1 or L2 penalty; naive Bayes fits per-class diagonal
Gaussians with a variance floor; k-nearest neighbors stores the training
matrix and votes with uniform or inverse-distance weights; the MLP reuses
the gradient engine with a sigmoid head and cross-entropy loss.

All fits are deterministic given their seed and hyperparameters.
"""

import json

import numpy as np

from . import numcore
from .numcore import UsageError
from .panel import ValidationError
from .rng import stream

KINDS = ("lr", "nb", "knn", "mlp")

LR_TOL = 1e-6
LR_MAX_ITER = 10000
NB_VAR_FLOOR = 1e-9


class BaselineModel:
    """A fitted classifier: its kind, hyperparameters, and learned state."""

    def __init__(self, kind, hyper, state):
        self.kind = kind
        self.hyper = dict(hyper)
        self.state = state

    def __repr__(self):
        return "BaselineModel(kind=%r)" % self.kind


def _as_xy(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.ndim != 2 or x.shape[0] != y.shape[0] or x.shape[0] == 0:
        raise ValidationError("need aligned nonempty x (n, d) and y (n,), got %r / %r"
                              % (x.shape, y.shape))
    if not np.all((y == 0) | (y == 1)):
        raise ValidationError("labels must be 0 or 1")
    if not np.all(np.isfinite(x)):
        raise ValidationError("features must be finite")
    return x, y


def _sigmoid(t):
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


# ---------------------------------------------------------------------------
# logistic regression

def _lr_objective(x, y, w, b, penalty, lam):
    t = x @ w + b
    # log(1 + exp(-m)) with m = t for y=1, -t for y=0, stably
    m = np.where(y == 1, t, -t)
    nll = np.mean(np.log1p(np.exp(-np.abs(m))) + np.maximum(-m, 0.0))
    if penalty == "l2":
        return nll + 0.5 * lam * float(w @ w)
    return nll + lam * float(np.abs(w).sum())


def _fit_lr(x, y, hyper):
    penalty = hyper.get("penalty", "l2")
    if penalty not in ("l1", "l2"):
        raise ValidationError("penalty must be 'l1' or 'l2', got %r" % penalty)
    c = float(hyper.get("c", 1.0))
    if c <= 0:
        raise ValidationError("c must be positive")
    max_iter = int(hyper.get("max_iter", LR_MAX_ITER))
    tol = float(hyper.get("tol", LR_TOL))
    n, d = x.shape
    lam = 1.0 / (c * n)

    # Lipschitz constant of the smooth part: the logistic Hessian is
    # bounded by X'X/(4n) over the design extended with the bias column.
    ext = np.hstack([x, np.ones((n, 1))])
    lips = np.linalg.norm(ext, 2) ** 2 / (4.0 * n)
    if penalty == "l2":
        lips += lam
    step = 1.0 / lips

    w = np.zeros(d)
    b = 0.0
    history = []
    iters = 0
    for it in range(1, max_iter + 1):
        iters = it
        p = _sigmoid(x @ w + b)
        gw = x.T @ (p - y) / n
        gb = float(np.mean(p - y))
        if penalty == "l2":
            gw = gw + lam * w
            g_norm = float(np.sqrt(gw @ gw + gb * gb))
            if g_norm < tol:
                break
            w = w - step * gw
            b = b - step * gb
        else:
            w_new = w - step * gw
            w_new = np.sign(w_new) * np.maximum(np.abs(w_new) - step * lam, 0.0)
            b_new = b - step * gb
            # proximal gradient mapping plays the role of the gradient
            g_norm = float(np.sqrt(np.sum(((w - w_new) / step) ** 2)
                                   + ((b - b_new) / step) ** 2))
            w, b = w_new, b_new
            if g_norm < tol:
                break
        if it % 100 == 0:
            history.append(_lr_objective(x, y, w, b, penalty, lam))
    return {"w": w, "b": b, "penalty": penalty, "lam": lam,
            "iters": iters, "objective_history": history}


def _predict_lr(state, x):
    return _sigmoid(x @ state["w"] + state["b"])


# ---------------------------------------------------------------------------
# gaussian naive bayes

def _fit_nb(x, y, hyper):
    priors = hyper.get("priors")
    if priors is None:
        p1 = float(np.mean(y))
        priors = (1.0 - p1, p1)
    else:
        priors = (float(priors[0]), float(priors[1]))
        if min(priors) <= 0 or abs(sum(priors) - 1.0) > 1e-9:
            raise ValidationError("priors must be positive and sum to 1")
    state = {"priors": priors}
    for cls in (0, 1):
        rows = x[y == cls]
        if rows.shape[0] == 0:
            raise ValidationError("naive Bayes needs both classes present")
        state["mean_%d" % cls] = rows.mean(axis=0)
        state["var_%d" % cls] = np.maximum(rows.var(axis=0), NB_VAR_FLOOR)
    return state


def _nb_class_loglik(state, x, cls):
    mu = state["mean_%d" % cls]
    var = state["var_%d" % cls]
    return np.sum(-0.5 * (np.log(2.0 * np.pi * var) + (x - mu) ** 2 / var), axis=1)


def _predict_nb(state, x):
    l0 = _nb_class_loglik(state, x, 0) + np.log(state["priors"][0])
    l1 = _nb_class_loglik(state, x, 1) + np.log(state["priors"][1])
    top = np.maximum(l0, l1)
    z0 = np.exp(l0 - top)
    z1 = np.exp(l1 - top)
    return z1 / (z0 + z1)


# ---------------------------------------------------------------------------
# k-nearest neighbors

def _fit_knn(x, y, hyper):
    k = int(hyper.get("k", 5))
    if not 1 <= k <= x.shape[0]:
        raise ValidationError("k must be in [1, %d], got %d" % (x.shape[0], k))
    metric = hyper.get("metric", "euclidean")
    if metric not in ("euclidean", "manhattan", "minkowski"):
        raise ValidationError("unknown metric %r" % metric)
    p = float(hyper.get("p", 3.0))
    if metric == "minkowski" and p < 1:
        raise ValidationError("minkowski order must be >= 1")
    weights = hyper.get("weights", "uniform")
    if weights not in ("uniform", "distance"):
        raise ValidationError("weights must be 'uniform' or 'distance'")
    return {"x": x.copy(), "y": y.copy(), "k": k, "metric": metric,
            "p": p, "weights": weights}


def _knn_distances(state, x):
    train = state["x"]
    metric = state["metric"]
    if metric == "euclidean":
        d2 = (np.sum(x ** 2, axis=1)[:, None] - 2.0 * x @ train.T
              + np.sum(train ** 2, axis=1)[None, :])
        return np.sqrt(np.maximum(d2, 0.0))
    diff = np.abs(x[:, None, :] - train[None, :, :])
    if metric == "manhattan":
        return diff.sum(axis=2)
    p = state["p"]
    return (diff ** p).sum(axis=2) ** (1.0 / p)


def _predict_knn(state, x):
    dist = _knn_distances(state, x)
    k = state["k"]
    y = state["y"]
    # stable argsort: distance ties resolve to the earliest training row
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    scores = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        idx = order[i]
        d = dist[i, idx]
        if state["weights"] == "uniform":
            scores[i] = float(np.mean(y[idx]))
        else:
            exact = d == 0
            if np.any(exact):
                # a zero-distance neighbor is an exact match and takes
                # all the weight
                scores[i] = float(np.mean(y[idx[exact]]))
            else:
                wts = 1.0 / d
                scores[i] = float(np.sum(wts * y[idx]) / np.sum(wts))
    return scores


# ---------------------------------------------------------------------------
# mlp classifier

def _mlp_spec(d, hyper):
    layers = tuple(int(h) for h in hyper.get("layers", (50,)))
    activation = hyper.get("activation", "relu")
    return numcore.MlpSpec(name="clf", layer_sizes=(d,) + layers,
                           heads=(numcore.HeadSpec("logit", 1, "identity"),),
                           hidden_activation=activation)


def _fit_mlp(x, y, hyper):
    seed = int(hyper.get("seed", 0))
    lr = float(hyper.get("lr", 1e-3))
    epochs = int(hyper.get("epochs", 200))
    batch_size = int(hyper.get("batch_size", 64))
    l2 = float(hyper.get("l2", 0.0))
    n, d = x.shape
    spec = _mlp_spec(d, hyper)
    store = numcore.ParamStore()
    numcore.init_mlp(spec, store, seed)
    yy = y.reshape(-1, 1)
    for epoch in range(epochs):
        perm = stream(seed, "baseline_mlp/shuffle/%d" % epoch).permutation(n)
        for start in range(0, n, batch_size):
            idx = perm[start:start + batch_size]
            xb = x[idx]
            yb = yy[idx]
            outputs, tape = numcore.mlp_forward(spec, store, xb, train_mode=True)
            pi = _sigmoid(outputs["logit"])
            dlogit = (pi - yb) / xb.shape[0]
            numcore.mlp_backward(tape, {"logit": dlogit}, store)
            if l2 > 0:
                for name in store.names():
                    if name.endswith("/W"):
                        store.grad(name)[...] += l2 * store.entry(name).value
            numcore.adam_step(store, lr=lr)
    return {"spec": spec, "store": store, "seed": seed}


def _predict_mlp(state, x):
    outputs, _ = numcore.mlp_forward(state["spec"], state["store"], x)
    return _sigmoid(outputs["logit"]).ravel()


# ---------------------------------------------------------------------------
# public surface

_FITTERS = {"lr": _fit_lr, "nb": _fit_nb, "knn": _fit_knn, "mlp": _fit_mlp}
_PREDICTORS = {"lr": _predict_lr, "nb": _predict_nb,
               "knn": _predict_knn, "mlp": _predict_mlp}


def fit(kind, x, y, **hyper):
    """Train a baseline of the given kind on features x and labels y."""
    if kind not in KINDS:
        raise ValidationError("kind must be one of %r, got %r" % (KINDS, kind))
    x, y = _as_xy(x, y)
    if not (np.any(y == 1) and np.any(y == 0)):
        raise ValidationError("training data must contain both classes")
    state = _FITTERS[kind](x, y, hyper)
    state["n_features"] = x.shape[1]
    return BaselineModel(kind, hyper, state)


def predict(model, x):
    """Probabilistic scores in [0, 1], one per row of x."""
    if not isinstance(model, BaselineModel):
        raise UsageError("predict needs a fitted BaselineModel")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.state["n_features"]:
        raise ValidationError("model fitted on %d features, got shape %r"
                              % (model.state["n_features"], x.shape))
    if not np.all(np.isfinite(x)):
        raise ValidationError("features must be finite")
    return _PREDICTORS[model.kind](model.state, x)


def save_baseline(model, path):
    """JSON bundle: kind, hyperparameters, and learned arrays."""
    state = {}
    for key, value in model.state.items():
        if key == "spec":
            state["spec"] = {
                "layer_sizes": list(value.layer_sizes),
                "hidden_activation": value.hidden_activation,
            }
        elif key == "store":
            state["store"] = {name: model.state["store"].entry(name).value.tolist()
                              for name in model.state["store"].names()}
        elif isinstance(value, np.ndarray):
            state[key] = {"__array__": value.tolist()}
        else:
            state[key] = value
    doc = {"kind": model.kind,
           "hyper": {k: (list(v) if isinstance(v, (tuple, list)) else v)
                     for k, v in model.hyper.items()},
           "state": state}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, sort_keys=True, indent=1)
        f.write("\n")


def load_baseline(path):
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    kind = doc["kind"]
    if kind not in KINDS:
        raise ValidationError("unknown baseline kind %r in %s" % (kind, path))
    state = {}
    for key, value in doc["state"].items():
        if key == "spec":
            hyper = doc["hyper"]
            state["spec"] = _mlp_spec(value["layer_sizes"][0],
                                      {"layers": value["layer_sizes"][1:],
                                       "activation": value["hidden_activation"]})
        elif key == "store":
            continue
        elif isinstance(value, dict) and "__array__" in value:
            state[key] = np.asarray(value["__array__"], dtype=np.float64)
        else:
            state[key] = value
    if kind == "mlp":
        store = numcore.ParamStore()
        numcore.init_mlp(state["spec"], store, seed=0)
        for name in store.names():
            arr = np.asarray(doc["state"]["store"][name], dtype=np.float64)
            store.entry(name).value[...] = arr
        state["store"] = store
    if kind == "nb":
        state["priors"] = tuple(state["priors"])
    return BaselineModel(kind, doc["hyper"], state)
