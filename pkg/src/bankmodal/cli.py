"""Command-line surface wiring the library into reproducible experiments.

Subcommands: synth (seeded dataset generation), prep (text + panel
pipeline), train (CMMD or a baseline), predict (scores, optional latent
export), evaluate (metrics over one or more score files), sweep
(hyperparameter grid with a ranked leaderboard), and mui (the market
uncertainty index series).

Every command takes --config pointing at a single JSON document, with
--seed and --out overriding the matching scalar fields.  Unknown config
keys are rejected, and the resolved configuration is archived next to the
outputs so every run can be reproduced from its artifacts alone.  Reruns
with the same config and inputs produce byte-identical outputs.

Exit codes: 0 success, 2 validation error, 3 data error, 4 internal
error.
"""

import argparse
import csv
import itertools
import json
import os
import sys

import numpy as np

from . import baselines as bl
from . import cmmd
from . import evalx
from . import mui as mui_mod
from . import panel as pl
from . import textprep as tp
from .errors import DataError, ValidationError
from .numcore import NonFiniteError, ShapeError, UsageError
from .rng import stream

COMMANDS = ("synth", "prep", "train", "predict", "evaluate", "sweep", "mui")

_COMMON_KEYS = {"seed", "out"}
_SPLIT_KEYS = {"horizon", "train_end", "test_start", "train_frac", "split_seed"}
_SCHEMAS = {
    "synth": ({"n_firms"},
              {"quarters_per_firm", "latent_k", "xo_dim", "xm_dim", "label_noise",
               "xm_missing", "saturation", "xo_noise", "xm_noise", "bias"}),
    "prep": ({"fundamentals_csv", "mda_dir", "train_end", "test_start"},
             {"market_csv", "bankruptcies_csv", "min_tokens", "max_vocab"}),
    "train": ({"model", "data_dir", "data_kind"},
              _SPLIT_KEYS | {"downsample", "cmmd", "baseline", "features"}),
    "predict": ({"model_kind", "model_path", "data_dir", "data_kind"},
                _SPLIT_KEYS | {"split", "features", "n_samples", "latent_export"}),
    "evaluate": ({"scores"}, {"a", "b"}),
    "sweep": ({"model", "data_dir", "data_kind", "grid"},
              _SPLIT_KEYS | {"downsample", "cmmd", "baseline", "features"}),
    "mui": ({"model_path", "data_dir", "data_kind"},
            _SPLIT_KEYS | {"sic_csv", "split"}),
}


def _check_schema(command, config):
    required, optional = _SCHEMAS[command]
    allowed = required | optional | _COMMON_KEYS
    unknown = sorted(set(config) - allowed)
    if unknown:
        raise ValidationError("unknown config keys for %s: %s"
                              % (command, ", ".join(unknown)))
    missing = sorted(required - set(config))
    if missing:
        raise ValidationError("missing config keys for %s: %s"
                              % (command, ", ".join(missing)))


def _load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as f:
            config = json.load(f)
    except json.JSONDecodeError as e:
        raise ValidationError("config %s is not valid JSON: %s" % (path, e))
    if not isinstance(config, dict):
        raise ValidationError("config %s must hold a JSON object" % path)
    return config


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


def _prepare_out(config):
    out = config.get("out")
    if not out:
        raise ValidationError("an output directory is required ('out' or --out)")
    os.makedirs(out, exist_ok=True)
    _write_json(os.path.join(out, "resolved_config.json"), config)
    return out


def _seed_of(config):
    seed = config.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ValidationError("seed must be an integer, got %r" % (seed,))
    return seed


# ---------------------------------------------------------------------------
# dataset plumbing

def _read_scaler(path):
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if doc.get("mins") is None:
        return None
    return pl.ScalerState(mins=np.asarray(doc["mins"], dtype=np.float64),
                          maxs=np.asarray(doc["maxs"], dtype=np.float64))


def _load_dataset(config):
    """Model-ready arrays plus row identity, for synth or prep directories."""
    kind = config["data_kind"]
    dirp = config["data_dir"]
    if kind == "synth":
        data = pl.load_synth(dirp)
        sic = {}
        for fid, div in zip(data.firm_ids, data.sic_division):
            sic.setdefault(fid, div)
        return {"xo": data.xo, "xm": data.xm, "y": data.y, "ids": data.ids,
                "firm_ids": data.firm_ids, "quarters": data.quarters,
                "has_xm": data.has_xm, "sic": sic}
    if kind == "prep":
        rows = pl.read_panel_csv(os.path.join(dirp, "panel.csv"))
        if not rows:
            raise DataError("%s holds an empty panel" % dirp)
        scaler = _read_scaler(os.path.join(dirp, "scaler.json"))
        if scaler is None:
            raise DataError("%s holds no fitted scaler" % dirp)
        vocab_path = os.path.join(dirp, "vocab.tsv")
        vocab = tp.read_vocabulary(vocab_path, n_docs=1)
        dim = len(vocab.terms)
        vectors = tp.read_sparse_matrix(os.path.join(dirp, "xm.csv"), dim)
        horizon = int(config.get("horizon", 1))
        xo = pl.apply_scaler(pl.rows_to_matrix(rows), scaler)
        y = pl.rows_to_labels(rows, horizon)
        # absent doc_id just means every stored weight was zero
        xm = np.zeros((len(rows), dim))
        for i, row in enumerate(rows):
            vec = vectors.get(row.mda_ref)
            if vec is not None:
                xm[i] = vec.dense()
        ids = tuple("%s_%s" % (r.firm_id, pl.format_quarter(r.quarter)) for r in rows)
        return {"xo": xo, "xm": xm, "y": y, "ids": ids,
                "firm_ids": tuple(r.firm_id for r in rows),
                "quarters": tuple(r.quarter for r in rows),
                "has_xm": np.ones(len(rows), dtype=bool), "sic": None}
    raise ValidationError("data_kind must be 'synth' or 'prep', got %r" % kind)


def _split_indices(config, ds):
    """(train, test) row indices per the configured split."""
    n = len(ds["ids"])
    if config["data_kind"] == "synth":
        frac = float(config.get("train_frac", 0.7))
        if not 0.0 < frac < 1.0:
            raise ValidationError("train_frac must lie in (0, 1)")
        split_seed = int(config.get("split_seed", 0))
        perm = stream(split_seed, "cli/split").permutation(n)
        k = int(round(frac * n))
        return np.sort(perm[:k]), np.sort(perm[k:])
    if "train_end" not in config or "test_start" not in config:
        raise ValidationError("prep data needs train_end and test_start quarters")
    train_end = pl.parse_quarter(config["train_end"])
    test_start = pl.parse_quarter(config["test_start"])
    if pl.quarter_index(train_end) >= pl.quarter_index(test_start):
        raise ValidationError("train_end must precede test_start")
    qi = np.array([pl.quarter_index(q) for q in ds["quarters"]])
    train = np.flatnonzero(qi <= pl.quarter_index(train_end))
    test = np.flatnonzero(qi >= pl.quarter_index(test_start))
    return train, test


def _select_split(config, ds, default="test"):
    which = config.get("split", default)
    if which == "all":
        return np.arange(len(ds["ids"]))
    train, test = _split_indices(config, ds)
    if which == "train":
        return train
    if which == "test":
        return test
    raise ValidationError("split must be 'train', 'test', or 'all', got %r" % which)


# ---------------------------------------------------------------------------
# model plumbing shared by train, predict, and sweep

def _needs_xm(config):
    if config["model"] == "cmmd":
        return True
    return config.get("features", "xo") == "xo+xm"


def _train_model(config, ds, train_idx):
    """Fit the configured model on the training rows; returns (model, extras)."""
    name = config["model"]
    seed = _seed_of(config)
    if name not in ("cmmd",) + bl.KINDS:
        raise ValidationError("model must be cmmd or one of %r, got %r"
                              % (bl.KINDS, name))
    idx = np.asarray(train_idx)
    dropped_no_xm = 0
    if _needs_xm(config):
        mask = ds["has_xm"][idx]
        dropped_no_xm = int((~mask).sum())
        idx = idx[mask]
    if idx.size == 0:
        raise ValidationError("no usable training rows")
    y = ds["y"][idx]
    if config.get("downsample", True):
        sub = pl.downsample(y, seed)
        idx = idx[sub]
        y = ds["y"][idx]
    info = {"train_rows": int(idx.size),
            "train_positives": int(y.sum()),
            "dropped_missing_xm": dropped_no_xm}

    if name == "cmmd":
        overrides = dict(config.get("cmmd", {}))
        for banned in ("xo_dim", "xm_dim", "seed"):
            if banned in overrides:
                raise ValidationError("cmmd config key %r is set by the run itself"
                                      % banned)
        cfg = cmmd.CmmdConfig(xo_dim=ds["xo"].shape[1], xm_dim=ds["xm"].shape[1],
                              seed=seed, **overrides)
        model = cmmd.CmmdModel.new(cfg)
        history = cmmd.train(model, ds["xo"][idx], ds["xm"][idx], y)
        return model, history, info

    hyper = dict(config.get("baseline", {}))
    if name == "mlp":
        hyper.setdefault("seed", seed)
    x = ds["xo"][idx]
    if config.get("features", "xo") == "xo+xm":
        x = np.hstack([x, ds["xm"][idx]])
    model = bl.fit(name, x, y.ravel(), **hyper)
    return model, None, info


def _model_scores(config, model_kind, model, ds, idx):
    """Scores for the selected rows; xm-dependent models skip rows lacking it."""
    idx = np.asarray(idx)
    if idx.size == 0:
        raise ValidationError("no rows selected for scoring")
    if model_kind == "cmmd":
        n_samples = config.get("n_samples")
        scores = cmmd.predict(model, ds["xo"][idx],
                              n_samples=None if n_samples is None else int(n_samples))
        return scores, idx, np.array([], dtype=int)
    if config.get("features", "xo") == "xo+xm":
        mask = ds["has_xm"][idx]
        scored, skipped = idx[mask], idx[~mask]
        if scored.size == 0:
            raise ValidationError("every selected row lacks the text modality")
        x = np.hstack([ds["xo"][scored], ds["xm"][scored]])
        return bl.predict(model, x), scored, skipped
    return bl.predict(model, ds["xo"][idx]), idx, np.array([], dtype=int)


def _write_scores_csv(path, ids, labels, scores):
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["row_id", "y", "score"])
        for rid, yv, sv in zip(ids, labels, scores):
            writer.writerow([rid, int(yv), repr(float(sv))])


def _read_scores_csv(path):
    ids, labels, scores = [], [], []
    for line_no, rec in pl._read_csv_rows(path, ("row_id", "y", "score")):
        ids.append(rec["row_id"].strip())
        if rec["y"].strip() not in ("0", "1"):
            raise DataError("%s line %d: y must be 0 or 1" % (path, line_no))
        labels.append(float(rec["y"]))
        try:
            scores.append(float(rec["score"]))
        except ValueError:
            raise DataError("%s line %d: score is not numeric: %r"
                            % (path, line_no, rec["score"]))
    return ids, np.asarray(labels), np.asarray(scores)


# ---------------------------------------------------------------------------
# commands

def cmd_synth(config):
    out = _prepare_out(config)
    kwargs = {k: config[k] for k in _SCHEMAS["synth"][0] | _SCHEMAS["synth"][1]
              if k in config}
    data = pl.synth_generate(seed=_seed_of(config), **kwargs)
    pl.save_synth(data, out)
    print("wrote %d rows to %s" % (data.xo.shape[0], out))
    return 0


def cmd_prep(config):
    out = _prepare_out(config)
    fundamentals = pl.read_fundamentals_csv(config["fundamentals_csv"])
    market = (pl.read_market_csv(config["market_csv"])
              if config.get("market_csv") else {})
    raw = pl.assemble_raw(fundamentals, market)
    filings, skipped_chapter = (pl.read_bankruptcies_csv(config["bankruptcies_csv"])
                                if config.get("bankruptcies_csv") else ([], 0))

    min_tokens = int(config.get("min_tokens", tp.MIN_RAW_TOKENS))
    max_vocab = int(config.get("max_vocab", tp.MAX_VOCAB))
    entries = tp.scan_mda_dir(config["mda_dir"])
    tokenized = []
    doc_key = {}
    for doc_id, firm_id, quarter, path in entries:
        with open(path, "r", encoding="utf-8") as f:
            tokenized.append(tp.tokenize(f.read(), doc_id=doc_id))
        doc_key[doc_id] = (firm_id, quarter)
    kept, rejected = tp.filter_docs(tokenized, min_tokens)
    docs = {d.doc_id: tp.preprocess(d) for d in kept}
    mda_index = {doc_key[doc_id]: doc_id for doc_id in docs}

    rows, report = pl.build_panel(raw, mda_index, filings)
    train_end = pl.parse_quarter(config["train_end"])
    test_start = pl.parse_quarter(config["test_start"])
    train_rows, test_rows = pl.split_by_period(rows, train_end, test_start)

    report.update({
        "docs_scanned": len(entries),
        "docs_kept": len(kept),
        "docs_rejected": sorted(rejected),
        "bankruptcies_skipped_chapter": skipped_chapter,
        "train_rows": len(train_rows),
        "test_rows": len(test_rows),
    })

    pl.write_panel_csv(rows, os.path.join(out, "panel.csv"))
    if rows:
        scaler = pl.fit_scaler(pl.rows_to_matrix(train_rows))
        _write_json(os.path.join(out, "scaler.json"),
                    {"mins": scaler.mins.tolist(), "maxs": scaler.maxs.tolist()})
        train_doc_ids = {r.mda_ref for r in train_rows}
        vocab = tp.fit_vocabulary([docs[d] for d in sorted(train_doc_ids)], max_vocab)
        used_doc_ids = sorted({r.mda_ref for r in rows})
        vectors = [tp.vectorize(docs[d], vocab) for d in used_doc_ids]
        report["vocab_size"] = len(vocab.terms)
        report["vocab_n_docs"] = vocab.n_docs
    else:
        _write_json(os.path.join(out, "scaler.json"), {"mins": None, "maxs": None})
        vocab = tp.Vocabulary(terms=(), n_docs=0)
        vectors = []
        report["vocab_size"] = 0
        report["vocab_n_docs"] = 0
    tp.write_vocabulary(vocab, os.path.join(out, "vocab.tsv"))
    tp.write_sparse_matrix(vectors, os.path.join(out, "xm.csv"))
    _write_json(os.path.join(out, "prep_report.json"), report)
    print("panel: %d rows (%d train, %d test), vocabulary: %d terms"
          % (len(rows), len(train_rows), len(test_rows), report["vocab_size"]))
    return 0


def cmd_train(config):
    out = _prepare_out(config)
    ds = _load_dataset(config)
    train_idx, _ = _split_indices(config, ds)
    model, history, info = _train_model(config, ds, train_idx)
    if config["model"] == "cmmd":
        cmmd.save(model, os.path.join(out, "model.bundle"))
        with open(os.path.join(out, "history.csv"), "w", encoding="utf-8",
                  newline="") as f:
            writer = csv.writer(f)
            writer.writerow(("epoch",) + cmmd.LossBreakdown.FIELDS)
            for epoch, row in enumerate(history.epochs, start=1):
                writer.writerow([epoch] + [repr(v) for v in row.as_tuple()])
    else:
        bl.save_baseline(model, os.path.join(out, "model.json"))
        if config["model"] == "lr":
            info["lr_iterations"] = model.state["iters"]
    info["model"] = config["model"]
    _write_json(os.path.join(out, "train_report.json"), info)
    print("trained %s on %d rows (%d positive)"
          % (config["model"], info["train_rows"], info["train_positives"]))
    return 0


def _load_model(config):
    kind = config["model_kind"]
    path = config["model_path"]
    if kind == "cmmd":
        return cmmd.load(path)
    if kind in bl.KINDS:
        model = bl.load_baseline(path)
        if model.kind != kind:
            raise ValidationError("model_kind is %r but %s holds a %r model"
                                  % (kind, path, model.kind))
        return model
    raise ValidationError("model_kind must be cmmd or one of %r" % (bl.KINDS,))


def cmd_predict(config):
    out = _prepare_out(config)
    ds = _load_dataset(config)
    idx = _select_split(config, ds, default="test")
    model = _load_model(config)
    kind = config["model_kind"]
    scores, scored_idx, skipped_idx = _model_scores(config, kind, model, ds, idx)
    ids = [ds["ids"][i] for i in scored_idx]
    labels = ds["y"][scored_idx].ravel()
    _write_scores_csv(os.path.join(out, "scores.csv"), ids, labels, scores)
    if kind != "cmmd" and config.get("features", "xo") == "xo+xm":
        _write_json(os.path.join(out, "skip_report.json"),
                    {"selected": int(len(idx)),
                     "scored": int(scored_idx.size),
                     "skipped": int(skipped_idx.size),
                     "skipped_ids": [ds["ids"][i] for i in skipped_idx]})
    if kind == "cmmd" and config.get("latent_export"):
        prior = cmmd.encode_prior(model, ds["xo"][scored_idx])
        d = prior.mu.shape[1]
        with open(os.path.join(out, "latent.csv"), "w", encoding="utf-8",
                  newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["row_id", "score"]
                            + ["mu_%02d" % i for i in range(d)]
                            + ["var_%02d" % i for i in range(d)])
            for row_pos, rid in enumerate(ids):
                writer.writerow([rid, repr(float(scores[row_pos]))]
                                + [repr(float(v)) for v in prior.mu[row_pos]]
                                + [repr(float(v)) for v in prior.var[row_pos]])
    print("scored %d rows (%d skipped)" % (scored_idx.size, skipped_idx.size))
    return 0


def cmd_evaluate(config):
    out = _prepare_out(config)
    paths = config["scores"]
    if isinstance(paths, str):
        paths = [paths]
    if not paths:
        raise ValidationError("scores must name at least one file")
    a = float(config.get("a", 2.0))
    b = float(config.get("b", 2.0))
    runs = []
    for path in paths:
        _, labels, scores = _read_scores_csv(path)
        report = evalx.metric_report(scores, labels, a=a, b=b)
        report["path"] = path
        runs.append(report)
    metrics = ("auc", "h_measure", "ks")
    doc = {"runs": runs, "n_runs": len(runs),
           "mean": {m: float(np.mean([r[m] for r in runs])) for m in metrics},
           "std": {m: float(np.std([r[m] for r in runs])) for m in metrics}}
    _write_json(os.path.join(out, "metrics.json"), doc)
    print(" ".join("%s=%.4f" % (m, doc["mean"][m]) for m in metrics))
    return 0


def cmd_sweep(config):
    out = _prepare_out(config)
    grid = config["grid"]
    if not isinstance(grid, dict) or not grid:
        raise ValidationError("grid must be a non-empty {parameter: values} object")
    for key, values in grid.items():
        if not isinstance(values, list) or not values:
            raise ValidationError("grid values for %r must be a non-empty list" % key)
    ds = _load_dataset(config)
    train_idx, test_idx = _split_indices(config, ds)
    sub_key = "cmmd" if config["model"] == "cmmd" else "baseline"
    keys = sorted(grid)
    rows = []
    for gi, combo in enumerate(itertools.product(*[grid[k] for k in keys])):
        point = {k: v for k, v in config.items() if k not in ("grid",)}
        merged = dict(point.get(sub_key, {}))
        merged.update(dict(zip(keys, combo)))
        point[sub_key] = merged
        model, _, _ = _train_model(point, ds, train_idx)
        scores, scored_idx, _ = _model_scores(point, config["model"], model, ds,
                                              test_idx)
        report = evalx.metric_report(scores, ds["y"][scored_idx].ravel())
        rows.append({"grid_index": gi,
                     "params": json.dumps(dict(zip(keys, combo)), sort_keys=True),
                     "auc": report["auc"], "h_measure": report["h_measure"],
                     "ks": report["ks"]})
    rows.sort(key=lambda r: (-r["auc"], r["grid_index"]))
    with open(os.path.join(out, "leaderboard.csv"), "w", encoding="utf-8",
              newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["rank", "grid_index", "auc", "h_measure", "ks", "params"])
        for rank, row in enumerate(rows, start=1):
            writer.writerow([rank, row["grid_index"], repr(row["auc"]),
                             repr(row["h_measure"]), repr(row["ks"]), row["params"]])
    print("swept %d grid points; best auc %.4f" % (len(rows), rows[0]["auc"]))
    return 0


def cmd_mui(config):
    out = _prepare_out(config)
    ds = _load_dataset(config)
    idx = _select_split(config, ds, default="all")
    model = cmmd.load(config["model_path"])
    prior = cmmd.encode_prior(model, ds["xo"][idx])
    latents = []
    for pos, i in enumerate(idx):
        latents.append(mui_mod.CompanyLatent(ds["firm_ids"][i], ds["quarters"][i],
                                             prior.mu[pos], prior.var[pos]))
    sic_map = None
    if config.get("sic_csv"):
        sic_map = {}
        for line_no, rec in pl._read_csv_rows(config["sic_csv"],
                                              ("firm_id", "sic_division")):
            try:
                sic_map[rec["firm_id"].strip()] = int(rec["sic_division"])
            except ValueError:
                raise DataError("%s line %d: sic_division is not an integer: %r"
                                % (config["sic_csv"], line_no, rec["sic_division"]))
    elif ds["sic"]:
        sic_map = ds["sic"]
    rows = mui_mod.mui_table(latents, sic_map)
    mui_mod.write_mui_csv(rows, os.path.join(out, "mui.csv"))
    print("wrote %d index rows" % len(rows))
    return 0


_HANDLERS = {"synth": cmd_synth, "prep": cmd_prep, "train": cmd_train,
             "predict": cmd_predict, "evaluate": cmd_evaluate,
             "sweep": cmd_sweep, "mui": cmd_mui}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="bankmodal",
        description="Multimodal bankruptcy prediction experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON config")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        config = _load_config(args.config)
        _check_schema(args.command, config)
        if args.seed is not None:
            config["seed"] = args.seed
        if args.out is not None:
            config["out"] = args.out
        return _HANDLERS[args.command](config)
    except (ValidationError, UsageError, ShapeError, evalx.MetricError) as e:
        print("validation error: %s" % e, file=sys.stderr)
        return 2
    except (DataError, cmmd.BundleError, json.JSONDecodeError, OSError) as e:
        print("data error: %s" % e, file=sys.stderr)
        return 3
    except NonFiniteError as e:
        print("internal error: %s" % e, file=sys.stderr)
        return 4
    except Exception as e:
        print("internal error: %s: %s" % (type(e).__name__, e), file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
