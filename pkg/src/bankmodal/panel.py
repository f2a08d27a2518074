"""Quarterly panel assembly for bankruptcy prediction.

Turns raw fundamentals/market rows into model-ready observations: computes
the 33 accounting and market predictors, attaches the most recent MDA
document (usable for four quarters), removes firms after they file, labels
each row with 1/2/3-year bankruptcy windows, scales features to [0, 1],
balances classes by down-sampling, and splits train/test by calendar
quarter.  Also houses a seeded synthetic generator that produces
multimodal data with a known ground-truth latent state, plus the CSV
formats used by the command-line layer.

Row timing convention: a row is keyed by the quarter its data describes,
and its h-year label covers filings in the window (q, q + 4h].  The
exclusive window start is what realizes the one-period reporting lag: data
observed at q is only asked to predict events strictly after q.
"""

import csv
import json
import math
import os
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, ValidationError
from .numcore import UsageError
from .rng import stream


# ---------------------------------------------------------------------------
# quarters

def check_quarter(q):
    """Validate a (year, quarter) tuple and return it."""
    if (not isinstance(q, tuple) or len(q) != 2
            or not isinstance(q[0], int) or not isinstance(q[1], int)):
        raise ValidationError("quarter must be an (int year, int 1-4) tuple, got %r" % (q,))
    if not 1 <= q[1] <= 4:
        raise ValidationError("quarter number out of range in %r" % (q,))
    return q


def quarter_index(q):
    """Total quarter count; consecutive quarters differ by exactly 1."""
    check_quarter(q)
    return q[0] * 4 + (q[1] - 1)


def add_quarters(q, n):
    idx = quarter_index(q) + n
    return (idx // 4, idx % 4 + 1)


def parse_quarter(text):
    """Parse '2010Q1' into (2010, 1)."""
    s = text.strip()
    for sep in ("Q", "q"):
        if sep in s:
            year, _, num = s.partition(sep)
            try:
                return check_quarter((int(year), int(num)))
            except ValueError:
                break
    raise ValidationError("cannot parse quarter %r (expected e.g. '2010Q1')" % text)


def format_quarter(q):
    check_quarter(q)
    return "%dQ%d" % q


# ---------------------------------------------------------------------------
# predictors

FUNDAMENTAL_COLUMNS = (
    "actq", "lctq", "apq", "saleq", "cheq", "atq", "chq", "dlcq", "dlttq",
    "invchy", "saley", "invtq", "ltq", "cshoq", "prccq", "niq", "oiadpq",
    "req", "seqq", "wcapq",
)

# Fixed predictor order: the 31 accounting ratios followed by the two
# market variables.  Everything downstream (panel.csv columns, xo feature
# indices, scaler state) relies on this ordering.
PREDICTOR_NAMES = (
    "assets_to_liabilities",      # actq/lctq
    "ap_to_sales",                # apq/saleq
    "csi_to_assets",              # cheq/atq
    "csi_to_me_tl",               # cheq/(cshoq*prccq+ltq)
    "cash_to_assets",             # chq/atq
    "cash_to_cl",                 # chq/lctq
    "debts_to_assets",            # (dlcq+0.5*dlttq)/atq
    "inv_growth_to_inv",          # invchy/saley
    "inv_to_sales",               # invtq/saleq
    "cl_minus_cash_to_assets",    # (lctq-chq)/atq
    "cl_to_assets",               # lctq/atq
    "cl_to_tl",                   # lctq/ltq
    "cl_to_sales",                # lctq/saleq
    "tl_to_assets",               # ltq/atq
    "tl_to_me_tl",                # ltq/(cshoq*prccq+ltq)
    "log_assets",                 # log(atq)
    "log_sales",                  # log(abs(saleq))
    "market_to_book",             # (cshoq*prccq)/(atq-ltq)
    "ni_to_assets",               # niq/atq
    "ni_to_me_tl",                # niq/(cshoq*prccq+ltq)
    "ni_to_sales",                # niq/saleq
    "oi_to_assets",               # oiadpq/atq
    "oi_to_sales",                # oiadpq/saleq
    "quick_to_cl",                # (actq-invtq)/lctq
    "re_to_assets",               # req/atq
    "re_to_cl",                   # req/lctq
    "sales_to_assets",            # saleq/atq
    "equity_to_assets",           # seqq/atq
    "wc_to_assets",               # wcapq/atq
    "rsize",                      # log(cshoq*prccq)/TE
    "log_price",                  # log(min(prccq,15))
    "excess_return",              # ret - vwretd
    "volatility",                 # std of daily returns, past 63 days
)

N_PREDICTORS = len(PREDICTOR_NAMES)

MIN_VOLATILITY_OBS = 21
MAX_DAILY_RETURNS = 63


@dataclass
class RawQuarter:
    """One firm-quarter of raw inputs; missing values are None."""

    firm_id: str
    quarter: tuple
    actq: float = None
    lctq: float = None
    apq: float = None
    saleq: float = None
    cheq: float = None
    atq: float = None
    chq: float = None
    dlcq: float = None
    dlttq: float = None
    invchy: float = None
    saley: float = None
    invtq: float = None
    ltq: float = None
    cshoq: float = None
    prccq: float = None
    niq: float = None
    oiadpq: float = None
    req: float = None
    seqq: float = None
    wcapq: float = None
    ret: float = None
    vwretd: float = None
    daily_returns: tuple = ()
    sic_division: int = None

    def __post_init__(self):
        check_quarter(self.quarter)
        if len(self.daily_returns) > MAX_DAILY_RETURNS:
            raise ValidationError("daily_returns longer than %d for %s %s"
                                  % (MAX_DAILY_RETURNS, self.firm_id,
                                     format_quarter(self.quarter)))
        if self.sic_division is not None and not 1 <= self.sic_division <= 10:
            raise ValidationError("sic_division must be 1-10, got %r" % self.sic_division)


def _div(num, den):
    # Zero or absent denominators flag the feature missing; negative
    # denominators stay computable.
    if num is None or den is None or den == 0:
        return None
    return num / den


def _log(x):
    if x is None or x <= 0:
        return None
    return math.log(x)


def compute_predictors(rq, total_equity=None):
    """All 33 predictors for one raw row, as {name: float or None}.

    total_equity is the quarter-wide sum of seqq across the in-sample
    universe; without it the relative-size predictor is flagged missing.
    Every other predictor depends only on the row itself.
    """
    me = None
    if rq.cshoq is not None and rq.prccq is not None:
        me = rq.cshoq * rq.prccq
    me_tl = None
    if me is not None and rq.ltq is not None:
        me_tl = me + rq.ltq

    debts = None
    if rq.dlcq is not None and rq.dlttq is not None:
        debts = rq.dlcq + 0.5 * rq.dlttq
    cl_minus_cash = None
    if rq.lctq is not None and rq.chq is not None:
        cl_minus_cash = rq.lctq - rq.chq
    book = None
    if rq.atq is not None and rq.ltq is not None:
        book = rq.atq - rq.ltq
    quick = None
    if rq.actq is not None and rq.invtq is not None:
        quick = rq.actq - rq.invtq

    log_sales = None
    if rq.saleq is not None:
        log_sales = _log(abs(rq.saleq))
    log_price = None
    if rq.prccq is not None:
        log_price = _log(min(rq.prccq, 15.0))
    rsize = None
    log_me = _log(me)
    if log_me is not None and total_equity is not None and total_equity != 0:
        rsize = log_me / total_equity
    excess = None
    if rq.ret is not None and rq.vwretd is not None:
        excess = rq.ret - rq.vwretd
    obs = [r for r in rq.daily_returns if r is not None]
    vol = None
    if len(obs) >= MIN_VOLATILITY_OBS:
        vol = float(np.std(np.asarray(obs, dtype=np.float64), ddof=1))

    return {
        "assets_to_liabilities": _div(rq.actq, rq.lctq),
        "ap_to_sales": _div(rq.apq, rq.saleq),
        "csi_to_assets": _div(rq.cheq, rq.atq),
        "csi_to_me_tl": _div(rq.cheq, me_tl),
        "cash_to_assets": _div(rq.chq, rq.atq),
        "cash_to_cl": _div(rq.chq, rq.lctq),
        "debts_to_assets": _div(debts, rq.atq),
        "inv_growth_to_inv": _div(rq.invchy, rq.saley),
        "inv_to_sales": _div(rq.invtq, rq.saleq),
        "cl_minus_cash_to_assets": _div(cl_minus_cash, rq.atq),
        "cl_to_assets": _div(rq.lctq, rq.atq),
        "cl_to_tl": _div(rq.lctq, rq.ltq),
        "cl_to_sales": _div(rq.lctq, rq.saleq),
        "tl_to_assets": _div(rq.ltq, rq.atq),
        "tl_to_me_tl": _div(rq.ltq, me_tl),
        "log_assets": _log(rq.atq),
        "log_sales": log_sales,
        "market_to_book": _div(me, book),
        "ni_to_assets": _div(rq.niq, rq.atq),
        "ni_to_me_tl": _div(rq.niq, me_tl),
        "ni_to_sales": _div(rq.niq, rq.saleq),
        "oi_to_assets": _div(rq.oiadpq, rq.atq),
        "oi_to_sales": _div(rq.oiadpq, rq.saleq),
        "quick_to_cl": _div(quick, rq.lctq),
        "re_to_assets": _div(rq.req, rq.atq),
        "re_to_cl": _div(rq.req, rq.lctq),
        "sales_to_assets": _div(rq.saleq, rq.atq),
        "equity_to_assets": _div(rq.seqq, rq.atq),
        "wc_to_assets": _div(rq.wcapq, rq.atq),
        "rsize": rsize,
        "log_price": log_price,
        "excess_return": excess,
        "volatility": vol,
    }


def total_equity_by_quarter(raw_rows):
    """Sum of seqq per quarter over the given universe (missing skipped)."""
    totals = {}
    for rq in raw_rows:
        if rq.seqq is not None:
            totals[rq.quarter] = totals.get(rq.quarter, 0.0) + rq.seqq
    return totals


# ---------------------------------------------------------------------------
# panel construction

MDA_MAX_AGE = 3      # an MDA attaches to its own quarter plus three more
LABEL_HORIZONS = (1, 2, 3)
QUARTERS_PER_YEAR = 4


@dataclass
class PanelRow:
    firm_id: str
    quarter: tuple
    predictors: np.ndarray
    mda_ref: str
    labels: dict


def build_panel(raw_rows, mda_index, bankruptcies):
    """Assemble model-ready rows from raw quarters, MDA keys, and filings.

    mda_index maps (firm_id, quarter) to a document id.  bankruptcies is an
    iterable of (firm_id, filing_quarter) pairs, already restricted to
    Chapter 7/11; a firm with several entries counts from the earliest.

    Returns (rows, report).  Rows are sorted by firm then quarter.  A row
    survives only if the firm has not filed at or before its quarter, an
    MDA from the last four quarters is attachable, and all 33 predictors
    are computable.  Its h-year label is 1 iff the firm files within
    (q, q + 4h].  The report counts drops by reason and filings that never
    matched an emitted labeled row.
    """
    raw_rows = list(raw_rows)
    seen = {}
    dupes = []
    for rq in raw_rows:
        key = (rq.firm_id, rq.quarter)
        if key in seen:
            dupes.append(key)
        seen[key] = True
    if dupes:
        listed = ", ".join("%s %s" % (f, format_quarter(q)) for f, q in sorted(dupes))
        raise ValidationError("duplicate firm-quarters: %s" % listed)

    filing = {}
    for firm_id, fq in bankruptcies:
        check_quarter(fq)
        if firm_id not in filing or quarter_index(fq) < quarter_index(filing[firm_id]):
            filing[firm_id] = fq

    te = total_equity_by_quarter(raw_rows)

    mda_by_firm = {}
    for (firm_id, fq), doc_id in mda_index.items():
        mda_by_firm.setdefault(firm_id, []).append((quarter_index(fq), doc_id))
    for entries in mda_by_firm.values():
        entries.sort()

    drops = {"post_filing": 0, "no_mda": 0, "missing_predictor": 0}
    rows = []
    for rq in raw_rows:
        qi = quarter_index(rq.quarter)
        fq = filing.get(rq.firm_id)
        if fq is not None and qi >= quarter_index(fq):
            drops["post_filing"] += 1
            continue
        doc_id = None
        for mi, candidate in mda_by_firm.get(rq.firm_id, ()):
            if mi <= qi <= mi + MDA_MAX_AGE:
                doc_id = candidate      # sorted ascending, so latest wins
        if doc_id is None:
            drops["no_mda"] += 1
            continue
        values = compute_predictors(rq, total_equity=te.get(rq.quarter))
        if any(values[name] is None for name in PREDICTOR_NAMES):
            drops["missing_predictor"] += 1
            continue
        vec = np.array([values[name] for name in PREDICTOR_NAMES], dtype=np.float64)
        labels = {}
        for h in LABEL_HORIZONS:
            hit = fq is not None and qi < quarter_index(fq) <= qi + QUARTERS_PER_YEAR * h
            labels[h] = 1 if hit else 0
        rows.append(PanelRow(rq.firm_id, rq.quarter, vec, doc_id, labels))

    rows.sort(key=lambda r: (r.firm_id, quarter_index(r.quarter)))

    matched = set()
    for row in rows:
        if any(row.labels[h] for h in LABEL_HORIZONS):
            matched.add(row.firm_id)
    report = {
        "input_rows": len(raw_rows),
        "emitted_rows": len(rows),
        "drops": drops,
        "bankruptcies_total": len(filing),
        "bankruptcies_matched": len(matched & set(filing))
        if filing else 0,
    }
    return rows, report


def rows_to_matrix(rows):
    """Stack predictor vectors into an (n, 33) float matrix."""
    if not rows:
        return np.zeros((0, N_PREDICTORS), dtype=np.float64)
    return np.stack([r.predictors for r in rows]).astype(np.float64)


def rows_to_labels(rows, horizon):
    if horizon not in LABEL_HORIZONS:
        raise ValidationError("horizon must be one of %r" % (LABEL_HORIZONS,))
    return np.array([[r.labels[horizon]] for r in rows], dtype=np.float64)


# ---------------------------------------------------------------------------
# scaling, balancing, splitting

@dataclass
class ScalerState:
    mins: np.ndarray
    maxs: np.ndarray


def fit_scaler(x):
    """Per-feature (min, max) over training rows."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise ValidationError("scaler needs a nonempty 2-d matrix, got shape %r"
                              % (x.shape,))
    if not np.all(np.isfinite(x)):
        raise ValidationError("scaler input contains non-finite values")
    return ScalerState(mins=x.min(axis=0), maxs=x.max(axis=0))


def apply_scaler(x, state):
    """Map to (v - min)/(max - min), clamped to [0, 1]; constant features to 0."""
    if not isinstance(state, ScalerState) or state.mins is None:
        raise UsageError("apply_scaler needs a fitted ScalerState")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != state.mins.shape[0]:
        raise ValidationError("scaler fitted on %d features, got shape %r"
                              % (state.mins.shape[0], x.shape))
    span = state.maxs - state.mins
    safe = np.where(span > 0, span, 1.0)
    scaled = (x - state.mins) / safe
    scaled = np.where(span > 0, scaled, 0.0)
    return np.clip(scaled, 0.0, 1.0)


def downsample(y, seed):
    """Indices of a class-balanced subset; majority sampled without replacement.

    y is a 0/1 vector (or (n, 1) column).  The minority class is kept
    whole; the returned indices are sorted ascending so row order is
    preserved.  Same seed, same subset.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    if len(pos) == 0 or len(neg) == 0:
        raise ValidationError("down-sampling needs both classes present")
    if len(pos) == len(neg):
        return np.sort(np.concatenate([pos, neg]))
    minority, majority = (pos, neg) if len(pos) < len(neg) else (neg, pos)
    rng = stream(seed, "downsample")
    chosen = rng.choice(majority, size=len(minority), replace=False)
    return np.sort(np.concatenate([minority, chosen]))


def split_by_period(rows, train_end, test_start):
    """Temporal split: quarter <= train_end trains, >= test_start tests."""
    check_quarter(train_end)
    check_quarter(test_start)
    if quarter_index(train_end) >= quarter_index(test_start):
        raise ValidationError("train_end %s must precede test_start %s"
                              % (format_quarter(train_end), format_quarter(test_start)))
    train = [r for r in rows if quarter_index(r.quarter) <= quarter_index(train_end)]
    test = [r for r in rows if quarter_index(r.quarter) >= quarter_index(test_start)]
    if not train:
        warnings.warn("temporal split produced an empty training side")
    if not test:
        warnings.warn("temporal split produced an empty test side")
    return train, test


# ---------------------------------------------------------------------------
# synthetic data

SYNTH_START_QUARTER = (2010, 1)
SYNTH_XM_DENSITY = 0.02


@dataclass
class SynthData:
    """Seeded multimodal dataset with its generator's ground truth."""

    xo: np.ndarray
    xm: np.ndarray
    y: np.ndarray
    z_star: np.ndarray
    bayes: np.ndarray
    has_xm: np.ndarray
    ids: tuple
    firm_ids: tuple
    quarters: tuple
    sic_division: tuple
    coeff_a: np.ndarray
    coeff_b: np.ndarray
    coeff_w: np.ndarray
    bias: float
    config: dict = field(default_factory=dict)


def synth_generate(n_firms, quarters_per_firm=1, latent_k=8, xo_dim=33,
                   xm_dim=200, label_noise=0.0, xm_missing=0.0, seed=0,
                   saturation=2.5, xo_noise=0.3, xm_noise=0.1, bias=-2.0):
    """Draw a multimodal dataset from a known latent-state model.

    Each firm-quarter gets an independent latent z* ~ N(0, I_k).  The
    tabular view squashes a linear read-out: xo = sigmoid(saturation *
    A z* + noise), which lands in [0, 1] and deliberately saturates so
    that a linear model on xo cannot recover z* exactly.  The text view
    xm = relu(B z* + noise) keeps only the largest ~2% of entries per row
    and is L2-normalized, so rows have unit (or zero) norm like TF-IDF
    vectors.  Labels are Bernoulli in sigmoid(w . z* + bias) mixed toward
    one half by label_noise; the exact mixture probability is recorded per
    row in `bayes`, giving a ground-truth score oracle.  A seeded share
    xm_missing of rows is marked as lacking the text view.
    """
    if n_firms < 1 or quarters_per_firm < 1 or latent_k < 1 or xm_dim < 1:
        raise ValidationError("synth sizes must be at least 1")
    if not 0.0 <= label_noise <= 1.0 or not 0.0 <= xm_missing <= 1.0:
        raise ValidationError("label_noise and xm_missing must lie in [0, 1]")
    n = n_firms * quarters_per_firm

    a = stream(seed, "synth/A").normal(size=(xo_dim, latent_k)) / math.sqrt(latent_k)
    b = stream(seed, "synth/B").normal(size=(xm_dim, latent_k)) / math.sqrt(latent_k)
    w = stream(seed, "synth/w").normal(size=latent_k)
    w = w / np.linalg.norm(w)

    z = stream(seed, "synth/z").normal(size=(n, latent_k))
    eps1 = stream(seed, "synth/eps1").normal(size=(n, xo_dim)) * xo_noise
    eps2 = stream(seed, "synth/eps2").normal(size=(n, xm_dim)) * xm_noise

    xo = 1.0 / (1.0 + np.exp(-(saturation * (z @ a.T) + eps1)))

    xm = np.maximum(z @ b.T + eps2, 0.0)
    keep = max(1, int(round(SYNTH_XM_DENSITY * xm_dim)))
    if keep < xm_dim:
        # keep the top entries per row; anything nonpositive stays zero
        cut = np.partition(xm, xm_dim - keep, axis=1)[:, xm_dim - keep]
        xm = np.where(xm >= np.maximum(cut, 1e-300)[:, None], xm, 0.0)
    norms = np.linalg.norm(xm, axis=1, keepdims=True)
    xm = np.where(norms > 0, xm / np.where(norms > 0, norms, 1.0), 0.0)

    p_clean = 1.0 / (1.0 + np.exp(-(z @ w + bias)))
    p = (1.0 - label_noise) * p_clean + label_noise * 0.5
    y = (stream(seed, "synth/y").random(n) < p).astype(np.float64).reshape(n, 1)
    has_xm = stream(seed, "synth/mask").random(n) >= xm_missing

    firm_ids = []
    quarters = []
    sic = []
    for i in range(n_firms):
        fid = "F%04d" % (i + 1)
        for j in range(quarters_per_firm):
            firm_ids.append(fid)
            quarters.append(add_quarters(SYNTH_START_QUARTER, j))
            sic.append(i % 10 + 1)
    ids = tuple("%s_%s" % (f, format_quarter(q)) for f, q in zip(firm_ids, quarters))

    config = {
        "n_firms": n_firms, "quarters_per_firm": quarters_per_firm,
        "latent_k": latent_k, "xo_dim": xo_dim, "xm_dim": xm_dim,
        "label_noise": label_noise, "xm_missing": xm_missing, "seed": seed,
        "saturation": saturation, "xo_noise": xo_noise, "xm_noise": xm_noise,
        "bias": bias,
    }
    return SynthData(xo=xo, xm=xm, y=y, z_star=z, bayes=p, has_xm=has_xm,
                     ids=ids, firm_ids=tuple(firm_ids), quarters=tuple(quarters),
                     sic_division=tuple(sic), coeff_a=a, coeff_b=b, coeff_w=w,
                     bias=bias, config=config)


# ---------------------------------------------------------------------------
# file formats

def _parse_cell(text, column, path, line_no):
    s = text.strip()
    if s == "":
        return None
    try:
        return float(s)
    except ValueError:
        raise DataError("%s line %d: column %s is not numeric: %r"
                        % (path, line_no, column, text))


def _read_csv_rows(path, required):
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("%s: empty file" % path)
        header = [h.strip() for h in header]
        missing = [c for c in required if c not in header]
        if missing:
            raise DataError("%s line 1: missing columns %s" % (path, ", ".join(missing)))
        for line_no, row in enumerate(reader, start=2):
            if not row or all(c.strip() == "" for c in row):
                continue
            if len(row) != len(header):
                raise DataError("%s line %d: expected %d cells, got %d"
                                % (path, line_no, len(header), len(row)))
            yield line_no, dict(zip(header, row))


def _row_quarter(rec, path, line_no):
    try:
        return check_quarter((int(rec["year"]), int(rec["quarter"])))
    except (ValueError, ValidationError):
        raise DataError("%s line %d: bad year/quarter %r/%r"
                        % (path, line_no, rec.get("year"), rec.get("quarter")))


def read_fundamentals_csv(path):
    """firm_id, year, quarter plus the 20 raw accounting columns."""
    required = ("firm_id", "year", "quarter") + FUNDAMENTAL_COLUMNS
    out = {}
    for line_no, rec in _read_csv_rows(path, required):
        firm_id = rec["firm_id"].strip()
        q = _row_quarter(rec, path, line_no)
        values = {c: _parse_cell(rec[c], c, path, line_no) for c in FUNDAMENTAL_COLUMNS}
        key = (firm_id, q)
        if key in out:
            raise DataError("%s line %d: duplicate firm-quarter %s %s"
                            % (path, line_no, firm_id, format_quarter(q)))
        out[key] = values
    return out


MARKET_RETURN_COLUMNS = tuple("r%02d" % i for i in range(1, MAX_DAILY_RETURNS + 1))


def read_market_csv(path):
    """firm_id, year, quarter, ret, vwretd, r01..r63 (blanks allowed)."""
    required = ("firm_id", "year", "quarter", "ret", "vwretd") + MARKET_RETURN_COLUMNS
    out = {}
    for line_no, rec in _read_csv_rows(path, required):
        firm_id = rec["firm_id"].strip()
        q = _row_quarter(rec, path, line_no)
        key = (firm_id, q)
        if key in out:
            raise DataError("%s line %d: duplicate firm-quarter %s %s"
                            % (path, line_no, firm_id, format_quarter(q)))
        out[key] = {
            "ret": _parse_cell(rec["ret"], "ret", path, line_no),
            "vwretd": _parse_cell(rec["vwretd"], "vwretd", path, line_no),
            "daily_returns": tuple(_parse_cell(rec[c], c, path, line_no)
                                   for c in MARKET_RETURN_COLUMNS),
        }
    return out


def read_bankruptcies_csv(path):
    """(firm_id, filing_quarter) pairs for Chapter 7/11 rows; others skipped."""
    required = ("firm_id", "filing_year", "filing_quarter", "chapter")
    filings = []
    skipped = 0
    for line_no, rec in _read_csv_rows(path, required):
        chapter = rec["chapter"].strip()
        if chapter not in ("7", "11"):
            skipped += 1
            continue
        try:
            q = check_quarter((int(rec["filing_year"]), int(rec["filing_quarter"])))
        except (ValueError, ValidationError):
            raise DataError("%s line %d: bad filing year/quarter"
                            % (path, line_no))
        filings.append((rec["firm_id"].strip(), q))
    return filings, skipped


def assemble_raw(fundamentals, market):
    """Join fundamentals and market blocks on (firm_id, quarter)."""
    rows = []
    for (firm_id, q), values in sorted(fundamentals.items()):
        extra = market.get((firm_id, q), {})
        rows.append(RawQuarter(firm_id=firm_id, quarter=q,
                               ret=extra.get("ret"), vwretd=extra.get("vwretd"),
                               daily_returns=extra.get("daily_returns", ()),
                               **values))
    return rows


def _fmt(value):
    return "" if value is None else repr(float(value))


def write_panel_csv(rows, path):
    """One PanelRow per line, predictor columns in the fixed order."""
    header = ["firm_id", "year", "quarter", "mda_ref",
              "label_1y", "label_2y", "label_3y"] + list(PREDICTOR_NAMES)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for r in rows:
            writer.writerow([r.firm_id, r.quarter[0], r.quarter[1], r.mda_ref,
                             r.labels[1], r.labels[2], r.labels[3]]
                            + [repr(float(v)) for v in r.predictors])


def read_panel_csv(path):
    required = ("firm_id", "year", "quarter", "mda_ref",
                "label_1y", "label_2y", "label_3y") + PREDICTOR_NAMES
    rows = []
    for line_no, rec in _read_csv_rows(path, required):
        q = _row_quarter(rec, path, line_no)
        vec = np.empty(N_PREDICTORS, dtype=np.float64)
        for i, name in enumerate(PREDICTOR_NAMES):
            v = _parse_cell(rec[name], name, path, line_no)
            if v is None:
                raise DataError("%s line %d: blank predictor %s" % (path, line_no, name))
            vec[i] = v
        labels = {}
        for h in LABEL_HORIZONS:
            cell = rec["label_%dy" % h].strip()
            if cell not in ("0", "1"):
                raise DataError("%s line %d: label_%dy must be 0 or 1, got %r"
                                % (path, line_no, h, cell))
            labels[h] = int(cell)
        rows.append(PanelRow(rec["firm_id"].strip(), q, vec, rec["mda_ref"].strip(),
                             labels))
    return rows


def save_synth(data, out_dir):
    """Write a SynthData set: xo.csv, xm.csv (sparse), rows.csv, sic.csv, truth.json."""
    os.makedirs(out_dir, exist_ok=True)
    n, xo_dim = data.xo.shape
    with open(os.path.join(out_dir, "xo.csv"), "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["row_id"] + ["x%02d" % i for i in range(1, xo_dim + 1)])
        for i in range(n):
            writer.writerow([data.ids[i]] + [repr(float(v)) for v in data.xo[i]])
    with open(os.path.join(out_dir, "xm.csv"), "w", encoding="utf-8", newline="") as f:
        f.write("doc_id,term_index,value\n")
        for i in range(n):
            if not data.has_xm[i]:
                continue
            for j in np.flatnonzero(data.xm[i]):
                f.write("%s,%d,%s\n" % (data.ids[i], j, repr(float(data.xm[i, j]))))
    with open(os.path.join(out_dir, "rows.csv"), "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["row_id", "firm_id", "year", "quarter", "y", "bayes", "has_xm"])
        for i in range(n):
            writer.writerow([data.ids[i], data.firm_ids[i], data.quarters[i][0],
                             data.quarters[i][1], int(data.y[i, 0]),
                             repr(float(data.bayes[i])), int(data.has_xm[i])])
    with open(os.path.join(out_dir, "sic.csv"), "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["firm_id", "sic_division"])
        seen = set()
        for fid, div in zip(data.firm_ids, data.sic_division):
            if fid not in seen:
                writer.writerow([fid, div])
                seen.add(fid)
    truth = {
        "config": data.config,
        "coeff_a": data.coeff_a.tolist(),
        "coeff_b": data.coeff_b.tolist(),
        "coeff_w": data.coeff_w.tolist(),
        "bias": data.bias,
    }
    with open(os.path.join(out_dir, "truth.json"), "w", encoding="utf-8") as f:
        json.dump(truth, f, indent=2, sort_keys=True)
        f.write("\n")


def load_synth(in_dir):
    """Rebuild the arrays written by save_synth (z_star is not persisted)."""
    xo_path = os.path.join(in_dir, "xo.csv")
    rows_path = os.path.join(in_dir, "rows.csv")
    truth_path = os.path.join(in_dir, "truth.json")
    with open(truth_path, "r", encoding="utf-8") as f:
        truth = json.load(f)
    config = truth["config"]

    ids = []
    xo_rows = []
    for line_no, rec in _read_csv_rows(xo_path, ("row_id",)):
        ids.append(rec["row_id"].strip())
        cells = [v for k, v in sorted(rec.items()) if k.startswith("x") and k != "row_id"]
        xo_rows.append([_parse_cell(c, "xo", xo_path, line_no) for c in cells])
    xo = np.asarray(xo_rows, dtype=np.float64)
    index = {rid: i for i, rid in enumerate(ids)}

    n = len(ids)
    y = np.zeros((n, 1))
    bayes = np.zeros(n)
    has_xm = np.zeros(n, dtype=bool)
    firm_ids = [None] * n
    quarters = [None] * n
    for line_no, rec in _read_csv_rows(rows_path, ("row_id", "firm_id", "year",
                                                   "quarter", "y", "bayes", "has_xm")):
        rid = rec["row_id"].strip()
        if rid not in index:
            raise DataError("%s line %d: unknown row_id %r" % (rows_path, line_no, rid))
        i = index[rid]
        y[i, 0] = float(rec["y"])
        bayes[i] = float(rec["bayes"])
        has_xm[i] = rec["has_xm"].strip() == "1"
        firm_ids[i] = rec["firm_id"].strip()
        quarters[i] = _row_quarter(rec, rows_path, line_no)

    xm_dim = int(config["xm_dim"])
    xm = np.zeros((n, xm_dim))
    xm_path = os.path.join(in_dir, "xm.csv")
    with open(xm_path, "r", encoding="utf-8") as f:
        header = f.readline()
        if header.strip() != "doc_id,term_index,value":
            raise DataError("%s line 1: unexpected header %r" % (xm_path, header.strip()))
        for line_no, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            rid, idx, val = line.split(",")
            if rid not in index:
                raise DataError("%s line %d: unknown row_id %r" % (xm_path, line_no, rid))
            xm[index[rid], int(idx)] = float(val)

    sic_map = {}
    sic_path = os.path.join(in_dir, "sic.csv")
    for line_no, rec in _read_csv_rows(sic_path, ("firm_id", "sic_division")):
        sic_map[rec["firm_id"].strip()] = int(rec["sic_division"])
    sic = tuple(sic_map[fid] for fid in firm_ids)

    return SynthData(xo=xo, xm=xm, y=y, z_star=None, bayes=bayes, has_xm=has_xm,
                     ids=tuple(ids), firm_ids=tuple(firm_ids),
                     quarters=tuple(quarters), sic_division=sic,
                     coeff_a=np.asarray(truth["coeff_a"]),
                     coeff_b=np.asarray(truth["coeff_b"]),
                     coeff_w=np.asarray(truth["coeff_w"]),
                     bias=float(truth["bias"]), config=config)
