"""Disclosure-text pipeline: tokenize, filter, stem, and TF-IDF vectorize.

Documents are management-discussion texts, one plain-text file per
firm-quarter named ``<firm_id>_<YYYYQn>.txt``. The pipeline is:

  tokenize -> filter_docs (raw token count > 1500) -> preprocess
  (stopword removal, then Porter stemming) -> fit_vocabulary on the
  training corpus -> vectorize every document.

The vocabulary keeps the top terms by document frequency (capped, ties
broken lexicographically) and idf uses the smooth variant
ln((1+N)/(1+df)) + 1 with N the size of the fitting corpus. Vectors are
L2-normalized, so every non-empty document has unit norm.
"""

import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .porter import stem
from .stopwords import ENGLISH_STOPWORDS

_TOKEN_RE = re.compile(r"[a-z]+")

MIN_RAW_TOKENS = 1500
MAX_VOCAB = 20000


@dataclass(frozen=True)
class TokenizedDoc:
    doc_id: str
    tokens: tuple
    raw_token_count: int


@dataclass(frozen=True)
class Vocabulary:
    """Ordered (term, document_frequency) pairs plus the fitting-corpus size."""

    terms: tuple
    n_docs: int

    def __len__(self):
        return len(self.terms)

    def index(self):
        return {term: i for i, (term, _) in enumerate(self.terms)}

    def idf(self):
        df = np.array([d for _, d in self.terms], dtype=np.float64)
        return np.log((1.0 + self.n_docs) / (1.0 + df)) + 1.0


@dataclass(frozen=True)
class DocVector:
    doc_id: str
    indices: np.ndarray
    values: np.ndarray
    dim: int

    def dense(self):
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out


def tokenize(text, doc_id=""):
    """Lowercase, split on non-alphabetic runs, drop tokens shorter than 2.

    raw_token_count is recorded here, before any stopword removal.
    """
    tokens = tuple(t for t in _TOKEN_RE.findall(text.lower()) if len(t) >= 2)
    return TokenizedDoc(doc_id=doc_id, tokens=tokens, raw_token_count=len(tokens))


def preprocess(doc):
    """Remove stopwords, then Porter-stem what remains."""
    kept = tuple(stem(t) for t in doc.tokens if t not in ENGLISH_STOPWORDS)
    return TokenizedDoc(doc_id=doc.doc_id, tokens=kept, raw_token_count=doc.raw_token_count)


def filter_docs(docs, min_tokens=MIN_RAW_TOKENS):
    """Keep docs with raw_token_count strictly greater than min_tokens.

    Returns (kept, rejected_ids); a doc with exactly min_tokens is out.
    """
    kept = []
    rejected = []
    for doc in docs:
        if doc.raw_token_count > min_tokens:
            kept.append(doc)
        else:
            rejected.append(doc.doc_id)
    return kept, rejected


def fit_vocabulary(docs, max_terms=MAX_VOCAB):
    """Top-max_terms terms by document frequency over the given corpus.

    Ties in document frequency break lexicographically ascending. Fit on
    training documents only; test-time terms outside the result are
    simply dropped by vectorize.
    """
    df = {}
    for doc in docs:
        for term in set(doc.tokens):
            df[term] = df.get(term, 0) + 1
    ranked = sorted(df.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocabulary(terms=tuple(ranked[:max_terms]), n_docs=len(docs))


def vectorize(doc, vocab):
    """TF-IDF vector: tf = raw in-doc count, idf smooth, L2-normalized."""
    index = vocab.index()
    idf = vocab.idf()
    counts = {}
    for term in doc.tokens:
        i = index.get(term)
        if i is not None:
            counts[i] = counts.get(i, 0) + 1
    if not counts:
        return DocVector(
            doc_id=doc.doc_id,
            indices=np.zeros(0, dtype=np.int64),
            values=np.zeros(0),
            dim=len(vocab),
        )
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in indices], dtype=np.float64) * idf[indices]
    values /= np.linalg.norm(values)
    return DocVector(doc_id=doc.doc_id, indices=indices, values=values, dim=len(vocab))


_DOC_NAME_RE = re.compile(r"^(?P<firm>.+)_(?P<year>\d{4})Q(?P<q>[1-4])\.txt$")


def scan_mda_dir(path):
    """List (doc_id, firm_id, (year, quarter), file path) for MDA files.

    doc_id is the file stem. Files not matching ``<firm_id>_<YYYYQn>.txt``
    are ignored. Sorted by doc_id for deterministic downstream order.
    """
    entries = []
    for name in sorted(os.listdir(path)):
        m = _DOC_NAME_RE.match(name)
        if not m:
            continue
        entries.append(
            (
                name[: -len(".txt")],
                m.group("firm"),
                (int(m.group("year")), int(m.group("q"))),
                os.path.join(path, name),
            )
        )
    return entries


def write_vocabulary(vocab, path):
    """One ``term<TAB>df`` line per term, in vocabulary order."""
    with open(path, "w", encoding="utf-8") as f:
        for term, df in vocab.terms:
            f.write("%s\t%d\n" % (term, df))


def read_vocabulary(path, n_docs):
    terms = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                term, df = line.split("\t")
                terms.append((term, int(df)))
            except ValueError:
                raise DataError("%s line %d: expected 'term<TAB>count', got %r"
                                % (path, line_no, line))
    return Vocabulary(terms=tuple(terms), n_docs=n_docs)


def write_sparse_matrix(vectors, path):
    """CSV of (doc_id, term_index, value) triples, one block per document."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("doc_id,term_index,value\n")
        for vec in vectors:
            for i, v in zip(vec.indices, vec.values):
                f.write("%s,%d,%s\n" % (vec.doc_id, i, repr(float(v))))


def read_sparse_matrix(path, dim):
    """Rebuild {doc_id: DocVector} from a write_sparse_matrix file."""
    rows = {}
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline()
        if header.strip() != "doc_id,term_index,value":
            raise DataError("%s line 1: unexpected sparse matrix header: %r"
                            % (path, header.strip()))
        for line_no, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                doc_id, idx, val = line.split(",")
                rows.setdefault(doc_id, ([], []))
                rows[doc_id][0].append(int(idx))
                rows[doc_id][1].append(float(val))
            except ValueError:
                raise DataError("%s line %d: expected 'doc_id,index,value', got %r"
                                % (path, line_no, line))
    out = {}
    for doc_id, (idx, val) in rows.items():
        out[doc_id] = DocVector(
            doc_id=doc_id,
            indices=np.array(idx, dtype=np.int64),
            values=np.array(val),
            dim=dim,
        )
    return out
