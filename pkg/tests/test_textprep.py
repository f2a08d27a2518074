"""Tests for the disclosure-text pipeline.

The TF-IDF worked example is computed by hand in closed form: with two
in-vocabulary terms at counts 2 and 1 sharing one idf value, the
normalized vector must be (2, 1)/sqrt(5) regardless of the idf.
"""

import hashlib
import math

import numpy as np
import pytest

from bankmodal.errors import DataError
from bankmodal.porter import stem
from bankmodal.stopwords import ENGLISH_STOPWORDS
from bankmodal import textprep
from bankmodal.textprep import (
    TokenizedDoc,
    filter_docs,
    fit_vocabulary,
    preprocess,
    read_sparse_matrix,
    read_vocabulary,
    scan_mda_dir,
    tokenize,
    vectorize,
    write_sparse_matrix,
    write_vocabulary,
)


def doc(doc_id, tokens, raw=None):
    return TokenizedDoc(doc_id=doc_id, tokens=tuple(tokens),
                        raw_token_count=len(tokens) if raw is None else raw)


class TestTokenize:
    def test_hand_case(self):
        got = tokenize("The company's Q4 losses", "d")
        assert got.tokens == ("the", "company", "losses")
        assert got.raw_token_count == 3

    def test_empty_text(self):
        got = tokenize("", "d")
        assert got.tokens == ()
        assert got.raw_token_count == 0

    def test_digits_and_punctuation_split(self):
        got = tokenize("debt-to-equity rose 12.5% in FY2020", "d")
        assert got.tokens == ("debt", "to", "equity", "rose", "in", "fy")

    def test_single_letters_dropped(self):
        assert tokenize("a b c item I", "d").tokens == ("item",)

    def test_round_trip_stability(self):
        first = tokenize("Operating margin declined while leverage rose", "d")
        again = tokenize(" ".join(first.tokens), "d")
        assert again.tokens == first.tokens


class TestPreprocess:
    def test_stopwords_then_stemming(self):
        got = preprocess(doc("d", ("the", "company", "was", "running", "losses")))
        assert got.tokens == ("compani", "run", "loss")

    def test_all_stopwords_empty(self):
        got = preprocess(doc("d", ("the", "and", "of", "was")))
        assert got.tokens == ()

    def test_raw_count_preserved(self):
        got = preprocess(doc("d", ("the", "market"), raw=2000))
        assert got.raw_token_count == 2000

    def test_stemmer_vectors(self):
        assert stem("running") == "run"
        assert stem("agreed") == "agre"

    def test_stopword_list_pinned(self):
        # frozen upstream list: 147 words, hashed sorted one-per-line
        assert len(ENGLISH_STOPWORDS) == 147
        digest = hashlib.sha256(
            "\n".join(sorted(ENGLISH_STOPWORDS)).encode("utf-8")
        ).hexdigest()
        assert digest == "ffd3fc3bfe9c548e4239199fa42c6cb36ee87a6b496c0fd60e88c5d2140d8215"


class TestFilterDocs:
    def test_threshold_is_strict(self):
        short = doc("short", ("tok",), raw=1500)
        long = doc("long", ("tok",), raw=1501)
        kept, rejected = filter_docs([short, long])
        assert [d.doc_id for d in kept] == ["long"]
        assert rejected == ["short"]

    def test_custom_threshold(self):
        kept, rejected = filter_docs([doc("d", ("a b".split()), raw=10)], min_tokens=5)
        assert rejected == []
        assert len(kept) == 1


class TestVocabulary:
    def test_df_ranking_with_ties(self):
        docs = [doc("1", ("a", "b")), doc("2", ("b", "c"))]
        vocab = fit_vocabulary(docs, max_terms=2)
        assert vocab.terms == (("b", 2), ("a", 1))
        assert vocab.n_docs == 2

    def test_df_counts_documents_not_occurrences(self):
        docs = [doc("1", ("a", "a", "a", "b"))]
        vocab = fit_vocabulary(docs)
        assert dict(vocab.terms)["a"] == 1

    def test_document_order_invariance(self):
        docs = [doc("1", ("x", "y")), doc("2", ("y", "z")), doc("3", ("z",))]
        a = fit_vocabulary(docs)
        b = fit_vocabulary(list(reversed(docs)))
        assert a.terms == b.terms

    def test_smooth_idf(self):
        vocab = fit_vocabulary([doc("1", ("a", "b")), doc("2", ("a",)), doc("3", ("a",))])
        idf = vocab.idf()
        # a: df 3 of 3 docs -> ln(4/4)+1 = 1; b: df 1 -> ln(4/2)+1
        assert math.isclose(idf[0], 1.0, rel_tol=0, abs_tol=1e-15)
        assert math.isclose(idf[1], math.log(2.0) + 1.0, rel_tol=0, abs_tol=1e-15)


class TestVectorize:
    def fit(self):
        corpus = [doc("1", ("alpha", "alpha", "beta")),
                  doc("2", ("alpha", "gamma")),
                  doc("3", ("beta",))]
        return fit_vocabulary(corpus), corpus

    def test_worked_example(self):
        vocab, corpus = self.fit()
        vec = vectorize(corpus[0], vocab)
        # alpha and beta share one idf, so counts (2, 1) normalize to
        # (2, 1)/sqrt(5) exactly
        np.testing.assert_array_equal(vec.indices, [0, 1])
        np.testing.assert_allclose(
            vec.values, [2.0 / math.sqrt(5.0), 1.0 / math.sqrt(5.0)],
            rtol=0, atol=1e-15)
        assert vec.dim == 3

    def test_unit_norm(self):
        vocab, corpus = self.fit()
        for d in corpus:
            v = vectorize(d, vocab)
            assert math.isclose(np.linalg.norm(v.values), 1.0, rel_tol=0, abs_tol=1e-12)

    def test_out_of_vocabulary_terms_dropped(self):
        vocab, _ = self.fit()
        vec = vectorize(doc("x", ("alpha", "unknown", "unseen")), vocab)
        np.testing.assert_array_equal(vec.indices, [0])
        np.testing.assert_allclose(vec.values, [1.0], rtol=0, atol=1e-15)

    def test_nothing_in_vocabulary_gives_zero_vector(self):
        vocab, _ = self.fit()
        vec = vectorize(doc("x", ("unknown",)), vocab)
        assert vec.indices.size == 0
        assert np.all(vec.dense() == 0.0)
        assert vec.dense().shape == (3,)

    def test_idf_weighting_direction(self):
        # equal counts: the rarer term must carry the larger weight
        vocab, _ = self.fit()
        vec = vectorize(doc("x", ("alpha", "gamma")), vocab)
        weights = dict(zip(vec.indices, vec.values))
        assert weights[2] > weights[0]


class TestFiles:
    def test_scan_mda_dir(self, tmp_path):
        for name in ("B_2011Q4.txt", "A_2010Q1.txt", "notes.txt",
                     "C_2012Q5.txt", "D_2013.txt"):
            (tmp_path / name).write_text("x")
        got = scan_mda_dir(str(tmp_path))
        assert [e[0] for e in got] == ["A_2010Q1", "B_2011Q4"]
        assert got[0][1] == "A"
        assert got[0][2] == (2010, 1)
        assert got[0][3].endswith("A_2010Q1.txt")

    def test_firm_ids_with_underscores(self, tmp_path):
        (tmp_path / "ACME_CO_2015Q2.txt").write_text("x")
        got = scan_mda_dir(str(tmp_path))
        assert got[0][1] == "ACME_CO"

    def test_vocabulary_round_trip(self, tmp_path):
        vocab = fit_vocabulary([doc("1", ("a", "b")), doc("2", ("b",))])
        path = str(tmp_path / "vocab.tsv")
        write_vocabulary(vocab, path)
        back = read_vocabulary(path, n_docs=2)
        assert back.terms == vocab.terms
        np.testing.assert_array_equal(back.idf(), vocab.idf())

    def test_vocabulary_bad_line_reports_position(self, tmp_path):
        path = tmp_path / "vocab.tsv"
        path.write_text("good\t3\nbad line\n")
        with pytest.raises(DataError) as err:
            read_vocabulary(str(path), n_docs=2)
        assert "line 2" in str(err.value)

    def test_sparse_round_trip(self, tmp_path):
        vocab, corpus = TestVectorize().fit()
        vecs = [vectorize(d, vocab) for d in corpus]
        path = str(tmp_path / "xm.csv")
        write_sparse_matrix(vecs, path)
        back = read_sparse_matrix(path, dim=3)
        assert set(back) == {"1", "2", "3"}
        for v in vecs:
            np.testing.assert_array_equal(back[v.doc_id].dense(), v.dense())

    def test_sparse_header_checked(self, tmp_path):
        path = tmp_path / "xm.csv"
        path.write_text("wrong,header,here\n")
        with pytest.raises(DataError) as err:
            read_sparse_matrix(str(path), dim=3)
        assert "line 1" in str(err.value)

    def test_sparse_bad_row_reports_position(self, tmp_path):
        path = tmp_path / "xm.csv"
        path.write_text("doc_id,term_index,value\nd,0,0.5\nd,not_an_int\n")
        with pytest.raises(DataError) as err:
            read_sparse_matrix(str(path), dim=3)
        assert "line 3" in str(err.value)
