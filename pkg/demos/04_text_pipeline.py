"""Disclosure text to tf-idf vectors: tokenize, stem, filter, vectorize."""

from bankmodal import textprep as tp


FILING_A = """
Management believes liquidity remains adequate. Operating cash flows
declined during the quarter and the company amended its revolving credit
facility, obtaining covenant relief through fiscal year end. Substantial
doubt about the going concern was raised by continued operating losses.
""" * 120

FILING_B = """
Revenues increased across all segments. The company repaid outstanding
borrowings and expanded gross margins. No material weaknesses were noted.
""" * 40


def main():
    doc_a = tp.tokenize(FILING_A, doc_id="A_2010Q1")
    doc_b = tp.tokenize(FILING_B, doc_id="B_2010Q1")
    short = tp.tokenize("Too short to count.", doc_id="C_2010Q1")
    print("raw token counts: A=%d B=%d C=%d"
          % (doc_a.raw_token_count, doc_b.raw_token_count,
             short.raw_token_count))

    kept, rejected = tp.filter_docs([doc_a, doc_b, short], min_tokens=500)
    print("kept %d docs, rejected %s (below the token floor)"
          % (len(kept), rejected))

    processed = [tp.preprocess(d) for d in kept]
    print("\nstemming and stopword removal, first 10 terms of A:")
    print("  %s" % (processed[0].tokens[:10],))

    vocab = tp.fit_vocabulary(processed, max_terms=50)
    print("\nvocabulary of %d stems over %d docs, top 8 by document frequency:"
          % (len(vocab.terms), vocab.n_docs))
    for term, df in vocab.terms[:8]:
        print("  %-12s df=%d" % (term, df))

    for doc in processed:
        vec = tp.vectorize(doc, vocab)
        norm = sum(v * v for v in vec.values) ** 0.5
        print("\n%s: %d nonzero tf-idf weights, L2 norm %.6f"
              % (vec.doc_id, vec.indices.size, norm))
        top = sorted(zip(vec.values, vec.indices), reverse=True)[:3]
        for value, idx in top:
            print("  %-12s %.4f" % (vocab.terms[idx][0], value))


if __name__ == "__main__":
    main()
