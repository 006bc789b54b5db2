import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tfnorm.corpus import Document, build_index, index_from_documents
from tfnorm.lm import TopicMeasure
from tfnorm.scoring import (
    Method,
    Query,
    QueryError,
    SmoothingConfig,
    rank,
    score_dir,
    score_dirv,
    score_jm,
    score_jmv,
    score_jmv2,
    smoothed_doc_prob,
)

from conftest import D1, D2, D3


def doc(counts, doc_id="d"):
    return Document.from_counts(doc_id, counts)


# -- independent oracles: raw counts straight into the displayed formulas --------


def oracle_jm_like(qterms, tf, ctf, lam, factor_of_term):
    l_d, l_c = sum(tf.values()), sum(ctf.values())
    return sum(
        math.log((1 - lam) / lam * factor_of_term(w) * (tf[w] / l_d) * (l_c / ctf[w]) + 1)
        for w in qterms if tf.get(w) and ctf.get(w)
    )


def oracle_entropy_exp(tf):
    n = sum(tf.values())
    return math.exp(-sum(c / n * math.log(c / n) for c in tf.values()))


def test_jm_no_query_term_scores_zero(sample_index):
    assert score_jm({"absent": 1}, sample_index.doc_table["D1"], sample_index.stats, 0.5) == 0.0


def test_jm_d1_d2_equal(sample_index, sample_query):
    t, s = sample_index.doc_table, sample_index.stats
    assert score_jm(sample_query, t["D1"], s, 0.3) == score_jm(sample_query, t["D2"], s, 0.3)


def test_jm_two_document_example(plain):
    index = build_index([("D1", D1), ("D3", D3)], plain)
    # l_C = 9, tf_C = 2: ln((1/3) * (9/2) + 1)
    got = score_jm({"language": 1}, index.doc_table["D1"], index.stats, 0.5)
    assert got == pytest.approx(math.log(2.5), abs=1e-12)


def test_dir_absent_term_with_mu_equal_length():
    stats = index_from_documents([doc({"a": 2, "b": 2}, "x"), doc({"c": 4}, "y")]).stats
    x = doc({"a": 2, "b": 2}, "x")
    assert score_dir({"c": 1}, x, stats, mu=4.0) == pytest.approx(math.log(0.5))
    assert score_dir({"c": 2}, x, stats, mu=4.0) == pytest.approx(2 * math.log(0.5))


def test_dir_huge_mu_tends_to_zero(sample_index, sample_query):
    for d in sample_index.doc_table.values():
        assert abs(score_dir(sample_query, d, sample_index.stats, 1e12)) < 1e-6


def test_dir_symmetric_two_doc_example(plain):
    index = build_index([("D1", D1), ("D2", D2)], plain)
    for d in ("D1", "D2"):
        assert score_dir({"language": 1}, index.doc_table[d], index.stats, 3.0) == pytest.approx(0.0, abs=1e-15)
        assert score_dirv({"language": 1}, index.doc_table[d], index.stats, 3.0, "info") == pytest.approx(0.0, abs=1e-15)


def test_jmv_sample_all_equal(sample_index, sample_query):
    t, s = sample_index.doc_table, sample_index.stats
    scores = [score_jmv(sample_query, t[i], s, 0.5, TopicMeasure.INFO) for i in ("D1", "D2", "D3")]
    assert max(scores) - min(scores) <= 1e-9


def test_jmv_zero_when_term_missing(sample_index):
    assert score_jmv({"information": 1}, sample_index.doc_table["D1"], sample_index.stats, 0.5) == 0.0


def test_jmv_reduces_to_jm_when_topic_measures_equal():
    index = index_from_documents([doc({"a": 1, "b": 1}, "x"), doc({"a": 3, "c": 3}, "y"), doc({"d": 2, "b": 2}, "z")])
    q = {"a": 1, "b": 2}
    for d in index.doc_table.values():
        assert score_jmv(q, d, index.stats, 0.4) == pytest.approx(score_jm(q, d, index.stats, 0.4), abs=1e-12)


def test_jmv2_specificity_extremes(sample_index, sample_query):
    t, s = sample_index.doc_table, sample_index.stats
    for d in t.values():
        jm, jmv = score_jm(sample_query, d, s, 0.5), score_jmv(sample_query, d, s, 0.5)
        assert score_jmv2(sample_query, d, s, 0.5, specificity=lambda w: 1.0) == pytest.approx(jmv, abs=1e-12)
        assert score_jmv2(sample_query, d, s, 0.5, specificity=lambda w: 0.0) == pytest.approx(jm, abs=1e-12)


def test_jmv2_matches_hand_computation(sample_index):
    """Single topical query term 'retrieval' in D3, lambda = 0.5, lambda_s = 0.25."""
    tf = {"information": 1, "retrieval": 1, "model": 1, "language": 1, "modeling": 1, "approach": 1}
    ctf = {"language": 4, "modeling": 4, "approach": 4, "information": 1, "retrieval": 1, "model": 1}
    eps = {"D1": 3.0, "D2": 3.0, "D3": oracle_entropy_exp(tf)}
    tau_prime = eps["D3"] / (sum(eps.values()) / 3)
    p_doc, p_coll = 1 / 6, 1 / 15
    s = 0.25 * p_doc / (0.25 * p_doc + 0.75 * p_coll)
    expected = math.log((0.5 / 0.5) * tau_prime ** s * p_doc * (15 / 1) + 1)
    got = score_jmv2({"retrieval": 1}, sample_index.doc_table["D3"], sample_index.stats, 0.5, 0.25)
    assert got == pytest.approx(expected, rel=1e-12)


def test_dirv_equals_dir_when_topic_measure_is_length():
    # all term counts 1: vocabulary size (and information quantity) equals length
    docs = [doc({"a": 1, "b": 1, "c": 1}, "x"), doc({"a": 1, "d": 1}, "y"), doc({"e": 1, "b": 1, "f": 1, "g": 1}, "z")]
    index = index_from_documents(docs)
    q = {"a": 1, "b": 1, "g": 1}
    for d in index.doc_table.values():
        for kind in TopicMeasure:
            assert score_dirv(q, d, index.stats, 50.0, kind) == pytest.approx(score_dir(q, d, index.stats, 50.0), abs=1e-12)


def test_dirv_d1_d2_equal(sample_index, sample_query):
    t, s = sample_index.doc_table, sample_index.stats
    assert score_dirv(sample_query, t["D1"], s, 10.0) == score_dirv(sample_query, t["D2"], s, 10.0)


def test_scores_against_oracle_random():
    rng = random.Random(7)
    vocab = [f"w{i}" for i in range(25)]
    docs = [doc({w: rng.randint(1, 5) for w in rng.sample(vocab, rng.randint(1, 10))}, f"d{i}") for i in range(12)]
    index = index_from_documents(docs)
    ctf = dict(index.stats.ctf)
    l_c = index.stats.total_length
    mean_eps = sum(oracle_entropy_exp(dict(d.tf)) for d in docs) / len(docs)
    for d in docs:
        tf = dict(d.tf)
        q = {w: 1 for w in rng.sample(vocab, 4)}
        tp = oracle_entropy_exp(tf) / mean_eps
        assert score_jm(q, d, index.stats, 0.3) == pytest.approx(oracle_jm_like(q, tf, ctf, 0.3, lambda w: 1), rel=1e-12)
        assert score_jmv(q, d, index.stats, 0.3) == pytest.approx(oracle_jm_like(q, tf, ctf, 0.3, lambda w: tp), rel=1e-12)
        lam_d = 200 / (sum(tf.values()) + 200)
        expected_dir = sum(
            math.log((1 - lam_d) * (tf.get(w, 0) / sum(tf.values())) / (ctf[w] / l_c) + lam_d) for w in q if w in ctf
        )
        assert score_dir(q, d, index.stats, 200.0) == pytest.approx(expected_dir, rel=1e-12, abs=1e-12)


def test_query_multiplicity_and_set_semantics(sample_index):
    d, s = sample_index.doc_table["D3"], sample_index.stats
    once = score_jm({"language": 1}, d, s, 0.5)
    assert score_jm({"language": 3}, d, s, 0.5) == pytest.approx(3 * once)
    assert score_jm({"language": 3}, d, s, 0.5, use_qtf=False) == pytest.approx(once)


def test_unknown_collection_terms_are_skipped(sample_index):
    d, s = sample_index.doc_table["D1"], sample_index.stats
    assert score_dir({"language": 1, "zzz": 4}, d, s, 5.0) == score_dir({"language": 1}, d, s, 5.0)


def test_smoothing_config_validation():
    with pytest.raises(ValueError):
        SmoothingConfig(Method.JM, lam=1.0)
    with pytest.raises(ValueError):
        SmoothingConfig(Method.DIR, mu=0)
    with pytest.raises(ValueError):
        SmoothingConfig(Method.JMV2, lambda_s=0)
    SmoothingConfig(Method.DIR, lam=5.0)  # irrelevant parameter is ignored
    assert SmoothingConfig("jmv").with_param(0.2).lam == 0.2
    assert SmoothingConfig("dirv").with_param(300).mu == 300


@pytest.mark.parametrize("method", [Method.JM, Method.DIR, Method.DIRV])
def test_smoothed_models_are_distributions(method):
    index = index_from_documents([doc({"a": 3, "b": 1}, "x"), doc({"b": 2, "c": 5, "d": 1}, "y")])
    config = SmoothingConfig(method, lam=0.3, mu=7.0)
    for d in index.doc_table.values():
        total = math.fsum(smoothed_doc_prob(config, d, index.stats, w) for w in index.stats.ctf)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_rank_sample_jm(sample_index, sample_query):
    ranked = rank(sample_index, sample_query, SmoothingConfig(Method.JM, lam=0.5), k=3)
    assert ranked.doc_ids == ["D1", "D2", "D3"]
    e = ranked.entries
    assert e[0].score == e[1].score > e[2].score
    assert [x.rank for x in e] == [1, 2, 3]


def test_rank_sample_jmv_tied(sample_index, sample_query):
    ranked = rank(sample_index, sample_query, SmoothingConfig(Method.JMV, lam=0.5))
    assert ranked.doc_ids == ["D1", "D2", "D3"]
    assert len({x.score for x in ranked.entries}) == 1


def test_rank_k_and_errors(sample_index, sample_query):
    assert len(rank(sample_index, sample_query, SmoothingConfig(), k=1)) == 1
    assert len(rank(sample_index, Query.from_tokens("q", ["information"]), SmoothingConfig(), k=50)) == 1
    with pytest.raises(QueryError):
        rank(sample_index, Query.from_tokens("q", ["nothing"]), SmoothingConfig())
    with pytest.raises(ValueError):
        rank(sample_index, sample_query, SmoothingConfig(), k=0)


def test_rank_ordering_invariants():
    rng = random.Random(3)
    vocab = [f"w{i}" for i in range(15)]
    docs = [doc({w: rng.randint(1, 3) for w in rng.sample(vocab, 5)}, f"d{i:02d}") for i in range(30)]
    index = index_from_documents(docs)
    for m in Method:
        ranked = rank(index, Query.from_tokens("q", ["w1", "w2", "w2"]), SmoothingConfig(m, mu=20.0))
        keys = [(-e.score, e.doc_id) for e in ranked.entries]
        assert keys == sorted(keys)
        assert [e.rank for e in ranked.entries] == list(range(1, len(keys) + 1))


# -- monotonicity with length and vocabulary held fixed ----------------------------


@settings(max_examples=150, deadline=None)
@given(
    st.dictionaries(st.sampled_from([f"w{i}" for i in range(12)]), st.integers(1, 6), min_size=2),
    st.sampled_from(list(Method)),
    st.randoms(use_true_random=False),
)
def test_score_increases_with_matched_tf(tf, method, rnd):
    donors = [w for w, c in tf.items() if c >= 2]
    if not donors:
        return
    donor = rnd.choice(donors)
    target = rnd.choice([w for w in tf if w != donor])
    bumped = dict(tf)
    bumped[donor] -= 1
    bumped[target] += 1
    base, more = doc(tf, "base"), doc(bumped, "more")
    others = [doc({f"w{i}": i % 3 + 1 for i in range(j, j + 5)}, f"o{j}") for j in range(6)]
    stats = index_from_documents(others + [base]).stats
    config = SmoothingConfig(method, lam=0.4, mu=30.0, topic_measure=TopicMeasure.VOCAB)
    from tfnorm.scoring import score

    assert score(config, {target: 1}, more, stats) > score(config, {target: 1}, base, stats)
