import random

import numpy as np
import pytest
import scipy.sparse as sp

from scicert.corpus import ASPECTS, ScientificFinding
from scicert.lexicon import Lexicon
from scicert.scoring import (
    BowModel,
    CertaintyScore,
    DegenerateFitError,
    HedgeLinearModel,
    build_vocabulary,
    clamp_certainty,
    featurize,
    fit_bow,
    fit_hedge_model,
    ngrams,
    ridge_fit,
)

TINY_HEDGES = Lexicon.from_entries("tiny", ["may", "might"])


def finding(fid, text):
    return ScientificFinding(finding_id=fid, text=text, source="abstract",
                             origin_doi="10.1/x")


class TestHedgeModel:
    def test_linear_form(self):
        model = HedgeLinearModel(slope=-0.5, intercept=4.0,
                                 hedge_lexicon=TINY_HEDGES)
        assert model.score(finding("f", "No hedging here.")).sentence_certainty == 4.0
        two = finding("g", "It may rain and might snow.")
        assert model.score(two).sentence_certainty == pytest.approx(3.0)

    def test_clamped(self):
        model = HedgeLinearModel(slope=-4.0, intercept=4.0,
                                 hedge_lexicon=TINY_HEDGES)
        low = finding("f", "It may or may not hold.")
        assert model.score(low).sentence_certainty == 1.0

    def test_fit_exact_line(self):
        model = fit_hedge_model([(0, 4.0), (1, 3.0), (2, 2.0)],
                                hedge_lexicon=TINY_HEDGES)
        assert model.slope == pytest.approx(-1.0)
        assert model.intercept == pytest.approx(4.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateFitError):
            fit_hedge_model([(0, 4.0), (0, 2.0)], hedge_lexicon=TINY_HEDGES)

    def test_matches_normal_equation_oracle(self):
        rng = random.Random(5)
        for _ in range(50):
            n = rng.randint(3, 30)
            pts = [(rng.randint(0, 5), rng.uniform(1, 6)) for _ in range(n)]
            if len({h for h, _ in pts}) < 2:
                continue
            model = fit_hedge_model(pts, hedge_lexicon=TINY_HEDGES)
            X = np.array([[1.0, h] for h, _ in pts])
            y = np.array([v for _, v in pts])
            beta = np.linalg.solve(X.T @ X, X.T @ y)
            assert model.intercept == pytest.approx(beta[0], abs=1e-10)
            assert model.slope == pytest.approx(beta[1], abs=1e-10)

    def test_pure_given_frozen_state(self):
        model = fit_hedge_model([(0, 4.0), (2, 3.0)], hedge_lexicon=TINY_HEDGES)
        f = finding("f", "It may hold.")
        assert model.score(f) == model.score(f)


class TestVocabulary:
    def test_ngram_definition(self):
        assert ngrams("a b") == ["a", "b", "a_b"]
        assert ngrams("a b c") == ["a", "b", "c", "a_b", "b_c", "a_b_c"]

    def test_single_doc_vocab(self):
        vocab = build_vocabulary(["a b"])
        assert set(vocab) == {"a", "b", "a_b"}

    def test_capacity_and_tie_break(self):
        # all grams have df=1: lexicographic ties, capacity cuts the tail
        vocab = build_vocabulary(["zz yy"], capacity=2)
        assert set(vocab) == {"yy", "zz"}  # "yy", "zz" beat "zz_yy"? no: sorted
        # document frequency equal -> lexicographic: "yy" < "zz" < "zz_yy"
        assert list(sorted(vocab, key=vocab.get)) == ["yy", "zz"]

    def test_df_ranking(self):
        texts = ["common word", "common thing", "common word again"]
        vocab = build_vocabulary(texts, capacity=2)
        # df: common=3; word=2 ties common_word=2, lexicographic keeps common_word
        assert set(vocab) == {"common", "common_word"}

    def test_featurize_counts_and_oov(self):
        vocab = build_vocabulary(["a b a"])
        X = featurize(["a a zzz b"], vocab)
        row = X.toarray()[0]
        assert row[vocab["a"]] == 2.0
        assert row[vocab["b"]] == 1.0
        assert X.shape[1] == len(vocab)


def ridge_oracle(X, y, lam, w=None):
    """Dense normal equations with explicit intercept column (unpenalized)."""
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    w = np.ones(n) if w is None else np.asarray(w, dtype=float)
    Xa = np.hstack([np.ones((n, 1)), X])
    W = np.diag(w)
    penalty = lam * np.eye(p + 1)
    penalty[0, 0] = 0.0
    beta = np.linalg.solve(Xa.T @ W @ Xa + penalty, Xa.T @ W @ y)
    return beta[1:], beta[0]


class TestRidge:
    def test_near_ols_low_penalty(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(12, 4))
        y = rng.normal(size=12)
        beta, b0 = ridge_fit(sp.csr_matrix(X), y, 1e-10)
        Xa = np.hstack([np.ones((12, 1)), X])
        ols = np.linalg.lstsq(Xa, y, rcond=None)[0]
        assert b0 == pytest.approx(ols[0], abs=1e-8)
        assert np.allclose(beta, ols[1:], atol=1e-8)

    def test_primal_dual_agree(self):
        rng = np.random.default_rng(4)
        X = rng.normal(size=(6, 10))  # p > n: dual path
        y = rng.normal(size=6)
        beta_d, b0_d = ridge_fit(sp.csr_matrix(X), y, 0.7)
        beta_o, b0_o = ridge_oracle(X, y, 0.7)
        assert b0_d == pytest.approx(b0_o, abs=1e-8)
        assert np.allclose(beta_d, beta_o, atol=1e-8)

    def test_matches_oracle_with_weights(self):
        rng = np.random.default_rng(5)
        for n, p in ((15, 4), (5, 9)):
            X = rng.normal(size=(n, p))
            y = rng.normal(size=n)
            w = rng.uniform(0.5, 3.0, size=n)
            beta, b0 = ridge_fit(sp.csr_matrix(X), y, 1.3, w)
            beta_o, b0_o = ridge_oracle(X, y, 1.3, w)
            assert b0 == pytest.approx(b0_o, abs=1e-8)
            assert np.allclose(beta, beta_o, atol=1e-8)


def tiny_training_set():
    texts = [
        ("t1", "results clearly confirmed the effect", 5.6),
        ("t2", "the effect may be present", 3.0),
        ("t3", "findings remain unclear and preliminary", 1.8),
        ("t4", "the study confirmed robust gains", 5.2),
        ("t5", "gains may be small and unclear", 2.2),
        ("t6", "robust effect confirmed in adults", 5.4),
        ("t7", "preliminary data suggest caution", 2.4),
        ("t8", "adults show the effect", 4.2),
    ]
    findings = [finding(fid, text) for fid, text, _ in texts]
    gold = {fid: score for fid, _, score in texts}
    aspects = {}
    for fid, text, score in texts:
        labels = {a: "not_present" for a in ASPECTS}
        labels["probability"] = "uncertain" if score < 3.5 else "certain"
        aspects[fid] = labels
    return findings, gold, aspects


class TestBowModel:
    def test_fit_and_score_deterministic(self):
        findings, gold, aspects = tiny_training_set()
        m1 = fit_bow(findings, gold, aspects, ridge_penalty=0.5)
        m2 = fit_bow(findings, gold, aspects, ridge_penalty=0.5)
        f = finding("q", "the effect may be unclear")
        assert m1.score(f) == m2.score(f)
        assert 1.0 <= m1.score(f).sentence_certainty <= 6.0

    def test_training_order_invariance(self):
        findings, gold, aspects = tiny_training_set()
        shuffled = list(findings)
        random.Random(0).shuffle(shuffled)
        m1 = fit_bow(findings, gold, aspects)
        m2 = fit_bow(shuffled, gold, aspects)
        f = finding("q", "robust gains remain unclear")
        s1, s2 = m1.score(f), m2.score(f)
        assert s1.sentence_certainty == pytest.approx(s2.sentence_certainty, abs=1e-8)
        assert s1.aspects == s2.aspects

    def test_duplicates_equal_doubled_weights(self):
        findings, gold, aspects = tiny_training_set()
        doubled = findings + findings[:3]
        m_dup = fit_bow(doubled, gold, aspects, ridge_penalty=1.0)
        weights = {f.finding_id: 1.0 for f in findings}
        for f in findings[:3]:
            weights[f.finding_id] = 2.0
        m_w = fit_bow(findings, gold, aspects, ridge_penalty=1.0,
                      sample_weight=weights)
        probe = finding("q", "the effect may be robust")
        assert m_dup.predict(probe.text) == pytest.approx(m_w.predict(probe.text),
                                                          abs=1e-8)

    def test_aspect_decision_priority_on_tie(self):
        w = np.zeros(2)
        model = BowModel(
            vocabulary={"a": 0, "b": 1},
            sentence_weights=w, sentence_intercept=4.0,
            aspect_weights={"number": {
                "not_present": (w, 0.5), "certain": (w, 0.5), "uncertain": (w, 0.5)}},
            ridge_penalty=1.0, vocab_capacity=10)
        assert model.predict_aspects("a")["number"] == "uncertain"

    def test_oov_contributes_zero(self):
        findings, gold, aspects = tiny_training_set()
        m = fit_bow(findings, gold, aspects)
        a = m.predict("the effect")
        b = m.predict("the effect qqqq zzzz")
        assert a == pytest.approx(b, abs=1e-9)

    def test_empty_training_rejected(self):
        with pytest.raises(DegenerateFitError):
            fit_bow([], {}, {})

    def test_save_load_round_trip(self, tmp_path):
        findings, gold, aspects = tiny_training_set()
        m = fit_bow(findings, gold, aspects)
        path = tmp_path / "model.npz"
        m.save(path)
        loaded = BowModel.load(path)
        f = finding("q", "preliminary gains may be unclear")
        assert loaded.score(f) == m.score(f)
        assert loaded.vocabulary == m.vocabulary


class TestCertaintyScore:
    def test_requires_all_aspects(self):
        with pytest.raises(Exception):
            CertaintyScore(finding_id="f", sentence_certainty=3.0,
                           aspects=(("number", "certain"),),
                           scorer_id="x", scorer_version="0")

    def test_clamp_helper(self):
        assert clamp_certainty(7.2) == 6.0
        assert clamp_certainty(-1.0) == 1.0
        assert clamp_certainty(3.3) == 3.3
