import json
from pathlib import Path

import pytest

from scicert.corpus import ScientificFinding
from scicert.lexicon import load_stopwords
from scicert.matching import match_findings, normalize_for_match, pair_stats

STOPWORDS = load_stopwords()
ROWS = json.loads(
    (Path(__file__).parent / "data" / "matched_findings_rows.json").read_text())


def news(fid, text):
    return ScientificFinding(finding_id=fid, text=text, source="news",
                             origin_doi="10.1/x", origin_article_id="a",
                             extraction_keyword="found")


def abstract(fid, text):
    return ScientificFinding(finding_id=fid, text=text, source="abstract",
                             origin_doi="10.1/x")


class TestNormalize:
    def test_empty(self):
        assert normalize_for_match("", STOPWORDS) == frozenset()

    def test_fixed_example(self):
        # computed once with the shipped stopword list + Porter stemmer, frozen
        stems = normalize_for_match(
            "Being bullied may increase the risk for parasomnias.", STOPWORDS)
        assert stems == frozenset({"be", "bulli", "mai", "increas", "risk",
                                   "parasomnia"})

    def test_idempotent_fixpoint(self):
        stems = normalize_for_match("Dried fruits may lower the GI of bread.",
                                    STOPWORDS)
        again = normalize_for_match(" ".join(sorted(stems)), STOPWORDS)
        assert again == stems


class TestPairStats:
    def test_identical_sets(self):
        s = normalize_for_match("Inflated praise decreases challenge seeking.",
                                STOPWORDS)
        ov, jac = pair_stats(s, s)
        assert jac == 1.0
        assert ov == len(s)

    def test_disjoint(self):
        a = normalize_for_match("Quiet ocean waves.", STOPWORDS)
        b = normalize_for_match("Fiscal policy tightened.", STOPWORDS)
        ov, jac = pair_stats(a, b)
        assert ov == 0 and jac == 0.0

    def test_symmetric(self):
        a = normalize_for_match(ROWS[0]["news"], STOPWORDS)
        b = normalize_for_match(ROWS[0]["abstract"], STOPWORDS)
        assert pair_stats(a, b) == pair_stats(b, a)

    def test_jaccard_one_iff_equal(self):
        a = normalize_for_match("alpha beta gamma", STOPWORDS)
        b = normalize_for_match("alpha beta gamma delta", STOPWORDS)
        assert pair_stats(a, b)[1] < 1.0


class TestMatchFindings:
    def test_identical_sentences_match(self):
        text = "Graphic warning labels reduced the share of sugary drinks purchased."
        pairs = match_findings([news("n", text)], [abstract("a", text)])
        assert len(pairs) == 1
        assert pairs[0].jaccard == 1.0

    def test_disjoint_no_pair(self):
        pairs = match_findings([news("n", "Quiet ocean waves arrived.")],
                               [abstract("a", "Fiscal policy tightened rates.")])
        assert pairs == []

    def test_thresholds_strictness(self):
        # overlap uses >=, jaccard uses strict >
        n = news("n", "alpha beta gamma delta epsilon zeta eta theta iota kappa")
        a = abstract("a", "alpha beta gamma one two three four five six seven")
        pairs = match_findings([n], [a], min_overlap=3, min_jaccard=0.3)
        assert pairs == []  # jaccard = 3/17 < 0.3
        pairs = match_findings([n], [a], min_overlap=3, min_jaccard=0.17)
        assert len(pairs) == 1
        assert pairs[0].overlap == 3

    def test_monotone_in_thresholds(self):
        ns = [news(f"n{i}", r["news"]) for i, r in enumerate(ROWS)]
        abss = [abstract(f"a{i}", r["abstract"]) for i, r in enumerate(ROWS)]
        loose = match_findings(ns, abss, min_overlap=3, min_jaccard=0.3)
        tight_j = match_findings(ns, abss, min_overlap=3, min_jaccard=0.5)
        tight_o = match_findings(ns, abss, min_overlap=8, min_jaccard=0.3)
        loose_keys = {(p.news_finding_id, p.abstract_finding_id) for p in loose}
        assert {(p.news_finding_id, p.abstract_finding_id) for p in tight_j} <= loose_keys
        assert {(p.news_finding_id, p.abstract_finding_id) for p in tight_o} <= loose_keys

    def test_best_match_dedup(self):
        n = news("n", "Sleep improves memory consolidation in adults.")
        a1 = abstract("a1", "Sleep improves memory consolidation in adults.")
        a2 = abstract("a2", "Sleep improves memory consolidation.")
        pairs = match_findings([n], [a2, a1])
        assert len(pairs) == 1
        assert pairs[0].abstract_finding_id == "a1"

    def test_published_rows_within_tolerance(self):
        # paper-reported values only reproduce within the documented band:
        # the original stopword list/stemmer are unspecified upstream
        hits = 0
        for row in ROWS:
            a = normalize_for_match(row["news"], STOPWORDS)
            b = normalize_for_match(row["abstract"], STOPWORDS)
            ov, jac = pair_stats(a, b)
            if abs(jac - row["jaccard"]) <= 0.05 and abs(ov - row["overlap"]) <= 1:
                hits += 1
        assert hits >= 12, f"only {hits}/15 published rows within tolerance"

    def test_paris_row_detail(self):
        row = next(r for r in ROWS if "paris climate" in r["news"])
        a = normalize_for_match(row["news"], STOPWORDS)
        b = normalize_for_match(row["abstract"], STOPWORDS)
        ov, jac = pair_stats(a, b)
        assert jac == pytest.approx(0.92, abs=0.05)
        assert abs(ov - 11) <= 1
