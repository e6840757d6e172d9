"""Acceptance suite: one test per criterion, each printing a pass line with
the measured value. Run with `pytest tests/test_acceptance.py -v -s`.

Criteria 1-3 and 8 run on the shipped released dataset through the real
pipeline (extract -> aggregate -> split -> train -> evaluate); 4-5 check the
published appendix rows; 6 the sampler contract; 7 the oracle-equivalence
properties at their stated tolerances; 10 (primary side) the wire-protocol
client against the stub server.
"""

import json
import math
import random
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from scicert.analysis import (
    RQInputs,
    aspect_sentence_association,
    build_design,
    hedge_certainty_curve,
    marginal_effects,
    ols_fit,
    run_rq,
)
from scicert.corpus import (
    ScientificFinding,
    aggregate_annotations,
    ingest_corpus,
    preprocess_news,
    read_annotations,
)
from scicert.evalkit import (
    SplitSpec,
    binary_f1,
    evaluate_sentence,
    krippendorff_alpha,
    pearson_r,
    stratified_hedge_sample,
)
from scicert.extraction import extract_abstract_findings, extract_news_findings
from scicert.lexicon import count_hedges, load_hedges, load_report_verbs, load_stopwords
from scicert.matching import match_findings, normalize_for_match, pair_stats
from scicert.scoring import fit_bow, fit_hedge_model, score_external

ROOT = Path(__file__).resolve().parent.parent
RELEASED = ROOT / "data" / "released"
FIXTURES = Path(__file__).parent / "data"

pytestmark = pytest.mark.skipif(not RELEASED.exists(),
                                reason="released dataset not built")


def report(criterion, passed, detail):
    line = f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} ({detail})"
    print(line)
    assert passed, line


@pytest.fixture(scope="module")
def released():
    t0 = time.time()
    result = ingest_corpus(RELEASED / "news.jsonl", RELEASED / "papers.jsonl")
    assert not result.issues
    corpus, _ = preprocess_news(result.corpus)
    verbs = load_report_verbs()
    findings = []
    for paper in corpus.papers:
        findings.extend(extract_abstract_findings(paper))
    for article in corpus.articles:
        findings.extend(extract_news_findings(article, verbs))
    records = read_annotations(RELEASED / "annotations.jsonl")
    gold, _ = aggregate_annotations(records)
    sentence_gold = {fid: g.sentence_certainty for fid, g in gold.items()
                     if g.sentence_certainty is not None}
    aspect_gold = {fid: g.aspect_map for fid, g in gold.items() if g.aspects}
    split = SplitSpec.load(RELEASED / "split.json")
    return {
        "corpus": corpus,
        "findings": findings,
        "findings_by_id": {f.finding_id: f for f in findings},
        "records": records,
        "sentence_gold": sentence_gold,
        "aspect_gold": aspect_gold,
        "split": split,
        "load_seconds": time.time() - t0,
    }


@pytest.fixture(scope="module")
def bow_model(released):
    t0 = time.time()
    train_ids = set(released["split"].train)
    train = [f for f in released["findings"] if f.finding_id in train_ids]
    model = fit_bow(train, released["sentence_gold"], released["aspect_gold"])
    return model, time.time() - t0


def test_criterion_1_hedge_certainty_correlation(released):
    t0 = time.time()
    curve = hedge_certainty_curve(released["findings"],
                                  released["sentence_gold"], load_hedges())
    elapsed = released["load_seconds"] + (time.time() - t0)
    ok = 0.48 <= curve.pearson_r <= 0.62 and elapsed < 60
    report(1, ok, f"hedge-certainty r={curve.pearson_r:.3f} in [0.48, 0.62], "
                  f"{elapsed:.1f}s < 60s")


def test_criterion_2_bow_bands(released, bow_model):
    model, fit_seconds = bow_model
    t0 = time.time()
    ev = evaluate_sentence(model, released["split"], released["findings"],
                           released["sentence_gold"])
    elapsed = released["load_seconds"] + fit_seconds + (time.time() - t0)
    ok = ev.r_full_test >= 0.48 and ev.r_random_set >= 0.36 and elapsed < 600
    report(2, ok, f"BoW r_full={ev.r_full_test:.3f} >= 0.48, "
                  f"r_random={ev.r_random_set:.3f} >= 0.36, {elapsed:.1f}s < 600s")


def test_criterion_2_bow_golden_scores(released, bow_model):
    # frozen once from the trained model; training must reproduce them
    model, _ = bow_model
    golden = json.loads((FIXTURES / "bow_golden.json").read_text())
    for fid, expected in golden.items():
        got = model.score(released["findings_by_id"][fid]).sentence_certainty
        assert got == pytest.approx(expected, abs=1e-6), fid


def test_criterion_3_hedge_baseline(released):
    hedges = load_hedges()
    train_ids = set(released["split"].train)
    pairs = [(count_hedges(f.text, hedges), released["sentence_gold"][f.finding_id])
             for f in released["findings"]
             if f.finding_id in train_ids and f.finding_id in released["sentence_gold"]]
    model = fit_hedge_model(pairs, hedge_lexicon=hedges)
    ev = evaluate_sentence(model, released["split"], released["findings"],
                           released["sentence_gold"])
    ok = abs(ev.r_full_test) <= 0.10 and abs(ev.r_random_set) <= 0.10
    report(3, ok, f"hedge baseline |r_full|={abs(ev.r_full_test):.3f} <= 0.10, "
                  f"|r_random|={abs(ev.r_random_set):.3f} <= 0.10")


def test_criterion_4_matching_tolerance():
    rows = json.loads((FIXTURES / "matched_findings_rows.json").read_text())
    stopwords = load_stopwords()
    hits = 0
    for row in rows:
        news = normalize_for_match(row["news"], stopwords)
        abstract = normalize_for_match(row["abstract"], stopwords)
        overlap, jaccard = pair_stats(news, abstract)
        if abs(jaccard - row["jaccard"]) <= 0.05 and abs(overlap - row["overlap"]) <= 1:
            hits += 1
    report(4, hits >= 12, f"matched-row reproduction {hits}/15 >= 12")


def test_criterion_5_extraction_goldens():
    rows = json.loads((FIXTURES / "extracted_findings_rows.json").read_text())
    verbs = load_report_verbs()
    hits = 0
    for i, row in enumerate(rows):
        if row["source"] == "abstract":
            from scicert.corpus import PaperMeta
            paper = PaperMeta(doi=f"10.0/g{i}", journal_impact_factor=1.0,
                              num_authors=1, field="x", author_rank=1.0,
                              affiliation_rank=1.0,
                              abstract_sentences=((row["original"], "result"),))
            findings = extract_abstract_findings(paper)
        else:
            from scicert.corpus import NewsArticle
            article = NewsArticle.from_dict({
                "article_id": f"g{i}", "outlet": "x", "body": row["original"],
                "linked_dois": ["10.0/x"]})
            findings = extract_news_findings(article, verbs)
        if (len(findings) == 1
                and findings[0].text.lower() == row["finding"].lower()
                and (row["keyword"] is None
                     or findings[0].extraction_keyword == row["keyword"])):
            hits += 1
    report(5, hits >= 9, f"extraction goldens {hits}/10 >= 9")


def test_criterion_6_sampler(released):
    sample = stratified_hedge_sample(released["findings"], 1000, seed=13,
                                     hedge_lexicon=load_hedges())
    ok = sample.stratum_counts == (500, 350, 150)
    report(6, ok, f"n=1000 strata {sample.stratum_counts} == (500, 350, 150)")


def test_criterion_7_oracle_equivalence():
    t0 = time.time()
    rng = random.Random(404)
    nprng = np.random.default_rng(404)

    # pearson vs direct-formula oracle, 1e-12
    worst_p = 0.0
    for _ in range(100):
        n = rng.randint(3, 50)
        xs = [rng.uniform(-10, 10) for _ in range(n)]
        ys = [rng.uniform(-10, 10) for _ in range(n)]
        sx, sy = sum(xs), sum(ys)
        num = n * sum(x * y for x, y in zip(xs, ys)) - sx * sy
        den = math.sqrt(n * sum(x * x for x in xs) - sx * sx) \
            * math.sqrt(n * sum(y * y for y in ys) - sy * sy)
        worst_p = max(worst_p, abs(pearson_r(xs, ys) - num / den))
    assert worst_p < 1e-12

    # OLS vs normal equations, 1e-8
    X = nprng.normal(size=(60, 4))
    y = nprng.normal(size=60)
    rows = [{f"x{j}": X[i, j] for j in range(4)} for i in range(60)]
    design = build_design(rows, [f"x{j}" for j in range(4)], [])
    result = ols_fit(design, y)
    beta = np.linalg.solve(design.matrix.T @ design.matrix, design.matrix.T @ y)
    worst_ols = max(abs(t.coef - b) for t, b in zip(result.terms, beta))
    assert worst_ols < 1e-8

    # F1 vs brute-force confusion counts, exact
    from fractions import Fraction
    for _ in range(60):
        n = rng.randint(1, 40)
        gold = [rng.choice("abc") for _ in range(n)]
        pred = [rng.choice("abc") for _ in range(n)]
        for pos in "abc":
            tp = sum(g == pos and p == pos for g, p in zip(gold, pred))
            fp = sum(g != pos and p == pos for g, p in zip(gold, pred))
            fn = sum(g == pos and p != pos for g, p in zip(gold, pred))
            expected = (float(Fraction(2 * tp, 2 * tp + fp + fn))
                        if 2 * tp + fp + fn else 0.0)
            assert binary_f1(gold, pred, pos) == expected

    # Krippendorff vs hand-worked coincidence-matrix cases, 1e-10
    hand = krippendorff_alpha(
        {"1": ["a", "a"], "2": ["a", "b"], "3": ["b", "b"], "4": ["b", "a"]},
        "nominal")
    assert abs(hand - 0.125) < 1e-10
    assert abs(krippendorff_alpha({"1": [1, 1], "2": [6, 6]}, "interval") - 1.0) < 1e-10
    assert abs(krippendorff_alpha({"1": [1, 6], "2": [6, 1]}, "interval") - (-0.5)) < 1e-10

    # marginal effects vs counterfactual brute force, 1e-8
    g = [("u", "v", "w")[i % 3] for i in range(30)]
    x = nprng.normal(size=30)
    y2 = nprng.normal(size=30)
    rows = [{"g": g[i], "x": x[i]} for i in range(30)]
    design = build_design(rows, ["x"], ["g"])
    result = ols_fit(design, y2)
    worst_m = 0.0
    for level in ("u", "v", "w"):
        preds = []
        for r in rows:
            vec = [1.0, r["x"]]
            for col in design.columns[2:]:
                vec.append(1.0 if col == f"g={level}" else 0.0)
            preds.append(float(np.dot(vec, result.beta)))
        margin = [m for m in marginal_effects(result, "g") if m.level == level][0]
        worst_m = max(worst_m, abs(margin.margin - float(np.mean(preds))))
    assert worst_m < 1e-8

    elapsed = time.time() - t0
    ok = elapsed < 120
    report(7, ok, f"oracles: pearson<{worst_p:.1e}, ols<{worst_ols:.1e}, "
                  f"f1 exact, alpha hand cases, margins<{worst_m:.1e}, "
                  f"{elapsed:.1f}s < 120s")


def test_criterion_8_rq_signs(released, bow_model):
    model, _ = bow_model
    scores = {f.finding_id: model.score(f) for f in released["findings"]}
    stopwords = load_stopwords()
    abstract_by_doi, news_by_article = {}, {}
    for f in released["findings"]:
        if f.source == "abstract":
            abstract_by_doi.setdefault(f.origin_doi, []).append(f)
        else:
            news_by_article.setdefault(f.origin_article_id, []).append(f)
    pairs = []
    for article_id in sorted(news_by_article):
        nf = news_by_article[article_id]
        pairs.extend(match_findings(nf, abstract_by_doi.get(nf[0].origin_doi, []),
                                    stopwords=stopwords))
    inputs = RQInputs(
        findings_by_id=released["findings_by_id"],
        scores_by_id=scores,
        papers_by_doi=released["corpus"].paper_by_doi,
        articles_by_id=released["corpus"].article_by_id,
        pairs=tuple(pairs),
    )
    rq1 = run_rq("rq1", inputs).results[0]
    stat = rq1.coef("source=news")

    assoc = aspect_sentence_association(released["sentence_gold"],
                                        released["aspect_gold"])
    certain = next(c for c in assoc.cells
                   if c.aspect == "probability" and c.label == "certain")
    uncertain = next(c for c in assoc.cells
                     if c.aspect == "probability" and c.label == "uncertain")
    ok = (stat.coef < 0 and stat.p < 0.01
          and uncertain.mean_certainty < certain.mean_certainty)
    report(8, ok, f"rq1 source=news coef={stat.coef:.3f} < 0 at p={stat.p:.1e} < 0.01; "
                  f"fig3 P(uncertain) mean {uncertain.mean_certainty:.2f} < "
                  f"P(certain) mean {certain.mean_certainty:.2f}")


def test_criterion_10_wire_protocol_stub():
    findings = [
        ScientificFinding(
            finding_id=f"wp{i:04d}",
            text=f"The treatment {'may ' if i % 3 else ''}reduced outcome "
                 f"measure {i} in the trial.",
            source="news", origin_doi="10.0/x", origin_article_id="a",
            extraction_keyword="found")
        for i in range(1000)
    ]
    stub = [sys.executable, "-m", "scicert.stub_scorer", "--transport", "stdio"]
    scores = score_external(findings, command=stub, timeout=120,
                            max_in_flight=64)
    ids = [s.finding_id for s in scores]
    ok = (ids == [f.finding_id for f in findings]
          and len(set(ids)) == 1000
          and all(1.0 <= s.sentence_certainty <= 6.0 for s in scores))
    report("10-primary", ok,
           "1000-request stub replay: zero dropped/duplicated ids, "
           "all schemas valid")
