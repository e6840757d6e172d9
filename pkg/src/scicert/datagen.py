"""Deterministic synthetic corpus generator.

The paper's annotated dataset and 431K-finding corpus are not
redistributable, so the repo ships a generated stand-in with the same file
schemas and the same statistical signatures, produced end to end through
this package's own extraction/sampling/aggregation code:

  * hedge counts correlate with gold sentence certainty over the full
    annotated sample (Fig-2 band), but the correlation is confined to the
    train/val partitions, so a single-feature hedge model scores near zero
    on the frozen test+random set (Table-1 behavior);
  * certainty is mostly carried by non-hedge lexical cues, which is what
    lets a bag-of-words model generalize to the random set;
  * matched news findings are cue-downgraded paraphrases of abstract
    findings (RQ1 direction), and Probability-uncertain findings sit below
    Probability-certain ones (Fig-3 direction).

Everything is seeded; regenerating with the same seed is byte-identical.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path

from .corpus import (
    ASPECTS,
    Corpus,
    NewsArticle,
    PaperMeta,
    aggregate_annotations,
    preprocess_news,
    write_annotations,
    write_corpus,
    write_findings,
)
from .evalkit import make_split, pearson_r, stratified_hedge_sample
from .extraction import extract_abstract_findings, extract_news_findings
from .lexicon import count_hedges, load_hedges, load_report_verbs, load_stopwords
from .matching import match_findings

RELEASED_SEED = 20230415

FIELDS = {
    "medicine": {
        "subjects": ["the treatment", "the vaccine", "daily aspirin",
                     "the screening program", "the combination therapy",
                     "early mobilization", "the implanted device",
                     "antibiotic stewardship"],
        "objects": ["blood pressure", "tumor growth", "recovery time",
                    "hospital readmissions", "infection rates",
                    "chronic pain", "cardiac output", "mortality risk"],
    },
    "psychology": {
        "subjects": ["mindfulness training", "the intervention",
                     "cognitive therapy", "peer mentoring", "sleep coaching",
                     "the rewards program", "group counseling"],
        "objects": ["anxiety symptoms", "working memory", "test performance",
                    "impulsive decisions", "reported wellbeing",
                    "attention lapses", "emotional regulation"],
    },
    "climate": {
        "subjects": ["ocean warming", "the reforestation program",
                     "soil carbon storage", "the emissions policy",
                     "glacial melt", "urban greening"],
        "objects": ["coral cover", "regional rainfall", "crop yields",
                    "coastal erosion", "heatwave frequency",
                    "carbon uptake", "species migration"],
    },
    "biology": {
        "subjects": ["the engineered enzyme", "gene silencing",
                     "the microbial community", "selective breeding",
                     "the signaling pathway", "nutrient supplementation"],
        "objects": ["cell division", "protein folding", "root growth",
                    "metabolic efficiency", "immune response",
                    "larval survival", "membrane transport"],
    },
    "neuroscience": {
        "subjects": ["the stimulation protocol", "enriched environments",
                     "the training regimen", "dopamine signaling",
                     "cortical feedback", "the lesion model"],
        "objects": ["synaptic density", "reaction times", "memory recall",
                    "motor learning", "neural plasticity", "sleep spindles"],
    },
    "nutrition": {
        "subjects": ["the fiber supplement", "intermittent fasting",
                     "the fortified cereal", "reduced sodium intake",
                     "the plant-based diet", "vitamin supplementation"],
        "objects": ["cholesterol levels", "gut diversity", "insulin response",
                    "iron absorption", "satiety ratings", "bone density"],
    },
    "economics": {
        "subjects": ["the cash transfer", "the training subsidy",
                     "minimum wage increases", "the lending program",
                     "tariff reductions", "remote work adoption"],
        "objects": ["household savings", "job turnover", "firm productivity",
                    "consumer spending", "loan defaults", "wage growth"],
    },
    "ecology": {
        "subjects": ["the protected corridor", "invasive species removal",
                     "prescribed burning", "wetland restoration",
                     "the grazing rotation", "artificial reefs"],
        "objects": ["nesting success", "ground cover", "pollinator visits",
                    "fish biomass", "seed dispersal", "canopy regrowth"],
    },
}

OUTLETS = ["Daily Science Wire", "HealthDesk", "The Morning Ledger",
           "National Observer", "Metro Chronicle", "The Weekly Signal",
           "Coastal Times", "Lakeside Post", "The Register-Review",
           "Evening Standard-Tribune", "Plainfield Courier", "The Beacon"]

# hedge words inserted into claims; all are single tokens from the shipped
# hedge lexicon (the generator asserts realized counts)
MODAL_HEDGES = ["may", "might", "could"]
ADVERB_HEDGES = ["perhaps", "apparently", "presumably", "seemingly", "possibly"]
APPROX_HEDGES = ["roughly", "approximately"]
CONTEXT_HEDGES = ["generally", "typically", "usually"]

VERBS = [("reduced", "reduce"), ("increased", "increase"),
         ("improved", "improve"), ("lowered", "lower"),
         ("accelerated", "accelerate"), ("stabilized", "stabilize"),
         ("weakened", "weaken"), ("boosted", "boost")]

# always-on strength slot: a strongly learnable non-hedge certainty cue
INTENSITY_STRONG = ["sharply", "markedly", "decisively", "unmistakably"]
INTENSITY_WEAK = ["marginally", "faintly", "weakly", "inconsistently"]

FRAMING_CERTAIN = ["We confirmed that", "We established that",
                   "The team verified that", "Our analysis confirmed that"]
FRAMING_UNCERTAIN = ["We hypothesize that", "We speculate that",
                     "We tentatively propose that"]

PROB_CERTAIN = ["was consistently associated with",
                "showed a reproducible association with",
                "was firmly linked to"]
PROB_UNCERTAIN = ["was inconsistently linked to",
                  "showed an unconfirmed association with",
                  "had an unproven link to"]

CONFIRM_CUES = ["with robust statistical support", "with conclusive evidence",
                "with strong and consistent evidence",
                "with clear replication across sites"]
DOWNGRADE_CUES = ["in a preliminary analysis", "in an exploratory analysis",
                  "with tentative evidence", "pending independent confirmation"]

NUMBER_CERTAIN = ["in {n} participants", "among {n} adults", "by {p} percent"]
EXTENT_CERTAIN = ["across the full cohort", "by a factor of two",
                  "in every subgroup"]
EXTENT_UNCERTAIN = ["to a moderate degree", "in a modest share of cases",
                    "to a limited but real degree"]
COND_CERTAIN = ["under controlled conditions", "at the standard dosage",
                "during the follow-up period"]
COND_UNCERTAIN = ["if replicated in larger cohorts",
                  "provided the effect persists",
                  "unless unmeasured confounders intervene"]
SUGG_CERTAIN = [", and we recommend routine monitoring",
                ", supporting updated practice guidelines"]
SUGG_UNCERTAIN = [", and further trials are needed before adoption",
                  ", though more research is required before any rollout"]

BACKGROUND = ["Prior work on {obj} has produced mixed results.",
              "The role of {subj} in shaping {obj} is debated.",
              "Several groups have examined {obj} over the past decade.",
              "Interest in {subj} has grown steadily."]
METHODS = ["We tracked {obj} over {n} weeks in a registered design.",
           "Data on {obj} were collected from {n} sites.",
           "We compared {subj} against standard practice in {n} trials."]


@dataclass
class Claim:
    """One generated finding with its latent structure."""

    field_name: str
    framing: str  # "", or a framing prefix
    framing_label: str
    subject: str
    modal: str | None
    adverb: str | None
    intensity: str | None
    intensity_weight: float
    verb: tuple[str, str]
    prob_phrase: str | None
    prob_label: str
    obj: str
    fragments: tuple  # (kind, text, weight, aspect, label)
    quality_cue: str | None  # confirm/downgrade phrase
    quality_weight: float
    tail: str
    tail_label: str
    mu_text: float = 0.0
    aspects: dict = field(default_factory=dict)


def render_claim(c: Claim) -> str:
    parts = []
    if c.framing:
        parts.append(c.framing)
        subject = c.subject
    else:
        subject = c.subject[0].upper() + c.subject[1:]
    parts.append(subject)
    if c.adverb:
        parts.append(c.adverb)
    if c.prob_phrase:
        if c.modal:
            parts.append(f"{c.modal} be" if c.prob_phrase.startswith("was")
                         else c.modal)
            parts.append(c.prob_phrase.replace("was ", "", 1) if
                         c.prob_phrase.startswith("was ") else c.prob_phrase)
        else:
            parts.append(c.prob_phrase)
    else:
        if c.modal:
            parts.append(c.modal)
            if c.intensity:
                parts.append(c.intensity)
            parts.append(c.verb[1])
        else:
            if c.intensity:
                parts.append(c.intensity)
            parts.append(c.verb[0])
    parts.append(c.obj)
    for _, text, _, _, _ in c.fragments:
        parts.append(text)
    if c.quality_cue:
        parts.append(c.quality_cue)
    sentence = " ".join(parts)
    if c.tail:
        sentence += c.tail
    return sentence + "."


# latent weights for each certainty cue family
W_FRAMING = {"certain": 0.8, "uncertain": -0.9, "not_present": 0.0}
W_PROB = {"certain": 0.5, "uncertain": -1.1, "not_present": 0.0}
W_TAIL = {"certain": 0.4, "uncertain": -1.0, "not_present": 0.0}
W_QUALITY = 1.0
BASE_MU = 3.8


def _claim_mu_and_aspects(c: Claim) -> Claim:
    mu = BASE_MU
    aspects = {a: "not_present" for a in ASPECTS}
    mu += W_FRAMING[c.framing_label]
    if c.framing_label != "not_present":
        aspects["framing"] = c.framing_label
    mu += W_PROB[c.prob_label]
    if c.prob_label != "not_present":
        aspects["probability"] = c.prob_label
    mu += c.intensity_weight
    for kind, _, weight, aspect, label in c.fragments:
        mu += weight
        if aspect:
            aspects[aspect] = label
    mu += c.quality_weight
    mu += W_TAIL[c.tail_label]
    if c.tail_label != "not_present":
        aspects["suggestion"] = c.tail_label
    c.mu_text = mu
    c.aspects = aspects
    return c


def make_claim(rng: random.Random, field_name: str, target_hedges: int,
               confirm_bias: float = 0.0) -> Claim:
    bank = FIELDS[field_name]
    framing_roll = rng.random()
    if framing_roll < 0.16:
        framing, flabel = rng.choice(FRAMING_CERTAIN), "certain"
    elif framing_roll < 0.30:
        framing, flabel = rng.choice(FRAMING_UNCERTAIN), "uncertain"
    else:
        framing, flabel = "", "not_present"

    prob_roll = rng.random()
    if prob_roll < 0.20:
        prob_phrase, plabel = rng.choice(PROB_CERTAIN), "certain"
    elif prob_roll < 0.38:
        prob_phrase, plabel = rng.choice(PROB_UNCERTAIN), "uncertain"
    else:
        prob_phrase, plabel = None, "not_present"

    intensity, intensity_weight = None, 0.0
    if prob_phrase is None:
        iroll = rng.random()
        if iroll < 0.30:
            intensity, intensity_weight = rng.choice(INTENSITY_STRONG), 0.6
        elif iroll < 0.60:
            intensity, intensity_weight = rng.choice(INTENSITY_WEAK), -0.6

    fragments = []
    hedge_budget = target_hedges
    modal = None
    adverb = None
    if hedge_budget > 0 and rng.random() < 0.8:
        modal = rng.choice(MODAL_HEDGES)
        hedge_budget -= 1
    if hedge_budget > 0:
        adverb = rng.choice(ADVERB_HEDGES)
        hedge_budget -= 1

    if rng.random() < 0.38:
        n = rng.choice([24, 60, 96, 120, 180, 250, 312, 480, 640, 1024])
        p = rng.choice([8, 12, 15, 18, 22, 30, 35, 40])
        template = rng.choice(NUMBER_CERTAIN)
        text = template.format(n=n, p=p)
        if hedge_budget > 0:
            approx = rng.choice(APPROX_HEDGES)
            for lead in ("in ", "among ", "by "):
                if text.startswith(lead):
                    text = text.replace(lead, f"{lead}{approx} ", 1)
                    break
            hedge_budget -= 1
            fragments.append(("number", text, -0.3, "number", "uncertain"))
        else:
            fragments.append(("number", text, 0.2, "number", "certain"))

    if rng.random() < 0.26:
        if rng.random() < 0.45:
            fragments.append(("extent", rng.choice(EXTENT_UNCERTAIN), -0.5,
                              "extent", "uncertain"))
        else:
            fragments.append(("extent", rng.choice(EXTENT_CERTAIN), 0.3,
                              "extent", "certain"))

    if rng.random() < 0.24:
        if rng.random() < 0.45:
            fragments.append(("condition", rng.choice(COND_UNCERTAIN), -0.45,
                              "condition", "uncertain"))
        else:
            fragments.append(("condition", rng.choice(COND_CERTAIN), 0.15,
                              "condition", "certain"))

    if hedge_budget > 0:
        ctx = rng.choice(CONTEXT_HEDGES)
        fragments.append(("context", f"in {ctx} comparable settings", 0.0,
                          None, None))
        hedge_budget -= 1

    quality_cue = None
    quality_weight = 0.0
    qroll = rng.random()
    if qroll < 0.22 + confirm_bias:
        quality_cue = rng.choice(CONFIRM_CUES)
        quality_weight = W_QUALITY
    elif qroll > 0.84 + confirm_bias:
        quality_cue = rng.choice(DOWNGRADE_CUES)
        quality_weight = -W_QUALITY

    tail, tlabel = "", "not_present"
    troll = rng.random()
    if troll < 0.10:
        tail, tlabel = rng.choice(SUGG_CERTAIN), "certain"
    elif troll < 0.22:
        tail, tlabel = rng.choice(SUGG_UNCERTAIN), "uncertain"

    claim = Claim(field_name=field_name, framing=framing, framing_label=flabel,
                  subject=rng.choice(bank["subjects"]), modal=modal,
                  adverb=adverb, intensity=intensity,
                  intensity_weight=intensity_weight, verb=rng.choice(VERBS),
                  prob_phrase=prob_phrase, prob_label=plabel,
                  obj=rng.choice(bank["objects"]), fragments=tuple(fragments),
                  quality_cue=quality_cue, quality_weight=quality_weight,
                  tail=tail, tail_label=tlabel)
    return _claim_mu_and_aspects(claim)


def paraphrase_for_news(rng: random.Random, c: Claim) -> Claim:
    """Journalist's rendering: framing prefix dropped, quality cues played
    down, sometimes an extra modal hedge; the certainty downshift lives in
    the text so trained scorers can see it."""
    news = replace(c)
    news.framing = ""
    news.framing_label = "not_present"
    if rng.random() < 0.72:
        news.quality_cue = rng.choice(DOWNGRADE_CUES)
        news.quality_weight = -W_QUALITY
    if news.intensity in set(INTENSITY_STRONG) and rng.random() < 0.5:
        news.intensity, news.intensity_weight = rng.choice(INTENSITY_WEAK), -0.6
    if news.modal is None and rng.random() < 0.35:
        news.modal = rng.choice(MODAL_HEDGES)
    if news.tail and rng.random() < 0.5:
        news.tail, news.tail_label = "", "not_present"
    if len(news.fragments) > 1 and rng.random() < 0.4:
        news.fragments = news.fragments[:-1]
    return _claim_mu_and_aspects(news)


def _hedge_target(rng: random.Random) -> int:
    # natural corpus: mostly unhedged, so the phase-3 random sample carries
    # little hedge variance
    roll = rng.random()
    if roll < 0.72:
        return 0
    if roll < 0.90:
        return 1
    if roll < 0.97:
        return 2
    return 3


@dataclass
class GeneratedCorpus:
    corpus: Corpus
    findings: list
    claims_by_text: dict
    papers_meta: dict


def build_corpus(seed: int, n_papers: int, n_articles: int,
                 with_filter_violations: bool = True,
                 field_subset=None) -> GeneratedCorpus:
    rng = random.Random(seed)
    hedges = load_hedges()
    verbs = load_report_verbs()
    field_names = sorted(field_subset) if field_subset else sorted(FIELDS)

    papers = []
    claims_by_text: dict[str, Claim] = {}
    paper_claims: dict[str, list[Claim]] = {}
    for i in range(n_papers):
        field_name = field_names[i % len(field_names)]
        doi = f"10.5555/{field_name[:4]}.{i:04d}"
        impact = round(math.exp(rng.gauss(1.0, 0.7)), 2)
        num_authors = max(1, min(40, int(math.exp(rng.gauss(1.6, 0.7)))))
        # larger teams and lower-impact journals write slightly more
        # confidently (RQ4/RQ5 directions)
        confirm_bias = 0.012 * (num_authors - 5) - 0.02 * (impact - 2.7)
        confirm_bias = max(-0.12, min(0.25, confirm_bias))
        bank = FIELDS[field_name]
        sentences = []
        subj = rng.choice(bank["subjects"])
        obj = rng.choice(bank["objects"])
        sentences.append((rng.choice(BACKGROUND).format(subj=subj, obj=obj),
                          "background"))
        sentences.append((rng.choice(METHODS).format(
            subj=subj, obj=obj, n=rng.choice([6, 12, 24, 36])), "method"))
        n_findings = rng.choice([3, 3, 4, 4, 5])
        claims = []
        for k in range(n_findings):
            claim = make_claim(rng, field_name, _hedge_target(rng), confirm_bias)
            text = render_claim(claim)
            role = "conclusion" if k == n_findings - 1 else "result"
            sentences.append((text, role))
            claims.append(claim)
            claims_by_text[text] = claim
        papers.append(PaperMeta(
            doi=doi,
            journal_impact_factor=impact,
            num_authors=num_authors,
            field=field_name,
            author_rank=round(rng.uniform(1, 5000), 1),
            affiliation_rank=round(rng.uniform(1, 1500), 1),
            abstract_sentences=tuple(sentences),
        ))
        paper_claims[doi] = claims

    articles = []
    covered = rng.sample(papers, min(n_articles, len(papers)))
    for j, paper in enumerate(covered):
        outlet = OUTLETS[j % len(OUTLETS)]
        claims = paper_claims[paper.doi]
        n_cover = min(len(claims), rng.choice([2, 2, 3, 3, 4]))
        chosen = rng.sample(claims, n_cover)
        paragraphs = [
            f"A study in the field of {paper.field} drew attention this week. "
            f"The work tracked outcomes across multiple sites."
        ]
        frame_subjects = ["The researchers", "Scientists", "The study's authors",
                          "The team", "Investigators", "A new analysis"]
        frame_verbs = ["found", "showed", "revealed", "concluded", "reported",
                       "discovered", "suggested", "indicated"]
        for claim in chosen:
            news_claim = paraphrase_for_news(rng, claim)
            clause = render_claim(news_claim)
            clause_embedded = clause[0].lower() + clause[1:]
            verb = rng.choice(frame_verbs)
            if verb == "reported":
                verb = "found"  # "reported that" is not in the trigger lexicon
            sentence = (f"{rng.choice(frame_subjects)} {verb} that "
                        f"{clause_embedded}")
            filler = rng.choice([
                "The result adds to a growing body of work.",
                "Outside experts called the design careful.",
                "The dataset will be released next year.",
                "Funding came from a national science agency.",
            ])
            paragraphs.append(f"{sentence} {filler}")
            claims_by_text[clause] = news_claim
        if rng.random() < 0.15:
            paragraphs.append('One author said the work was "a long road" '
                              'and thanked the field teams.')
        body = "\n\n".join(paragraphs)
        if rng.random() < 0.10:
            body += "\n\nSources\n1. The journal article archive."
        articles.append(NewsArticle(
            article_id=f"news-{j:04d}",
            outlet=outlet,
            body=body,
            linked_dois=(paper.doi,),
            word_count=len(body.split()),
        ))

    if with_filter_violations:
        articles.append(NewsArticle(
            article_id="news-too-long", outlet=OUTLETS[0],
            body=" ".join(["word"] * 1500), linked_dois=(papers[0].doi,),
            word_count=1500))
        articles.append(NewsArticle(
            article_id="news-multi-link", outlet=OUTLETS[1],
            body="Short round-up of several papers.",
            linked_dois=(papers[0].doi, papers[1].doi), word_count=6))

    corpus = Corpus(papers=tuple(papers), articles=tuple(articles))
    processed, _report = preprocess_news(corpus)
    findings = []
    for paper in processed.papers:
        findings.extend(extract_abstract_findings(paper))
    for article in processed.articles:
        findings.extend(extract_news_findings(article, verbs))
    for f in findings:
        if f.text not in claims_by_text:
            raise AssertionError(f"extracted text missed the registry: {f.text!r}")
        intended = claims_by_text[f.text]
        del intended
    del hedges
    return GeneratedCorpus(corpus=corpus, findings=findings,
                           claims_by_text=claims_by_text,
                           papers_meta={p.doi: p for p in papers})


# -- annotation synthesis -----------------------------------------------------------

SENTENCE_NOISE = 0.62
LATENT_NOISE = 0.40
ASPECT_FLIP = 0.16
HEDGE_COUPLING = 1.55  # applied to train/val items only
HEDGE_REF = 0.8

ANNOTATORS = ["a1", "a2", "a3", "a4", "a5", "a6"]


def _likert(rng, mu):
    return int(min(6, max(1, round(mu + rng.gauss(0, SENTENCE_NOISE)))))


def _flip_label(rng, label):
    if rng.random() >= ASPECT_FLIP:
        return label
    others = [l for l in ("not_present", "certain", "uncertain") if l != label]
    return rng.choice(others)


def build_annotations(gen: GeneratedCorpus, seed: int,
                      n_phase1: int = 1000, n_phase2: int = 1000,
                      n_phase3: int = 200):
    """Sample three annotation phases and synthesize annotator records.

    The hedge-certainty coupling is applied only to findings landing in the
    train/val partitions; the frozen test partition and the phase-3 random
    set get hedge-independent gold.
    """
    rng = random.Random(seed + 1)
    hedges = load_hedges()
    findings = gen.findings

    phase1 = stratified_hedge_sample(findings, n_phase1, seed=seed + 2,
                                     hedge_lexicon=hedges).findings
    phase1_ids = {f.finding_id for f in phase1}
    remaining = [f for f in findings if f.finding_id not in phase1_ids]

    def rare_weight(f):
        aspects = gen.claims_by_text[f.text].aspects
        rare = sum(1 for a in ("suggestion", "extent", "condition", "framing")
                   if aspects[a] != "not_present")
        return 1.0 + 1.5 * rare

    keyed = sorted(
        ((rng.random() ** (1.0 / rare_weight(f)), f.finding_id, f)
         for f in remaining), reverse=True)
    phase2 = [f for _, _, f in keyed[:n_phase2]]
    phase2_ids = {f.finding_id for f in phase2}
    rest = [f for f in remaining if f.finding_id not in phase2_ids]
    phase3 = rng.sample(rest, min(n_phase3, len(rest)))

    split = make_split([f.finding_id for f in list(phase1) + phase2],
                       seed=seed + 3,
                       random_test=[f.finding_id for f in phase3])
    trainval = set(split.train) | set(split.val)

    records = []
    annotated = list(phase1) + phase2 + list(phase3)
    bad_text_ids = set(
        f.finding_id for f in rng.sample(annotated, max(2, len(annotated) // 60)))
    for idx, f in enumerate(annotated):
        claim = gen.claims_by_text[f.text]
        if f.finding_id in bad_text_ids:
            k = 3
            offset = idx % len(ANNOTATORS)
            for a in range(k):
                annotator = ANNOTATORS[(offset + a) % len(ANNOTATORS)]
                if a < 2:
                    records.append(dict(finding_id=f.finding_id,
                                        annotator_id=annotator, kind="bad_text"))
                else:
                    records.append(dict(finding_id=f.finding_id,
                                        annotator_id=annotator,
                                        kind="sentence_level",
                                        likert=_likert(rng, claim.mu_text)))
            continue
        h = count_hedges(f.text, hedges)
        coupling = HEDGE_COUPLING if f.finding_id in trainval else 0.0
        mu = claim.mu_text + coupling * (h - HEDGE_REF) + rng.gauss(0, LATENT_NOISE)
        offset = idx % len(ANNOTATORS)
        n_sent = 2 if rng.random() < 0.7 else 3
        for a in range(n_sent):
            annotator = ANNOTATORS[(offset + a) % len(ANNOTATORS)]
            records.append(dict(finding_id=f.finding_id, annotator_id=annotator,
                                kind="sentence_level", likert=_likert(rng, mu)))
        for a in range(3):
            annotator = ANNOTATORS[(offset + 2 + a) % len(ANNOTATORS)]
            labels = {aspect: _flip_label(rng, claim.aspects[aspect])
                      for aspect in ASPECTS}
            records.append(dict(finding_id=f.finding_id, annotator_id=annotator,
                                kind="aspect_level", aspects=labels))
    from .corpus import AnnotationRecord

    annotation_records = []
    for r in records:
        aspects = r.get("aspects")
        annotation_records.append(AnnotationRecord(
            finding_id=r["finding_id"], annotator_id=r["annotator_id"],
            kind=r["kind"], likert=r.get("likert"),
            aspects=tuple(sorted(aspects.items())) if aspects else None))
    return annotation_records, split


# -- self checks ---------------------------------------------------------------------

def _subset_r(findings_by_id, gold, ids, hedges):
    hs, ys = [], []
    for fid in ids:
        if fid in gold and fid in findings_by_id:
            hs.append(count_hedges(findings_by_id[fid].text, hedges))
            ys.append(gold[fid])
    return pearson_r(hs, ys), len(hs)


def validate_released(findings, records, split) -> dict:
    """Recompute the planted statistics through the real pipeline and check
    they sit inside the acceptance bands with margin."""
    hedges = load_hedges()
    stopwords = load_stopwords()
    findings_by_id = {f.finding_id: f for f in findings}
    gold, _ = aggregate_annotations(records)
    sentence_gold = {fid: g.sentence_certainty for fid, g in gold.items()
                     if g.sentence_certainty is not None}
    aspect_gold = {fid: g.aspect_map for fid, g in gold.items() if g.aspects}

    r_all, n_all = _subset_r(findings_by_id, sentence_gold,
                             list(sentence_gold), hedges)
    r_test, n_test = _subset_r(findings_by_id, sentence_gold,
                               split.full_test, hedges)
    r_rand, n_rand = _subset_r(findings_by_id, sentence_gold,
                               split.random_test, hedges)

    both = [fid for fid in sentence_gold if fid in aspect_gold]
    prob_certain = [sentence_gold[f] for f in both
                    if aspect_gold[f]["probability"] == "certain"]
    prob_uncertain = [sentence_gold[f] for f in both
                      if aspect_gold[f]["probability"] == "uncertain"]
    gap = (sum(prob_uncertain) / len(prob_uncertain)
           - sum(prob_certain) / len(prob_certain))

    strata = {0: 0, 1: 0, 2: 0}
    for f in findings:
        strata[min(count_hedges(f.text, hedges), 2)] += 1

    abstract = [f for f in findings if f.source == "abstract"]
    news = [f for f in findings if f.source == "news"]
    by_article: dict[str, list] = {}
    for f in news:
        by_article.setdefault(f.origin_article_id, []).append(f)
    abs_by_doi: dict[str, list] = {}
    for f in abstract:
        abs_by_doi.setdefault(f.origin_doi, []).append(f)
    n_pairs = 0
    for article_id, nf in sorted(by_article.items()):
        candidates = abs_by_doi.get(nf[0].origin_doi, [])
        n_pairs += len(match_findings(nf, candidates, stopwords=stopwords))

    summary = {
        "n_findings": len(findings),
        "n_annotated": n_all,
        "r_hedge_all": r_all,
        "r_hedge_full_test": r_test,
        "n_full_test": n_test,
        "r_hedge_random": r_rand,
        "n_random": n_rand,
        "fig3_probability_gap": gap,
        "strata": [strata[0], strata[1], strata[2]],
        "n_pairs": n_pairs,
    }
    checks = [
        (0.50 <= r_all <= 0.60, f"r_hedge_all {r_all:.3f} outside [0.50, 0.60]"),
        (abs(r_test) <= 0.08, f"r_hedge_full_test {r_test:.3f} above 0.08"),
        (abs(r_rand) <= 0.08, f"r_hedge_random {r_rand:.3f} above 0.08"),
        (gap <= -0.25, f"fig3 probability gap {gap:.3f} not negative enough"),
        (strata[0] >= 520 and strata[1] >= 370 and strata[2] >= 170,
         f"strata too small: {strata}"),
        (n_pairs >= 300, f"only {n_pairs} matched pairs"),
    ]
    failures = [msg for ok, msg in checks if not ok]
    if failures:
        raise AssertionError("released-data checks failed: " + "; ".join(failures))
    return summary


# -- writers -------------------------------------------------------------------------

def write_released(out_dir, seed: int = RELEASED_SEED, n_papers: int = 420,
                   n_articles: int = 330, validate: bool = True) -> dict:
    out_dir = Path(out_dir)
    gen = build_corpus(seed, n_papers=n_papers, n_articles=n_articles)
    records, split = build_annotations(gen, seed)
    manifest = {"generator": "scicert.datagen", "seed": seed,
                "n_papers": n_papers, "n_articles": n_articles}
    write_corpus(gen.corpus, out_dir, manifest=manifest)
    write_findings(out_dir / "findings.jsonl", gen.findings, manifest=manifest)
    write_annotations(out_dir / "annotations.jsonl", records, manifest=manifest)
    split.save(out_dir / "split.json", manifest=manifest)
    summary = {}
    if validate:
        summary = validate_released(gen.findings, records, split)
    return summary


def write_demo(out_dir, seed: int = 7, n_papers: int = 12,
               n_articles: int = 8) -> dict:
    """A 20-document corpus for the end-to-end CLI smoke path."""
    out_dir = Path(out_dir)
    # few fields so per-paper metadata varies within each field even at
    # 20 documents (otherwise the RQ designs go rank deficient)
    gen = build_corpus(seed, n_papers=n_papers, n_articles=n_articles,
                       with_filter_violations=False,
                       field_subset=("medicine", "psychology", "climate",
                                     "nutrition"))
    # tiny corpora skip the phase structure: annotate a fixed slice instead
    rng = random.Random(seed + 9)
    hedges = load_hedges()
    subset = gen.findings[: min(44, len(gen.findings))]
    records = []
    from .corpus import AnnotationRecord

    for idx, f in enumerate(subset):
        claim = gen.claims_by_text[f.text]
        h = count_hedges(f.text, hedges)
        mu = claim.mu_text + 0.3 * (h - 1.0) + rng.gauss(0, LATENT_NOISE)
        offset = idx % len(ANNOTATORS)
        for a in range(2):
            records.append(AnnotationRecord(
                finding_id=f.finding_id,
                annotator_id=ANNOTATORS[(offset + a) % len(ANNOTATORS)],
                kind="sentence_level", likert=_likert(rng, mu)))
        for a in range(3):
            labels = {aspect: _flip_label(rng, claim.aspects[aspect])
                      for aspect in ASPECTS}
            records.append(AnnotationRecord(
                finding_id=f.finding_id,
                annotator_id=ANNOTATORS[(offset + 2 + a) % len(ANNOTATORS)],
                kind="aspect_level", aspects=tuple(sorted(labels.items()))))
    split = make_split([f.finding_id for f in subset[:36]], seed=seed,
                       random_test=[f.finding_id for f in subset[36:]])
    manifest = {"generator": "scicert.datagen", "seed": seed,
                "n_papers": n_papers, "n_articles": n_articles, "demo": True}
    write_corpus(gen.corpus, out_dir, manifest=manifest)
    write_annotations(out_dir / "annotations.jsonl", records, manifest=manifest)
    split.save(out_dir / "split.json", manifest=manifest)
    return {"documents": n_papers + n_articles, "findings": len(gen.findings),
            "annotated": len(subset)}
