"""Align paraphrased findings between a news article and the abstract of the
paper it covers: stem-set overlap and Jaccard similarity with fixed
thresholds (overlap >= 3, Jaccard > 0.3).
"""

from __future__ import annotations

from dataclasses import dataclass

from .lexicon import Stopwords, load_stopwords, stem, tokenize

DEFAULT_MIN_OVERLAP = 3
DEFAULT_MIN_JACCARD = 0.3


@dataclass(frozen=True)
class MatchedPair:
    news_finding_id: str
    abstract_finding_id: str
    overlap: int  # shared distinct stems
    jaccard: float

    def to_dict(self) -> dict:
        return {
            "news_finding_id": self.news_finding_id,
            "abstract_finding_id": self.abstract_finding_id,
            "overlap": self.overlap,
            "jaccard": self.jaccard,
        }


def normalize_for_match(text: str, stopwords: Stopwords | None = None) -> frozenset[str]:
    """tokenize -> drop stopwords -> Porter-stem -> deduplicate into a set."""
    if stopwords is None:
        stopwords = load_stopwords()
    return frozenset(stem(t) for t in tokenize(text) if t not in stopwords)


def pair_stats(news_stems: frozenset[str], abstract_stems: frozenset[str]) -> tuple[int, float]:
    inter = len(news_stems & abstract_stems)
    union = len(news_stems | abstract_stems)
    jaccard = inter / union if union else 0.0
    return inter, jaccard


def match_findings(news_findings, abstract_findings,
                   min_overlap: int = DEFAULT_MIN_OVERLAP,
                   min_jaccard: float = DEFAULT_MIN_JACCARD,
                   stopwords: Stopwords | None = None) -> list[MatchedPair]:
    """All cross pairs with overlap >= min_overlap and jaccard > min_jaccard,
    deduplicated to each news finding's best abstract partner
    (max jaccard, then max overlap, then lowest abstract index).
    """
    if stopwords is None:
        stopwords = load_stopwords()
    abs_stems = [normalize_for_match(f.text, stopwords) for f in abstract_findings]
    pairs = []
    for news in news_findings:
        news_stems = normalize_for_match(news.text, stopwords)
        best = None
        for idx, abstract in enumerate(abstract_findings):
            inter, jac = pair_stats(news_stems, abs_stems[idx])
            if inter >= min_overlap and jac > min_jaccard:
                key = (jac, inter, -idx)
                if best is None or key > best[0]:
                    best = (key, MatchedPair(news.finding_id, abstract.finding_id,
                                             inter, jac))
        if best is not None:
            pairs.append(best[1])
    return pairs
