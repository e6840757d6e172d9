"""Finding extraction: role-labeled abstract sentences and the report-verb
heuristic for news bodies.

Abstract findings are the sentences labeled result or conclusion, verbatim.
News findings are the clause after a report-verb phrase ("found that", ...):
the text after the phrase's trailing "that", first alphabetic character
uppercased, rest untouched.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .corpus import NewsArticle, PaperMeta, ScientificFinding
from .lexicon import Lexicon, load_abbreviations

FINDING_ROLES = ("result", "conclusion")

_BOUNDARY_RE = re.compile(r"([.?!]+)(\s+)")
_OPENERS = "\"'“”‘’("


@dataclass(frozen=True)
class SentenceSpan:
    start: int
    end: int

    def text_in(self, document: str) -> str:
        return document[self.start:self.end]


def _guarded(text: str, punct_end: int, abbreviations) -> bool:
    """True when the text ending at punct_end ends with a guard abbreviation
    at a token boundary (e.g. "Dr." suppresses, "sleep." does not for "p.")."""
    prefix = text[:punct_end]
    for abbr in abbreviations:
        if not prefix.endswith(abbr):
            continue
        before = punct_end - len(abbr) - 1
        if before < 0 or not text[before].isalnum():
            return True
    return False


def split_sentences(text: str, abbreviations=None) -> list[SentenceSpan]:
    """Split at [.?!] + whitespace + uppercase/quote/digit, except after guard
    abbreviations. The returned spans partition the input exactly: each span
    keeps its trailing whitespace, so concatenating span texts reproduces the
    input byte for byte.
    """
    if not text:
        return []
    if abbreviations is None:
        abbreviations = load_abbreviations()
    spans = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        nxt = m.end()
        if nxt >= len(text):
            break
        ch = text[nxt]
        if not (ch.isupper() or ch.isdigit() or ch in _OPENERS):
            continue
        if _guarded(text, m.end(1), abbreviations):
            continue
        spans.append(SentenceSpan(start, m.end()))
        start = m.end()
    spans.append(SentenceSpan(start, len(text)))
    return spans


def extract_abstract_findings(paper: PaperMeta) -> list[ScientificFinding]:
    """One finding per abstract sentence labeled result or conclusion,
    in document order, text verbatim. char_span indexes into
    paper.abstract_text (sentences joined with single spaces)."""
    findings = []
    offset = 0
    k = 0
    for i, (text, role) in enumerate(paper.abstract_sentences):
        if i > 0:
            offset += 1  # joining space
        if role in FINDING_ROLES:
            findings.append(ScientificFinding(
                finding_id=f"{paper.doi}:abs{k}",
                text=text,
                source="abstract",
                origin_doi=paper.doi,
                char_span=(offset, offset + len(text)),
            ))
            k += 1
        offset += len(text)
    return findings


def _verb_patterns(verb_lexicon: Lexicon):
    pats = []
    for entry in verb_lexicon.entries:
        pattern = re.compile(
            r"\b" + r"\s+".join(re.escape(tok) for tok in entry) + r"\b",
            re.IGNORECASE,
        )
        keyword = " ".join(entry[:-1]) if entry[-1] == "that" else " ".join(entry)
        pats.append((pattern, keyword, entry))
    return pats


def _capitalize_first_alpha(s: str) -> str:
    for i, ch in enumerate(s):
        if ch.isalpha():
            return s[:i] + ch.upper() + s[i + 1:]
    return s


def extract_news_findings(article: NewsArticle, verb_lexicon: Lexicon,
                          abbreviations=None) -> list[ScientificFinding]:
    """Scan each body sentence for the earliest report-verb phrase and retain
    the clause after it. Sentences without a phrase, or with nothing after it,
    yield no finding. Deterministic: earliest match wins, one finding per
    sentence."""
    if abbreviations is None:
        abbreviations = load_abbreviations()
    patterns = _verb_patterns(verb_lexicon)
    body = article.body
    findings = []
    k = 0
    for span in split_sentences(body, abbreviations):
        sentence = span.text_in(body)
        best = None
        for pattern, keyword, _ in patterns:
            m = pattern.search(sentence)
            if m and (best is None or m.start() < best[0].start()):
                best = (m, keyword)
        if best is None:
            continue
        m, keyword = best
        clause = sentence[m.end():]
        lead = len(clause) - len(clause.lstrip())
        clause_start = span.start + m.end() + lead
        clause_end = span.start + len(sentence.rstrip())
        if clause_end <= clause_start:
            continue
        raw = body[clause_start:clause_end]
        if not any(ch.isalnum() for ch in raw):
            continue
        doi = article.linked_dois[0] if article.linked_dois else ""
        findings.append(ScientificFinding(
            finding_id=f"{article.article_id}:news{k}",
            text=_capitalize_first_alpha(raw),
            source="news",
            origin_doi=doi,
            origin_article_id=article.article_id,
            extraction_keyword=keyword,
            char_span=(clause_start, clause_end),
        ))
        k += 1
    return findings
