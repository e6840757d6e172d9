"""Canonical data model, JSONL ingestion, news preprocessing filters, and
annotation aggregation.

File schemas (one JSON object per line, UTF-8):
  papers.jsonl      {"doi", "journal_impact_factor", "num_authors", "field",
                     "author_rank", "affiliation_rank",
                     "abstract_sentences": [{"text", "role"}]}
  news.jsonl        {"article_id", "outlet", "body", "linked_dois": [...]}
  annotations.jsonl {"finding_id", "annotator_id", "kind", "likert"?,
                     "aspects"?: {six aspect keys -> label}}
  findings.jsonl    ScientificFinding fields as written by `extraction`.

A first line whose object carries "record_type": "manifest" is ignored by all
readers, so written outputs round-trip through the same readers.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

ASPECTS = ("number", "extent", "probability", "framing", "condition", "suggestion")
ASPECT_LABELS = ("not_present", "certain", "uncertain")
ROLES = ("background", "method", "introduction", "result", "conclusion")
SOURCES = ("news", "abstract")

DEFAULT_LENGTH_CUTOFF = 1392  # words; longer news articles are policy documents

_REFERENCE_HEADER_RE = re.compile(r"^\s*(references|sources)\b", re.IGNORECASE)
_QUOTE_CHARS = ('"', "“", "”")


class DataError(ValueError):
    """Fatal data problem: unreadable file, invalid record set."""


@dataclass(frozen=True)
class PaperMeta:
    doi: str
    journal_impact_factor: float
    num_authors: int
    field: str
    author_rank: float
    affiliation_rank: float
    abstract_sentences: tuple[tuple[str, str], ...]  # (text, rhetorical role)

    def __post_init__(self):
        if not self.doi:
            raise DataError("paper doi must be nonempty")
        if self.journal_impact_factor < 0:
            raise DataError(f"{self.doi}: journal_impact_factor must be >= 0")
        if self.num_authors < 1:
            raise DataError(f"{self.doi}: num_authors must be >= 1")
        for _, role in self.abstract_sentences:
            if role not in ROLES:
                raise DataError(f"{self.doi}: unknown rhetorical role {role!r}")

    @property
    def abstract_text(self) -> str:
        return " ".join(text for text, _ in self.abstract_sentences)

    def to_dict(self) -> dict:
        return {
            "doi": self.doi,
            "journal_impact_factor": self.journal_impact_factor,
            "num_authors": self.num_authors,
            "field": self.field,
            "author_rank": self.author_rank,
            "affiliation_rank": self.affiliation_rank,
            "abstract_sentences": [
                {"text": t, "role": r} for t, r in self.abstract_sentences
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PaperMeta":
        return cls(
            doi=d["doi"],
            journal_impact_factor=float(d["journal_impact_factor"]),
            num_authors=int(d["num_authors"]),
            field=d["field"],
            author_rank=float(d["author_rank"]),
            affiliation_rank=float(d["affiliation_rank"]),
            abstract_sentences=tuple(
                (s["text"], s["role"]) for s in d["abstract_sentences"]
            ),
        )


@dataclass(frozen=True)
class NewsArticle:
    article_id: str
    outlet: str
    body: str
    linked_dois: tuple[str, ...]
    word_count: int

    @classmethod
    def from_dict(cls, d: dict) -> "NewsArticle":
        body = d["body"]
        return cls(
            article_id=d["article_id"],
            outlet=d["outlet"],
            body=body,
            linked_dois=tuple(d["linked_dois"]),
            word_count=len(body.split()),
        )

    def to_dict(self) -> dict:
        return {
            "article_id": self.article_id,
            "outlet": self.outlet,
            "body": self.body,
            "linked_dois": list(self.linked_dois),
        }

    def with_body(self, body: str) -> "NewsArticle":
        return replace(self, body=body, word_count=len(body.split()))


@dataclass(frozen=True)
class ScientificFinding:
    finding_id: str
    text: str
    source: str  # "news" | "abstract"
    origin_doi: str
    origin_article_id: str | None = None
    extraction_keyword: str | None = None
    char_span: tuple[int, int] | None = None

    def __post_init__(self):
        if not self.text:
            raise DataError(f"{self.finding_id}: finding text must be nonempty")
        if self.source not in SOURCES:
            raise DataError(f"{self.finding_id}: bad source {self.source!r}")
        if self.source == "news" and not self.extraction_keyword:
            raise DataError(
                f"{self.finding_id}: news findings need extraction_keyword")

    def to_dict(self) -> dict:
        d = {
            "finding_id": self.finding_id,
            "text": self.text,
            "source": self.source,
            "origin_doi": self.origin_doi,
            "origin_article_id": self.origin_article_id,
            "extraction_keyword": self.extraction_keyword,
        }
        if self.char_span is not None:
            d["char_span"] = list(self.char_span)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScientificFinding":
        span = d.get("char_span")
        return cls(
            finding_id=d["finding_id"],
            text=d["text"],
            source=d["source"],
            origin_doi=d["origin_doi"],
            origin_article_id=d.get("origin_article_id"),
            extraction_keyword=d.get("extraction_keyword"),
            char_span=tuple(span) if span is not None else None,
        )


@dataclass(frozen=True)
class AnnotationRecord:
    finding_id: str
    annotator_id: str
    kind: str  # sentence_level | aspect_level | bad_text
    likert: int | None = None
    aspects: tuple[tuple[str, str], ...] | None = None  # sorted (aspect, label)

    def __post_init__(self):
        if self.kind == "sentence_level":
            if self.likert is None or not 1 <= self.likert <= 6:
                raise DataError(
                    f"{self.finding_id}/{self.annotator_id}: sentence_level "
                    f"needs likert in 1..6, got {self.likert!r}")
            if self.aspects is not None:
                raise DataError("sentence_level record must not carry aspects")
        elif self.kind == "aspect_level":
            if self.likert is not None:
                raise DataError("aspect_level record must not carry likert")
            got = tuple(sorted(a for a, _ in self.aspects or ()))
            if got != tuple(sorted(ASPECTS)):
                raise DataError(
                    f"{self.finding_id}/{self.annotator_id}: aspect_level "
                    f"needs exactly the six aspect keys, got {got}")
            for _, label in self.aspects:
                if label not in ASPECT_LABELS:
                    raise DataError(f"bad aspect label {label!r}")
        elif self.kind == "bad_text":
            if self.likert is not None or self.aspects is not None:
                raise DataError("bad_text record carries no labels")
        else:
            raise DataError(f"unknown annotation kind {self.kind!r}")

    @property
    def aspect_map(self) -> dict:
        return dict(self.aspects or ())

    def to_dict(self) -> dict:
        d = {
            "finding_id": self.finding_id,
            "annotator_id": self.annotator_id,
            "kind": self.kind,
        }
        if self.likert is not None:
            d["likert"] = self.likert
        if self.aspects is not None:
            d["aspects"] = dict(self.aspects)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationRecord":
        aspects = d.get("aspects")
        return cls(
            finding_id=d["finding_id"],
            annotator_id=d["annotator_id"],
            kind=d["kind"],
            likert=d.get("likert"),
            aspects=tuple(sorted(aspects.items())) if aspects is not None else None,
        )


@dataclass(frozen=True)
class Corpus:
    papers: tuple[PaperMeta, ...]
    articles: tuple[NewsArticle, ...]

    def __post_init__(self):
        dois = [p.doi for p in self.papers]
        if len(dois) != len(set(dois)):
            dupes = sorted(d for d, c in Counter(dois).items() if c > 1)
            raise DataError(f"duplicate paper dois: {dupes}")

    @cached_property
    def paper_by_doi(self) -> dict:
        return {p.doi: p for p in self.papers}

    @cached_property
    def article_by_id(self) -> dict:
        return {a.article_id: a for a in self.articles}


@dataclass(frozen=True)
class IngestIssue:
    path: str
    line_no: int
    message: str


@dataclass(frozen=True)
class IngestResult:
    corpus: Corpus
    issues: tuple[IngestIssue, ...]


def _iter_jsonl(path: Path):
    """Yield (line_no, parsed object or None, error message or None)."""
    try:
        raw = path.read_text("utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    for line_no, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            yield line_no, None, f"invalid JSON: {exc.msg}"
            continue
        if isinstance(obj, dict) and obj.get("record_type") == "manifest":
            continue
        yield line_no, obj, None


def ingest_corpus(news_path, papers_path) -> IngestResult:
    """Load a corpus from JSONL exports.

    Malformed lines are recorded as issues with their line numbers, never
    silently dropped; unreadable files raise DataError.
    """
    news_path, papers_path = Path(news_path), Path(papers_path)
    issues: list[IngestIssue] = []

    papers: list[PaperMeta] = []
    seen_dois: set[str] = set()
    for line_no, obj, err in _iter_jsonl(papers_path):
        if err:
            issues.append(IngestIssue(str(papers_path), line_no, err))
            continue
        try:
            paper = PaperMeta.from_dict(obj)
        except (DataError, KeyError, TypeError, ValueError) as exc:
            issues.append(IngestIssue(str(papers_path), line_no, f"bad paper record: {exc}"))
            continue
        if paper.doi in seen_dois:
            issues.append(IngestIssue(str(papers_path), line_no,
                                      f"duplicate doi {paper.doi}"))
            continue
        seen_dois.add(paper.doi)
        papers.append(paper)

    articles: list[NewsArticle] = []
    seen_ids: set[str] = set()
    for line_no, obj, err in _iter_jsonl(news_path):
        if err:
            issues.append(IngestIssue(str(news_path), line_no, err))
            continue
        try:
            article = NewsArticle.from_dict(obj)
        except (DataError, KeyError, TypeError, ValueError) as exc:
            issues.append(IngestIssue(str(news_path), line_no, f"bad news record: {exc}"))
            continue
        if article.article_id in seen_ids:
            issues.append(IngestIssue(str(news_path), line_no,
                                      f"duplicate article_id {article.article_id}"))
            continue
        seen_ids.add(article.article_id)
        articles.append(article)

    return IngestResult(Corpus(papers=tuple(papers), articles=tuple(articles)),
                        tuple(issues))


def write_corpus(corpus: Corpus, out_dir, manifest: dict | None = None) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_jsonl(out_dir / "papers.jsonl", (p.to_dict() for p in corpus.papers), manifest)
    write_jsonl(out_dir / "news.jsonl", (a.to_dict() for a in corpus.articles), manifest)


def write_jsonl(path, objects, manifest: dict | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        if manifest is not None:
            fh.write(json.dumps({"record_type": "manifest", **manifest},
                                ensure_ascii=False, sort_keys=True) + "\n")
        for obj in objects:
            fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")


def read_findings(path) -> list[ScientificFinding]:
    out = []
    for line_no, obj, err in _iter_jsonl(Path(path)):
        if err:
            raise DataError(f"{path}:{line_no}: {err}")
        out.append(ScientificFinding.from_dict(obj))
    return out


def write_findings(path, findings, manifest: dict | None = None) -> None:
    write_jsonl(path, (f.to_dict() for f in findings), manifest)


def read_annotations(path) -> list[AnnotationRecord]:
    out = []
    for line_no, obj, err in _iter_jsonl(Path(path)):
        if err:
            raise DataError(f"{path}:{line_no}: {err}")
        out.append(AnnotationRecord.from_dict(obj))
    return out


def write_annotations(path, records, manifest: dict | None = None) -> None:
    write_jsonl(path, (r.to_dict() for r in records), manifest)


# -- preprocessing (Appendix-A style filters) ---------------------------------

@dataclass(frozen=True)
class PreprocessReport:
    removed_too_long: int
    removed_bad_links: int
    quote_paragraphs_stripped: int
    reference_sections_stripped: int
    kept: int


def _strip_reference_section(body: str) -> tuple[str, bool]:
    lines = body.split("\n")
    last_header = None
    for i, line in enumerate(lines):
        if _REFERENCE_HEADER_RE.match(line):
            last_header = i
    if last_header is None:
        return body, False
    return "\n".join(lines[:last_header]).rstrip("\n"), True


def _strip_quote_paragraphs(body: str) -> tuple[str, int]:
    # paragraphs are blocks separated by blank lines
    paragraphs = re.split(r"\n\s*\n", body)
    kept = [p for p in paragraphs if not any(q in p for q in _QUOTE_CHARS)]
    return "\n\n".join(kept), len(paragraphs) - len(kept)


def preprocess_news(corpus: Corpus,
                    length_cutoff: int = DEFAULT_LENGTH_CUTOFF) -> tuple[Corpus, PreprocessReport]:
    """Apply the news filters: drop articles longer than `length_cutoff` words
    or linked to != 1 paper, strip trailing reference sections and paragraphs
    containing a double-quote character. Idempotent.
    """
    removed_long = removed_links = quotes = refs = 0
    kept: list[NewsArticle] = []
    for article in corpus.articles:
        if article.word_count > length_cutoff:
            removed_long += 1
            continue
        if len(article.linked_dois) != 1:
            removed_links += 1
            continue
        body, stripped_refs = _strip_reference_section(article.body)
        if stripped_refs:
            refs += 1
        body, n_quote = _strip_quote_paragraphs(body)
        quotes += n_quote
        kept.append(article.with_body(body))
    report = PreprocessReport(
        removed_too_long=removed_long,
        removed_bad_links=removed_links,
        quote_paragraphs_stripped=quotes,
        reference_sections_stripped=refs,
        kept=len(kept),
    )
    return Corpus(papers=corpus.papers, articles=tuple(kept)), report


# -- annotation aggregation ----------------------------------------------------

DEFAULT_TIE_PRIORITY = ("uncertain", "certain", "not_present")


@dataclass(frozen=True)
class GoldLabel:
    finding_id: str
    sentence_certainty: float | None  # mean of likert ratings, in [1, 6]
    n_sentence_ratings: int
    aspects: tuple[tuple[str, str], ...] | None  # majority label per aspect
    n_aspect_ratings: int

    @property
    def aspect_map(self) -> dict:
        return dict(self.aspects or ())


@dataclass(frozen=True)
class AggregationReport:
    excluded_bad_text: tuple[str, ...]
    warnings: tuple[str, ...]


def _majority(labels: list[str], tie_priority) -> str:
    counts = Counter(labels)
    top = max(counts.values())
    tied = [lbl for lbl, c in counts.items() if c == top]
    if len(tied) == 1:
        return tied[0]
    for preferred in tie_priority:
        if preferred in tied:
            return preferred
    return sorted(tied)[0]


def aggregate_annotations(records, tie_priority=DEFAULT_TIE_PRIORITY
                          ) -> tuple[dict, AggregationReport]:
    """Aggregate per-annotator records into gold labels.

    Sentence-level gold is the mean of likert ratings; aspect-level gold is
    the per-aspect majority with ties broken by `tie_priority` (annotators
    flag uncertainty only when they see evidence of it, so `uncertain` wins
    exact ties by default). A finding is excluded when a strict majority of
    its annotators flagged it bad_text.
    """
    by_finding: dict[str, list[AnnotationRecord]] = {}
    for rec in records:
        by_finding.setdefault(rec.finding_id, []).append(rec)

    gold: dict[str, GoldLabel] = {}
    excluded: list[str] = []
    warnings: list[str] = []
    for finding_id, recs in by_finding.items():
        annotators = {r.annotator_id for r in recs}
        bad_voters = {r.annotator_id for r in recs if r.kind == "bad_text"}
        if 2 * len(bad_voters) > len(annotators):
            excluded.append(finding_id)
            continue
        likerts = [r.likert for r in recs if r.kind == "sentence_level"]
        aspect_recs = [r for r in recs if r.kind == "aspect_level"]
        if not likerts and not aspect_recs:
            warnings.append(f"{finding_id}: no usable records, skipped")
            continue
        aspects = None
        if aspect_recs:
            aspects = tuple(
                (aspect, _majority([r.aspect_map[aspect] for r in aspect_recs],
                                   tie_priority))
                for aspect in ASPECTS
            )
        gold[finding_id] = GoldLabel(
            finding_id=finding_id,
            sentence_certainty=sum(likerts) / len(likerts) if likerts else None,
            n_sentence_ratings=len(likerts),
            aspects=aspects,
            n_aspect_ratings=len(aspect_recs),
        )
    return gold, AggregationReport(tuple(excluded), tuple(warnings))
