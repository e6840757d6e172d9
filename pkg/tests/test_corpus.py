import json

import pytest

from scicert.corpus import (
    AnnotationRecord,
    Corpus,
    DataError,
    NewsArticle,
    PaperMeta,
    aggregate_annotations,
    ingest_corpus,
    preprocess_news,
    read_annotations,
    write_annotations,
    write_corpus,
)


def make_paper(doi="10.1/x", sentences=None, **kw):
    defaults = dict(
        doi=doi,
        journal_impact_factor=3.2,
        num_authors=4,
        field="medicine",
        author_rank=120.0,
        affiliation_rank=40.0,
        abstract_sentences=tuple(sentences or (
            ("We study things.", "background"),
            ("Things improved.", "result"),
        )),
    )
    defaults.update(kw)
    return PaperMeta(**defaults)


def make_article(article_id="n1", body="Short body here.", dois=("10.1/x",), outlet="wire"):
    return NewsArticle.from_dict({
        "article_id": article_id,
        "outlet": outlet,
        "body": body,
        "linked_dois": list(dois),
    })


class TestIngest:
    def test_empty_news_one_paper(self, tmp_path):
        news = tmp_path / "news.jsonl"
        news.write_text("")
        papers = tmp_path / "papers.jsonl"
        papers.write_text(json.dumps(make_paper().to_dict()) + "\n")
        result = ingest_corpus(news, papers)
        assert len(result.corpus.articles) == 0
        assert len(result.corpus.papers) == 1
        assert not result.issues

    def test_malformed_line_reported_with_line_number(self, tmp_path):
        news = tmp_path / "news.jsonl"
        lines = [json.dumps(make_article(f"n{i}").to_dict()) for i in range(3)]
        lines.insert(2, "{not json")
        news.write_text("\n".join(lines) + "\n")
        papers = tmp_path / "papers.jsonl"
        papers.write_text("")
        result = ingest_corpus(news, papers)
        assert len(result.corpus.articles) == 3
        assert len(result.issues) == 1
        assert result.issues[0].line_no == 3

    def test_unreadable_file_fatal(self, tmp_path):
        with pytest.raises(DataError):
            ingest_corpus(tmp_path / "absent.jsonl", tmp_path / "also_absent.jsonl")

    def test_round_trip_identity(self, tmp_path):
        papers = [make_paper(f"10.1/p{i}") for i in range(4)]
        articles = [make_article(f"n{i}", body=f"Body {i} with words.") for i in range(6)]
        corpus = Corpus(papers=tuple(papers), articles=tuple(articles))
        write_corpus(corpus, tmp_path, manifest={"seed": 1})
        result = ingest_corpus(tmp_path / "news.jsonl", tmp_path / "papers.jsonl")
        assert not result.issues
        assert result.corpus.papers == corpus.papers
        assert result.corpus.articles == corpus.articles

    def test_duplicate_doi_reported(self, tmp_path):
        papers = tmp_path / "papers.jsonl"
        row = json.dumps(make_paper().to_dict())
        papers.write_text(row + "\n" + row + "\n")
        news = tmp_path / "news.jsonl"
        news.write_text("")
        result = ingest_corpus(news, papers)
        assert len(result.corpus.papers) == 1
        assert any("duplicate" in i.message for i in result.issues)

    def test_word_count_matches_whitespace_tokens(self):
        a = make_article(body="one two  three\nfour")
        assert a.word_count == 4


class TestPreprocess:
    def corpus_of(self, *articles):
        return Corpus(papers=(make_paper(),), articles=tuple(articles))

    def test_1393_words_removed(self):
        long_body = " ".join(["word"] * 1393)
        corpus = self.corpus_of(make_article("long", body=long_body))
        out, report = preprocess_news(corpus)
        assert report.removed_too_long == 1
        assert len(out.articles) == 0

    def test_1392_words_kept(self):
        body = " ".join(["word"] * 1392)
        corpus = self.corpus_of(make_article("edge", body=body))
        out, report = preprocess_news(corpus)
        assert report.removed_too_long == 0
        assert len(out.articles) == 1

    def test_two_dois_removed(self):
        corpus = self.corpus_of(make_article("multi", dois=("10.1/a", "10.1/b")))
        out, report = preprocess_news(corpus)
        assert report.removed_bad_links == 1
        assert len(out.articles) == 0

    def test_clean_article_unchanged(self):
        body = "A hundred words would go here. This one stays as written."
        corpus = self.corpus_of(make_article("ok", body=body))
        out, report = preprocess_news(corpus)
        assert out.articles[0].body == body
        assert report.kept == 1

    def test_quote_paragraph_stripped(self):
        body = 'First para stays.\n\nShe said "this is quoted".\n\nLast para stays.'
        corpus = self.corpus_of(make_article("q", body=body))
        out, report = preprocess_news(corpus)
        assert '"' not in out.articles[0].body
        assert report.quote_paragraphs_stripped == 1
        assert "First para stays." in out.articles[0].body
        assert "Last para stays." in out.articles[0].body

    def test_reference_section_stripped(self):
        body = "Finding text here.\nReferences\n1. Someone et al."
        corpus = self.corpus_of(make_article("r", body=body))
        out, report = preprocess_news(corpus)
        assert "Someone" not in out.articles[0].body
        assert report.reference_sections_stripped == 1

    def test_idempotent(self):
        body = ('Keep this.\n\nQuote "here" goes.\n\nAlso keep.\n'
                'References\nSmith 2001.')
        corpus = self.corpus_of(
            make_article("a", body=body),
            make_article("b", body=" ".join(["w"] * 2000)),
        )
        once, _ = preprocess_news(corpus)
        twice, report2 = preprocess_news(once)
        assert once == twice
        assert report2.removed_too_long == 0
        assert report2.quote_paragraphs_stripped == 0


class TestAggregate:
    def sent(self, fid, annotator, likert):
        return AnnotationRecord(finding_id=fid, annotator_id=annotator,
                                kind="sentence_level", likert=likert)

    def asp(self, fid, annotator, **labels):
        base = {a: "not_present" for a in
                ("number", "extent", "probability", "framing", "condition", "suggestion")}
        base.update(labels)
        return AnnotationRecord(finding_id=fid, annotator_id=annotator,
                                kind="aspect_level",
                                aspects=tuple(sorted(base.items())))

    def bad(self, fid, annotator):
        return AnnotationRecord(finding_id=fid, annotator_id=annotator, kind="bad_text")

    def test_mean_of_two(self):
        gold, _ = aggregate_annotations([self.sent("f", "a1", 4), self.sent("f", "a2", 5)])
        assert gold["f"].sentence_certainty == pytest.approx(4.5)

    def test_majority_aspect(self):
        recs = [self.asp("f", "a1", number="certain"),
                self.asp("f", "a2", number="certain"),
                self.asp("f", "a3", number="uncertain")]
        gold, _ = aggregate_annotations(recs)
        assert gold["f"].aspect_map["number"] == "certain"

    def test_three_way_tie_uses_priority(self):
        # documented rule: uncertain > certain > not_present on exact ties
        recs = [self.asp("f", "a1", number="certain"),
                self.asp("f", "a2", number="uncertain"),
                self.asp("f", "a3", number="not_present")]
        gold, _ = aggregate_annotations(recs)
        assert gold["f"].aspect_map["number"] == "uncertain"

    def test_tie_priority_is_configurable(self):
        recs = [self.asp("f", "a1", number="certain"),
                self.asp("f", "a2", number="uncertain"),
                self.asp("f", "a3", number="not_present")]
        gold, _ = aggregate_annotations(
            recs, tie_priority=("not_present", "certain", "uncertain"))
        assert gold["f"].aspect_map["number"] == "not_present"

    def test_two_way_tie(self):
        recs = [self.asp("f", "a1", extent="certain"),
                self.asp("f", "a2", extent="not_present")]
        gold, _ = aggregate_annotations(recs)
        assert gold["f"].aspect_map["extent"] == "certain"

    def test_bad_text_majority_excludes(self):
        recs = [self.bad("f", "a1"), self.bad("f", "a2"), self.sent("f", "a3", 4)]
        gold, report = aggregate_annotations(recs)
        assert "f" not in gold
        assert "f" in report.excluded_bad_text

    def test_bad_text_minority_kept(self):
        recs = [self.bad("f", "a1"), self.sent("f", "a2", 4), self.sent("f", "a3", 6)]
        gold, report = aggregate_annotations(recs)
        assert gold["f"].sentence_certainty == pytest.approx(5.0)
        assert not report.excluded_bad_text

    def test_gold_stays_in_range(self):
        recs = [self.sent("f", f"a{i}", v) for i, v in enumerate((1, 6, 3, 2, 5))]
        gold, _ = aggregate_annotations(recs)
        assert 1.0 <= gold["f"].sentence_certainty <= 6.0

    def test_annotation_record_validation(self):
        with pytest.raises(DataError):
            AnnotationRecord(finding_id="f", annotator_id="a",
                             kind="sentence_level", likert=None)
        with pytest.raises(DataError):
            AnnotationRecord(finding_id="f", annotator_id="a",
                             kind="sentence_level", likert=7)
        with pytest.raises(DataError):
            AnnotationRecord(finding_id="f", annotator_id="a",
                             kind="aspect_level", aspects=(("number", "certain"),))

    def test_annotations_round_trip(self, tmp_path):
        recs = [self.sent("f1", "a1", 3), self.asp("f1", "a2", framing="uncertain"),
                self.bad("f2", "a1")]
        path = tmp_path / "ann.jsonl"
        write_annotations(path, recs, manifest={"seed": 0})
        assert read_annotations(path) == recs
