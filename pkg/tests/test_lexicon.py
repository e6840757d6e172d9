import pytest
from hypothesis import given, strategies as st

from scicert.lexicon import (
    Lexicon,
    LexiconError,
    count_hedges,
    count_syllables,
    load_hedges,
    load_report_verbs,
    load_stopwords,
    tokenize,
)

HEDGES = load_hedges()


class TestTokenize:
    def test_basic(self):
        assert tokenize("Being bullied may increase.") == [
            "being", "bullied", "may", "increase"]

    def test_empty(self):
        assert tokenize("") == []

    def test_digits_and_symbols(self):
        assert tokenize("76% of chances") == ["76", "of", "chances"]

    def test_underscore_is_a_separator(self):
        assert tokenize("a_b") == ["a", "b"]

    def test_idempotent_on_normalized_text(self):
        toks = tokenize("Circadian rhythm disruptions, such as jet lag!")
        assert tokenize(" ".join(toks)) == toks


class TestCountHedges:
    # Counts pinned by the published sentence-level examples (bolded hedges).
    def test_one_hedge(self):
        text = ("Circadian rhythm disruptions, such as jet lag, might be "
                "linked with an increased risk of cancer, she said.")
        assert count_hedges(text, HEDGES) == 1

    def test_zero_hedges(self):
        text = ("Further research is necessary to understand whether this "
                "is a causal relationship.")
        assert count_hedges(text, HEDGES) == 0

    def test_two_hedges(self):
        text = ("These mouthwashes may be of modest benefit, it is unclear "
                "if a certain subset of patients showed a large response "
                "while others derived no benefit.")
        assert count_hedges(text, HEDGES) == 2

    def test_three_hedges(self):
        text = ("The nondemented subjects with Alzheimer pathology may have "
                "had “preclinical” AD, or numerous cortical plaques may occur in "
                "some elderly subjects who would never develop clinical dementia.")
        assert count_hedges(text, HEDGES) == 3

    def test_four_hedges(self):
        text = ("Based on these observations, we propose that the apparent "
                "receding contact angle should be used for characterizing "
                "superliquid-repellent surfaces rather than the apparent "
                "advancing contact angle and hysteresis.")
        assert count_hedges(text, HEDGES) == 4

    def test_duplicates_count(self):
        lex = Lexicon.from_entries("tiny", ["may"])
        assert count_hedges("may may may", lex) == 3

    def test_phrase_entries(self):
        lex = Lexicon.from_entries("tiny", ["tend to"])
        assert count_hedges("Plants tend to grow; they tend to bloom.", lex) == 2
        assert count_hedges("the tendency to grow", lex) == 0

    def test_token_mode_ignores_phrases(self):
        lex = Lexicon.from_entries("tiny", ["tend to", "may"], match_mode="token")
        assert count_hedges("they tend to and may", lex) == 1

    def test_additive_over_token_boundary(self):
        a = "It may rain."
        b = "It could snow, perhaps."
        assert (count_hedges(a + " " + b, HEDGES)
                == count_hedges(a, HEDGES) + count_hedges(b, HEDGES))

    def test_empty_lexicon_rejected(self):
        with pytest.raises(LexiconError):
            Lexicon.from_entries("empty", [])


class TestCountSyllables:
    @pytest.mark.parametrize("word,n", [
        ("science", 2),
        ("a", 1),
        ("uncertainty", 4),
        ("make", 1),
        ("table", 2),
        ("increase", 2),
        ("the", 1),
        ("chances", 2),
        ("free", 1),
        ("probability", 5),
    ])
    def test_examples(self, word, n):
        assert count_syllables(word) == n

    @given(st.text(alphabet=st.characters(min_codepoint=97, max_codepoint=122),
                   min_size=1, max_size=12))
    def test_minimum_one(self, word):
        assert count_syllables(word) >= 1


class TestShippedLexicons:
    def test_report_verbs_all_end_in_that(self):
        verbs = load_report_verbs()
        assert len(verbs.entries) == 27
        assert all(entry[-1] == "that" for entry in verbs.entries)

    def test_stopwords_keep_modal_hedges(self):
        sw = load_stopwords()
        for modal in ("may", "might", "could", "would", "should"):
            assert modal not in sw
        assert "the" in sw

    def test_hashes_recorded(self):
        assert HEDGES.sha256 and len(HEDGES.sha256) == 64

    def test_env_override(self, tmp_path, monkeypatch):
        (tmp_path / "hedges.txt").write_text("zzzonlyhedge\n")
        monkeypatch.setenv("CERTAINTY_LEXICON_DIR", str(tmp_path))
        lex = load_hedges()
        assert lex.entries == (("zzzonlyhedge",),)
