"""Token pipeline and lexicons: tokenization, stopwords, stemming, syllables,
hedge counting, and report-verb phrase lists.

Lexicon files are UTF-8, one entry per line, `#` comments allowed. The
default files ship with the package; the CERTAINTY_LEXICON_DIR environment
variable points lookups at an alternative directory.
"""

from __future__ import annotations

import hashlib
import os
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from . import porter

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

_VOWELS = "aeiouy"


class LexiconError(ValueError):
    """Raised for empty or unreadable lexicon files."""


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character.

    Empty tokens are dropped; deterministic for a given input.
    """
    return _TOKEN_RE.findall(text.lower())


def stem(token: str) -> str:
    """Porter stem of a lowercase token."""
    return porter.stem(token)


def count_syllables(word: str) -> int:
    """Heuristic syllable count: maximal vowel runs (aeiouy), minus a silent
    trailing "e", minimum 1.

    The trailing "e" counts as silent only in the magic-e pattern
    vowel-consonant-"e" ("make", "size"), so "science" and "table" keep
    their final run.
    """
    w = word.lower()
    runs = 0
    prev_vowel = False
    for ch in w:
        is_vowel = ch in _VOWELS
        if is_vowel and not prev_vowel:
            runs += 1
        prev_vowel = is_vowel
    if (
        len(w) >= 3
        and w[-1] == "e"
        and w[-2] not in _VOWELS
        and w[-3] in _VOWELS
    ):
        runs -= 1
    return max(runs, 1)


@dataclass(frozen=True)
class Lexicon:
    """A named set of lowercase entries, single tokens or multiword phrases."""

    name: str
    entries: tuple[tuple[str, ...], ...]
    match_mode: str = "phrase"  # "phrase" counts multiword entries; "token" ignores them
    source_path: str | None = None
    sha256: str | None = None

    def __post_init__(self):
        if not self.entries:
            raise LexiconError(f"lexicon {self.name!r} has no entries")
        if self.match_mode not in ("phrase", "token"):
            raise LexiconError(f"bad match_mode {self.match_mode!r}")

    @classmethod
    def from_entries(cls, name, raw_entries, match_mode="phrase", source_path=None,
                     sha256=None):
        seen = []
        for entry in raw_entries:
            toks = tuple(tokenize(entry))
            if toks and toks not in seen:
                seen.append(toks)
        return cls(name=name, entries=tuple(seen), match_mode=match_mode,
                   source_path=source_path, sha256=sha256)

    @classmethod
    def from_file(cls, path, name=None, match_mode="phrase"):
        path = Path(path)
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise LexiconError(f"cannot read lexicon file {path}: {exc}") from exc
        digest = hashlib.sha256(raw).hexdigest()
        lines = []
        for line in raw.decode("utf-8").splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                lines.append(line)
        return cls.from_entries(name or path.stem, lines, match_mode=match_mode,
                                source_path=str(path), sha256=digest)

    def count(self, text: str) -> int:
        """Number of occurrences of lexicon entries in `text`.

        Duplicates count. In phrase mode each entry is matched as a contiguous
        token subsequence; entries are counted independently of one another.
        """
        return self.count_tokens(tokenize(text))

    def count_tokens(self, tokens: list[str]) -> int:
        total = 0
        single = {e[0] for e in self.entries if len(e) == 1}
        if single:
            total += sum(1 for t in tokens if t in single)
        if self.match_mode == "phrase":
            for entry in self.entries:
                k = len(entry)
                if k < 2:
                    continue
                total += sum(
                    1 for i in range(len(tokens) - k + 1)
                    if tuple(tokens[i:i + k]) == entry
                )
        return total

    def first_match(self, tokens: list[str]):
        """Earliest (start_index, entry) over all entries, or None."""
        best = None
        for entry in self.entries:
            if self.match_mode == "token" and len(entry) > 1:
                continue
            k = len(entry)
            for i in range(len(tokens) - k + 1):
                if tuple(tokens[i:i + k]) == entry:
                    if best is None or i < best[0]:
                        best = (i, entry)
                    break
        return best


def count_hedges(text: str, hedge_lexicon: Lexicon) -> int:
    """Number of hedge-lexicon occurrences in `text` (duplicates count)."""
    return hedge_lexicon.count(text)


# -- default lexicon locations ------------------------------------------------

_DEFAULT_FILES = {
    "hedges": "hedges.txt",
    "report_verbs": "report_verbs.txt",
    "stopwords": "stopwords.txt",
    "abbreviations": "abbreviations.txt",
}


def default_lexicon_path(kind: str) -> Path:
    """Path of a shipped lexicon file, honoring CERTAINTY_LEXICON_DIR."""
    filename = _DEFAULT_FILES[kind]
    override = os.environ.get("CERTAINTY_LEXICON_DIR")
    if override:
        candidate = Path(override) / filename
        if candidate.exists():
            return candidate
    return Path(str(resources.files("scicert").joinpath("data", filename)))


def load_hedges(path=None) -> Lexicon:
    return Lexicon.from_file(path or default_lexicon_path("hedges"), name="hedges")


def load_report_verbs(path=None) -> Lexicon:
    return Lexicon.from_file(path or default_lexicon_path("report_verbs"),
                             name="report_verbs")


@dataclass(frozen=True)
class Stopwords:
    words: frozenset[str]
    source_path: str | None = None
    sha256: str | None = None

    def __contains__(self, token):
        return token in self.words


def load_stopwords(path=None) -> Stopwords:
    path = Path(path or default_lexicon_path("stopwords"))
    raw = path.read_bytes()
    words = set()
    for line in raw.decode("utf-8").splitlines():
        line = line.split("#", 1)[0].strip().lower()
        if line:
            words.add(line)
    if not words:
        raise LexiconError(f"stopword file {path} is empty")
    return Stopwords(words=frozenset(words), source_path=str(path),
                     sha256=hashlib.sha256(raw).hexdigest())


def load_abbreviations(path=None) -> tuple[str, ...]:
    path = Path(path or default_lexicon_path("abbreviations"))
    out = []
    for line in path.read_text("utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return tuple(out)
