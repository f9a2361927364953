"""Controlled vocabulary: keywords, keychains, and the manager filters.

A keyword is a vocabulary term, either a single word or a fixed multi-word
phrase. A keychain is an ordered sequence of keywords and is the unit that
gets assigned to a document; its canonical rendering joins the keyword texts
with ", ". Keychain equality is ordered and case-insensitive per keyword.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import (
    EmptyKeychain,
    EmptyKeyword,
    InvalidFilter,
    ParseError,
    UnknownKeyword,
)

_WS_RUN = re.compile(r"\s+")


def canonical_keyword_text(text: str) -> str:
    """Trim and collapse internal whitespace runs to single spaces."""
    return _WS_RUN.sub(" ", text.strip())


@dataclass(frozen=True)
class Keyword:
    """A controlled-vocabulary term in canonical (case-preserving) form."""

    text: str

    @property
    def key(self) -> str:
        return self.text.casefold()


@dataclass(frozen=True, init=False)
class Keychain:
    """An ordered, non-empty sequence of keyword texts.

    Equality and hashing are case-insensitive but order-sensitive:
    Keychain(["a", "b"]) != Keychain(["b", "a"]).
    """

    keywords: tuple[str, ...]

    def __init__(self, keywords):
        texts = tuple(canonical_keyword_text(k) for k in keywords)
        texts = tuple(t for t in texts if t)
        if not texts:
            raise EmptyKeychain("a keychain needs at least one keyword")
        object.__setattr__(self, "keywords", texts)

    @property
    def rendering(self) -> str:
        return ", ".join(self.keywords)

    @property
    def key(self) -> tuple[str, ...]:
        return tuple(k.casefold() for k in self.keywords)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Keychain):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __str__(self) -> str:
        return self.rendering


def parse_keychain_text(rendering: str) -> Keychain:
    """Build a keychain value from a rendering, without touching any store.

    Lenient on the delimiter: segments split on commas, with or without the
    following blank, and each segment is whitespace-normalized.
    """
    segments = [canonical_keyword_text(s) for s in rendering.split(",")]
    segments = [s for s in segments if s]
    if not segments:
        raise EmptyKeychain(f"no keywords in {rendering!r}")
    return Keychain(segments)


@dataclass
class VocabularyFilter:
    """Filter for the keyword/keychain/pattern managers.

    letter selects terms whose first character matches (case-insensitive);
    prefix selects terms with that leading substring and must be at least two
    characters long; keychain_selector intersects against a keychain set.
    Multiple options combine with AND.
    """

    letter: str | None = None
    prefix: str | None = None
    keychain_selector: set[Keychain] | None = None

    def validate(self) -> None:
        if self.letter is not None:
            if len(self.letter) != 1 or not self.letter.isalpha():
                raise InvalidFilter(f"letter must be a single alphabetic character, got {self.letter!r}")
        if self.prefix is not None and len(self.prefix) < 2:
            raise InvalidFilter("prefix must be a truncated string of at least 2 characters")

    def accepts_text(self, text: str) -> bool:
        folded = text.casefold()
        if self.letter is not None and not folded.startswith(self.letter.casefold()):
            return False
        if self.prefix is not None and not folded.startswith(self.prefix.casefold()):
            return False
        return True


@dataclass
class Vocabulary:
    """In-memory keyword and keychain store with manager semantics."""

    _keywords: dict[str, Keyword] = field(default_factory=dict)
    _keychains: dict[tuple[str, ...], Keychain] = field(default_factory=dict)

    # -- keywords ----------------------------------------------------------

    def add_keyword(self, text: str) -> Keyword:
        """Store a keyword in canonical form; case-insensitive duplicates
        return the existing entry unchanged."""
        canonical = canonical_keyword_text(text)
        if not canonical:
            raise EmptyKeyword(f"keyword text {text!r} trims to empty")
        existing = self._keywords.get(canonical.casefold())
        if existing is not None:
            return existing
        kw = Keyword(canonical)
        self._keywords[kw.key] = kw
        return kw

    def has_keyword(self, text: str) -> bool:
        return canonical_keyword_text(text).casefold() in self._keywords

    def filter_keywords(self, flt: VocabularyFilter | None = None) -> list[Keyword]:
        flt = flt or VocabularyFilter()
        flt.validate()
        hits = [kw for kw in self._keywords.values() if flt.accepts_text(kw.text)]
        return sorted(hits, key=lambda kw: (kw.key, kw.text))

    @property
    def keywords(self) -> list[Keyword]:
        return self.filter_keywords()

    # -- keychains ---------------------------------------------------------

    def make_keychain(self, keywords) -> Keychain:
        """Compose a keychain from existing keywords (the manager path).

        Unknown keywords are rejected; the composed chain is stored if new.
        """
        texts = []
        for item in keywords:
            text = item.text if isinstance(item, Keyword) else canonical_keyword_text(str(item))
            if not text:
                continue
            if text.casefold() not in self._keywords:
                raise UnknownKeyword(f"keyword {text!r} is not in the vocabulary")
            texts.append(self._keywords[text.casefold()].text)
        if not texts:
            raise EmptyKeychain("a keychain needs at least one keyword")
        return self._store_keychain(Keychain(texts))

    def parse_keychain(self, rendering: str) -> Keychain:
        """Parse a rendering, auto-creating unknown keywords (the ingestion
        path, so batch imports never fail on vocabulary gaps)."""
        chain = parse_keychain_text(rendering)
        stored_texts = [self.add_keyword(k).text for k in chain.keywords]
        return self._store_keychain(Keychain(stored_texts))

    def _store_keychain(self, chain: Keychain) -> Keychain:
        existing = self._keychains.get(chain.key)
        if existing is not None:
            return existing
        self._keychains[chain.key] = chain
        return chain

    def has_keychain(self, chain: Keychain) -> bool:
        return chain.key in self._keychains

    def filter_keychains(self, flt: VocabularyFilter | None = None) -> list[Keychain]:
        flt = flt or VocabularyFilter()
        flt.validate()
        hits = [c for c in self._keychains.values() if flt.accepts_text(c.rendering)]
        if flt.keychain_selector is not None:
            wanted = {c.key for c in flt.keychain_selector}
            hits = [c for c in hits if c.key in wanted]
        return sorted(hits, key=lambda c: (tuple(k.casefold() for k in c.keywords), c.rendering))

    @property
    def keychains(self) -> list[Keychain]:
        return self.filter_keychains()

    # -- file formats ------------------------------------------------------
    # One term per line, UTF-8; blank lines and `#` comment lines ignored.

    def load_keywords(self, text: str, filename: str | None = None) -> None:
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                self.add_keyword(line)
            except EmptyKeyword as exc:
                raise ParseError(str(exc), line=lineno, filename=filename) from exc

    def dump_keywords(self) -> str:
        lines = [kw.text for kw in self.filter_keywords()]
        return "\n".join(lines) + ("\n" if lines else "")

    def load_keychains(self, text: str, filename: str | None = None) -> None:
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                self.parse_keychain(line)
            except EmptyKeychain as exc:
                raise ParseError(str(exc), line=lineno, filename=filename) from exc

    def dump_keychains(self) -> str:
        lines = [c.rendering for c in self.filter_keychains()]
        return "\n".join(lines) + ("\n" if lines else "")
