"""Exception types shared across the package.

Every error raised by the library derives from AutexError so callers can
catch the whole family at once. The CLI maps these onto exit codes.
"""

from __future__ import annotations


class AutexError(Exception):
    """Base class for all errors raised by this package."""


class EmptyKeyword(AutexError):
    """A keyword text trimmed to the empty string."""


class InvalidFilter(AutexError):
    """A vocabulary filter violates its invariants (e.g. one-character prefix)."""


class UnknownKeyword(AutexError):
    """A keychain referenced a keyword that is not in the vocabulary."""


class EmptyKeychain(AutexError):
    """A keychain with zero keywords."""


class EmptyPattern(AutexError):
    """A dictionary entry with no non-empty alternative."""


class UnknownKeychain(AutexError):
    """A dictionary entry referenced a keychain that is not stored."""


class UnbalancedMath(AutexError):
    """Unpaired `$` delimiters in a pattern alternative."""


class MalformedTex(AutexError):
    """Brace nesting in a TeX source never closes (or closes too often)."""


class UnsupportedConstruct(AutexError):
    """A pattern uses syntax outside the supported subset."""


class EmptyApd(AutexError):
    """A dictionary with zero compilable entries was handed to the indexer."""


class UnknownKeychainInReport(AutexError):
    """A correction targeted a keychain the report does not contain."""


class SourceMismatch(AutexError):
    """An engine report and a reference report describe different documents."""


class EmptyCorpus(AutexError):
    """Corpus metrics requested over zero comparison results."""


class ParseError(AutexError):
    """A line-oriented file violated its format.

    Carries enough context to print `file:line: message` diagnostics.
    """

    def __init__(self, message: str, *, line: int | None = None, filename: str | None = None):
        self.line = line
        self.filename = filename
        prefix = ""
        if filename:
            prefix += filename
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class StoreLocked(AutexError):
    """Another process holds the store's writer lock."""


class CorruptStore(AutexError):
    """A store file could not be loaded."""
