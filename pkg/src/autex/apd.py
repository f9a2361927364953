"""Associative patterns dictionary: phrase patterns mapped to keychain sets.

Each entry associates one idea, written as one or more alternative phrase
patterns, with the set of keychains that express it in the controlled
vocabulary. The `|` metasymbol separates alternatives; a `|` inside a
`$...$` math segment is literal and never splits.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field

from .errors import EmptyPattern, ParseError, UnbalancedMath, UnknownKeychain
from .vocabulary import Keychain, Vocabulary, VocabularyFilter, parse_keychain_text

_WS_RUN = re.compile(r"\s+")


def _normalize_alternative(source: str) -> str:
    return _WS_RUN.sub(" ", source.strip())


def _math_balanced(source: str) -> bool:
    """True when unescaped `$` delimiters pair up."""
    count = 0
    i = 0
    while i < len(source):
        ch = source[i]
        if ch == "\\":
            i += 2
            continue
        if ch == "$":
            count += 1
        i += 1
    return count % 2 == 0


def split_alternatives(pattern: str) -> list[str]:
    """Split on top-level `|`, shielding `$...$` math segments.

    Raises UnbalancedMath when `$` delimiters do not pair.
    """
    if not _math_balanced(pattern):
        raise UnbalancedMath(f"unpaired $ in pattern {pattern!r}")
    parts: list[str] = []
    current: list[str] = []
    in_math = False
    i = 0
    while i < len(pattern):
        ch = pattern[i]
        if ch == "\\" and i + 1 < len(pattern):
            current.append(pattern[i : i + 2])
            i += 2
            continue
        if ch == "$":
            in_math = not in_math
            current.append(ch)
        elif ch == "|" and not in_math:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
        i += 1
    parts.append("".join(current))
    return [p for p in (_normalize_alternative(p) for p in parts) if p]


@dataclass
class ApdEntry:
    """One dictionary record: alternatives plus the keychains they imply.

    The id is opaque and survives edits, so report provenance stays valid
    while a curator rewrites alternatives.
    """

    id: str
    alternatives: tuple[str, ...]
    keychains: tuple[Keychain, ...]
    note: str | None = None


@dataclass
class Apd:
    """The dictionary plus its vocabulary binding."""

    vocabulary: Vocabulary = field(default_factory=Vocabulary)
    _entries: dict[str, ApdEntry] = field(default_factory=dict)
    _next_id: int = 1

    @property
    def entries(self) -> list[ApdEntry]:
        return list(self._entries.values())

    def get(self, entry_id: str) -> ApdEntry | None:
        return self._entries.get(entry_id)

    def _allocate_id(self) -> str:
        while True:
            candidate = f"apd-{self._next_id:04d}"
            self._next_id += 1
            if candidate not in self._entries:
                return candidate

    def _resolve_keychains(self, keychains, *, ingest: bool) -> tuple[Keychain, ...]:
        resolved: list[Keychain] = []
        seen: set[tuple[str, ...]] = set()
        for item in keychains:
            chain = item if isinstance(item, Keychain) else None
            if chain is None:
                if ingest:
                    chain = self.vocabulary.parse_keychain(str(item))
                else:
                    chain = parse_keychain_text(str(item))
            if not ingest and not self.vocabulary.has_keychain(chain):
                raise UnknownKeychain(f"keychain {chain.rendering!r} is not stored")
            if ingest:
                chain = self.vocabulary.parse_keychain(chain.rendering)
            if chain.key not in seen:
                seen.add(chain.key)
                resolved.append(chain)
        if not resolved:
            raise EmptyPattern("an entry needs at least one keychain")
        return tuple(resolved)

    def add_entry(
        self,
        pattern,
        keychains,
        *,
        note: str | None = None,
        entry_id: str | None = None,
        ingest: bool = False,
    ) -> ApdEntry:
        """Store a new entry.

        `pattern` is either one string (split on top-level `|`) or a list of
        alternative strings. Keychains must already exist in the vocabulary
        unless `ingest` is set (the file-loading path, which auto-creates).
        """
        if isinstance(pattern, str):
            alternatives = split_alternatives(pattern)
        else:
            alternatives = []
            for item in pattern:
                alternatives.extend(split_alternatives(str(item)))
        deduped: list[str] = []
        seen: set[str] = set()
        for alt in alternatives:
            key = alt.casefold()
            if key not in seen:
                seen.add(key)
                deduped.append(alt)
        if not deduped:
            raise EmptyPattern("an entry needs at least one non-empty alternative")
        chains = self._resolve_keychains(keychains, ingest=ingest)
        if entry_id is None:
            entry_id = self._allocate_id()
        entry = ApdEntry(id=entry_id, alternatives=tuple(deduped), keychains=chains, note=note)
        self._entries[entry_id] = entry
        return entry

    def replace_entry(
        self, entry_id: str, pattern, keychains, *, note: str | None = None, ingest: bool = False
    ) -> ApdEntry:
        if entry_id not in self._entries:
            raise UnknownKeychain(f"no entry with id {entry_id!r}")
        del self._entries[entry_id]
        return self.add_entry(pattern, keychains, note=note, entry_id=entry_id, ingest=ingest)

    def remove_entry(self, entry_id: str) -> None:
        self._entries.pop(entry_id, None)

    def filter_entries(self, selector: VocabularyFilter | None = None) -> list[ApdEntry]:
        """Manager filter: keychain intersection plus letter/prefix on the
        first alternative. Combined options intersect."""
        selector = selector or VocabularyFilter()
        selector.validate()
        out = []
        for entry in self._entries.values():
            if not selector.accepts_text(entry.alternatives[0]):
                continue
            if selector.keychain_selector is not None:
                wanted = {c.key for c in selector.keychain_selector}
                if not any(c.key in wanted for c in entry.keychains):
                    continue
            out.append(entry)
        return out

    # -- file format ---------------------------------------------------------
    # Line-oriented, bit-exact:
    #
    #   @entry <id>
    #   pattern: <alt-1> | <alt-2> | ...
    #   keys: <keychain-1> ; <keychain-2> ; ...
    #   note: <optional free text>
    #
    # Records separated by blank lines; `#` comments allowed between records.

    def dump(self) -> str:
        blocks = []
        for entry in self._entries.values():
            lines = [
                f"@entry {entry.id}",
                "pattern: " + " | ".join(entry.alternatives),
                "keys: " + " ; ".join(c.rendering for c in entry.keychains),
            ]
            if entry.note is not None:
                lines.append(f"note: {entry.note}")
            blocks.append("\n".join(lines))
        return "\n\n".join(blocks) + ("\n" if blocks else "")

    def load(self, text: str, filename: str | None = None) -> None:
        """Parse records from the bit-exact format. Keychains auto-create
        (ingestion path). Records missing pattern: or keys: are rejected."""
        record: dict[str, str] = {}
        record_line = 0

        def flush() -> None:
            if not record:
                return
            if "pattern" not in record:
                raise ParseError("record missing pattern: line", line=record_line, filename=filename)
            if "keys" not in record:
                raise ParseError("record missing keys: line", line=record_line, filename=filename)
            keys = [k for k in (s.strip() for s in record["keys"].split(";")) if k]
            if not keys:
                raise ParseError("record has empty keys:", line=record_line, filename=filename)
            if record.get("id") in self._entries:
                raise ParseError(f"duplicate entry id {record['id']!r}", line=record_line, filename=filename)
            self.add_entry(
                record["pattern"],
                keys,
                note=record.get("note"),
                entry_id=record.get("id"),
                ingest=True,
            )
            record.clear()

        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.rstrip()
            if not line.strip():
                flush()
                continue
            if line.lstrip().startswith("#"):
                continue
            if line.startswith("@entry"):
                flush()
                record_line = lineno
                entry_id = line[len("@entry") :].strip()
                if not entry_id:
                    raise ParseError("@entry without an id", line=lineno, filename=filename)
                record["id"] = entry_id
                continue
            if ":" not in line:
                raise ParseError(f"unrecognized line {line!r}", line=lineno, filename=filename)
            field_name, _, value = line.partition(":")
            field_name = field_name.strip()
            if field_name not in {"pattern", "keys", "note"}:
                raise ParseError(f"unrecognized field {field_name!r}", line=lineno, filename=filename)
            if not record:
                record_line = lineno
            record[field_name] = value.strip()
        flush()

    def content_hash(self) -> str:
        """Stable identity of the dictionary contents, recorded in reports."""
        return hashlib.sha256(self.dump().encode("utf-8")).hexdigest()


@dataclass
class LintFinding:
    """One lint diagnostic, addressed by entry id."""

    entry_id: str
    kind: str  # "duplicate-alternative" or "compile-failure"
    message: str
    fatal: bool


def lint_apd(apd: Apd, gap_bound: int | None = None) -> list[LintFinding]:
    """Report duplicate alternatives across entries and entries that cannot
    compile. A finding is fatal only when an entry has no usable alternative.
    """
    from .matchengine import DEFAULT_GAP_BOUND, compile_alternative

    bound = DEFAULT_GAP_BOUND if gap_bound is None else gap_bound
    findings: list[LintFinding] = []

    by_alternative: dict[str, list[str]] = {}
    for entry in apd.entries:
        for alt in entry.alternatives:
            by_alternative.setdefault(alt.casefold(), []).append(entry.id)
    for alt_key, ids in sorted(by_alternative.items()):
        if len(ids) > 1:
            findings.append(
                LintFinding(
                    entry_id=ids[0],
                    kind="duplicate-alternative",
                    message=f"alternative {alt_key!r} appears in entries {', '.join(ids)}",
                    fatal=False,
                )
            )

    for entry in apd.entries:
        failures = []
        for alt in entry.alternatives:
            try:
                compile_alternative(alt, gap_bound=bound)
            except Exception as exc:  # UnsupportedConstruct, UnbalancedMath
                failures.append((alt, str(exc)))
        if failures:
            all_fail = len(failures) == len(entry.alternatives)
            detail = "; ".join(f"{alt!r}: {msg}" for alt, msg in failures)
            findings.append(
                LintFinding(
                    entry_id=entry.id,
                    kind="compile-failure",
                    message=f"{'no alternative compiles' if all_fail else 'some alternatives do not compile'}: {detail}",
                    fatal=all_fail,
                )
            )
    return findings
