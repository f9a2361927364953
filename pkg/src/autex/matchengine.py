"""Pattern compilation and matching.

Each dictionary alternative is compiled to one Python regular expression and
run over a canonical form of the slice text. The pattern dialect is a small,
predictable subset of egrep:

- plain words, matched case-insensitively and only as whole words
  ("mass" never fires inside "massless");
- whitespace or a hyphen between words matches any run of whitespace
  and hyphens, so "electron-positron" and "electron positron" agree;
- `?`, `+` and `*` quantify the preceding character or class;
- `[...]` character classes; a class containing a space acts as a bounded
  gap between words ("massless[ \\w]+neutrinos?" tolerates interleaved
  words up to the gap bound);
- `\\w` stands for a word character;
- `$...$` embeds a formula, matched case-sensitively against normalized
  math and allowed to sit inside a larger formula on token boundaries.

Anything outside the dialect (anchors, groups, backreferences, counted
repetition, negated classes) raises UnsupportedConstruct rather than
silently matching the wrong thing.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass

from .apd import Apd, ApdEntry, split_alternatives
from .errors import UnbalancedMath, UnsupportedConstruct
from .texprep import DocumentParts, Pointer, POINTER_ORDER, TextSlice, normalize_math

# Longest run of interleaved characters a gap class may bridge. Wide enough
# for a parenthetical aside between the gapped words, narrow enough not to
# leap across sentence-sized distances.
DEFAULT_GAP_BOUND = 56

# A word character for boundary purposes is a letter or digit; underscore is
# punctuation here, unlike in raw regex \w.
_L_BOUND = r"(?<![^\W_])"
_R_BOUND = r"(?![^\W_])"
_SEP = r"[\s-]+"

_QUANTIFIERS = "?+*"
_CLASS_ESCAPES = {"w", "s", "d"}


@dataclass(frozen=True)
class CompiledAlternative:
    """One alternative of an entry, ready to run."""

    source: str
    regex: re.Pattern[str]
    index: int = 0


@dataclass(frozen=True)
class CompiledEntry:
    """An entry with all of its usable alternatives compiled."""

    entry: ApdEntry
    alternatives: tuple[CompiledAlternative, ...]


@dataclass(frozen=True)
class MatchHit:
    """One non-overlapping occurrence of an alternative in a slice.

    span is relative to the slice text; hits that fall inside a formula
    cover the whole `$...$` segment.
    """

    entry_id: str
    alternative_index: int
    origin: Pointer
    span: tuple[int, int]
    ordinal: int = 0


# --------------------------------------------------------------------------
# compilation

def _parse_class(source: str, i: int) -> tuple[str, bool, int]:
    """Parse `[...]` starting at i. Returns (interior regex, has_space, next_i)."""
    assert source[i] == "["
    i += 1
    if i < len(source) and source[i] == "^":
        raise UnsupportedConstruct("negated character classes are not supported")
    parts: list[str] = []
    has_space = False
    closed = False
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "]":
            closed = True
            i += 1
            break
        if ch == "[":
            raise UnsupportedConstruct("nested character classes are not supported")
        if ch == "\\":
            if i + 1 >= n:
                raise UnsupportedConstruct("trailing backslash in character class")
            esc = source[i + 1]
            if esc in _CLASS_ESCAPES:
                parts.append("\\" + esc)
                if esc == "s":
                    has_space = True
            elif esc.isalnum():
                raise UnsupportedConstruct(f"unknown escape \\{esc} in character class")
            else:
                parts.append(re.escape(esc))
            i += 2
            continue
        if ch == " ":
            has_space = True
            parts.append(" ")
        elif ch.isalnum() or ch == "-":
            # kept raw so ranges like a-z and a trailing hyphen both work
            parts.append(ch)
        else:
            parts.append(re.escape(ch))
        i += 1
    if not closed:
        raise UnsupportedConstruct("character class never closes")
    if not parts:
        raise UnsupportedConstruct("empty character class")
    return "".join(parts), has_space, i


def _parse_math(source: str, i: int) -> tuple[str, int]:
    """Parse `$...$` starting at i. Returns (normalized interior, next_i)."""
    assert source[i] == "$"
    end = source.find("$", i + 1)
    if end == -1:
        raise UnbalancedMath(f"unbalanced $ in pattern {source!r}")
    interior = source[i + 1 : end]
    normalized = normalize_math(interior)
    if not normalized:
        raise UnsupportedConstruct("empty formula in pattern")
    return normalized, end + 1


def _math_regex(normalized: str) -> str:
    # the formula may be the whole segment or sit inside a larger one,
    # but only on token boundaries
    return r"\$(?:[^$]* )?" + re.escape(normalized) + r"(?: [^$]*)?\$"


def compile_alternative(
    source: str, gap_bound: int = DEFAULT_GAP_BOUND, index: int = 0
) -> CompiledAlternative:
    """Compile one alternative to a regular expression.

    Raises UnsupportedConstruct for anything outside the pattern dialect and
    UnbalancedMath for an unclosed formula.
    """
    if gap_bound < 1:
        raise ValueError("gap bound must be at least 1")
    text = source.strip()
    if not text:
        raise UnsupportedConstruct("empty alternative")

    # units: ("word", [atom, ...]) | ("punct", [fragment]) | ("sep",) |
    #        ("gap", fragment) | ("math", fragment)
    units: list[tuple] = []
    n = len(text)
    i = 0

    def last_kind() -> str | None:
        return units[-1][0] if units else None

    while i < n:
        ch = text[i]
        if ch == "$":
            normalized, i = _parse_math(text, i)
            units.append(("math", _math_regex(normalized)))
            continue
        if ch.isspace() or ch == "-":
            i += 1
            while i < n and (text[i].isspace() or text[i] == "-"):
                i += 1
            if last_kind() not in (None, "sep", "gap"):
                units.append(("sep",))
            continue
        if ch == "[":
            interior, has_space, i = _parse_class(text, i)
            quant = ""
            if i < n and text[i] in _QUANTIFIERS:
                quant = text[i]
                i += 1
            if has_space:
                if quant == "+":
                    bound = f"{{1,{gap_bound}}}"
                elif quant == "*":
                    bound = f"{{0,{gap_bound}}}"
                elif quant == "?":
                    bound = "{0,1}"
                else:
                    bound = ""
                units.append(("gap", "[" + interior + "]" + bound))
            else:
                atom = "[" + interior + "]" + quant
                if last_kind() == "word":
                    units[-1][1].append(atom)
                else:
                    units.append(("word", [atom]))
            continue
        if ch in _QUANTIFIERS:
            kind = last_kind()
            if kind == "word":
                atoms = units[-1][1]
                if atoms[-1][-1] in _QUANTIFIERS:
                    raise UnsupportedConstruct("quantifier applied to a quantifier")
                atoms[-1] = atoms[-1] + ch
            elif kind == "punct":
                frag = units[-1][1]
                if frag[-1][-1] in _QUANTIFIERS:
                    raise UnsupportedConstruct("quantifier applied to a quantifier")
                frag[-1] = frag[-1] + ch
            else:
                raise UnsupportedConstruct(f"quantifier {ch!r} has nothing to repeat")
            i += 1
            continue
        if ch == "\\":
            if i + 1 >= n:
                raise UnsupportedConstruct("trailing backslash")
            esc = text[i + 1]
            if esc == "w":
                if last_kind() == "word":
                    units[-1][1].append(r"\w")
                else:
                    units.append(("word", [r"\w"]))
                i += 2
                continue
            if esc.isdigit():
                raise UnsupportedConstruct("backreferences are not supported")
            if esc.isalnum():
                raise UnsupportedConstruct(f"unknown escape \\{esc}")
            # escaped punctuation is that literal character
            if last_kind() == "punct":
                units[-1][1].append(re.escape(esc))
            else:
                units.append(("punct", [re.escape(esc)]))
            i += 2
            continue
        if ch in "(){}^|":
            if ch in "{}":
                raise UnsupportedConstruct("counted repetition is not supported")
            if ch == "^":
                raise UnsupportedConstruct("anchors are not supported")
            if ch == "|":
                raise UnsupportedConstruct("alternation must be split before compiling")
            # literal parentheses
            if last_kind() == "punct":
                units[-1][1].append(re.escape(ch))
            else:
                units.append(("punct", [re.escape(ch)]))
            i += 1
            continue
        if ch == "." or ch.isalnum():
            # '.' is a literal dot in this dialect
            atom = re.escape(ch)
            if last_kind() == "word":
                units[-1][1].append(atom)
            else:
                units.append(("word", [atom]))
            i += 1
            continue
        # remaining punctuation: literal
        if last_kind() == "punct":
            units[-1][1].append(re.escape(ch))
        else:
            units.append(("punct", [re.escape(ch)]))
        i += 1
        continue

    while units and units[-1][0] == "sep":
        units.pop()
    if not units:
        raise UnsupportedConstruct("empty alternative")
    if all(kind in ("sep", "gap") for kind, *_ in units):
        raise UnsupportedConstruct("alternative has no matchable content")

    fragments: list[str] = []
    for unit in units:
        kind = unit[0]
        if kind == "word":
            fragments.append(_L_BOUND + "(?i:" + "".join(unit[1]) + ")" + _R_BOUND)
        elif kind == "punct":
            fragments.append("".join(unit[1]))
        elif kind == "sep":
            fragments.append(_SEP)
        elif kind == "gap":
            fragments.append(unit[1])
        else:  # math
            fragments.append(unit[1])
    try:
        regex = re.compile("".join(fragments))
    except re.error as exc:  # pragma: no cover - the parser should prevent this
        raise UnsupportedConstruct(f"cannot compile {source!r}: {exc}") from exc
    return CompiledAlternative(source=text, regex=regex, index=index)


def check_pattern(pattern, gap_bound: int = DEFAULT_GAP_BOUND) -> None:
    """Raise if any alternative of a pattern fails to compile.

    For interactive boundaries that should reject a bad pattern on entry
    instead of leaving a dead dictionary row for the linter to find.
    """
    alternatives = (
        split_alternatives(pattern) if isinstance(pattern, str) else list(pattern)
    )
    for alternative in alternatives:
        compile_alternative(alternative, gap_bound=gap_bound)


def compile_entry(
    entry: ApdEntry, gap_bound: int = DEFAULT_GAP_BOUND, strict: bool = True
) -> CompiledEntry:
    """Compile an entry's alternatives.

    strict=True raises on the first bad alternative. strict=False keeps the
    usable alternatives and leaves rejects to the linter; the result may have
    no alternatives at all.
    """
    compiled: list[CompiledAlternative] = []
    for idx, alt in enumerate(entry.alternatives):
        try:
            compiled.append(compile_alternative(alt, gap_bound=gap_bound, index=idx))
        except (UnsupportedConstruct, UnbalancedMath):
            if strict:
                raise
    return CompiledEntry(entry=entry, alternatives=tuple(compiled))


def compile_apd(
    apd: Apd, gap_bound: int = DEFAULT_GAP_BOUND, strict: bool = True
) -> list[CompiledEntry]:
    """Compile a whole dictionary in entry order.

    With strict=False, entries that end up with no usable alternative are
    dropped from the result.
    """
    out = []
    for entry in apd.entries:
        compiled = compile_entry(entry, gap_bound=gap_bound, strict=strict)
        if compiled.alternatives:
            out.append(compiled)
    return out


# --------------------------------------------------------------------------
# canonical match text

@dataclass(frozen=True)
class _Piece:
    m_start: int
    m_end: int
    s_start: int
    s_end: int
    is_math: bool


def build_match_text(slice_text: str) -> tuple[str, list[_Piece]]:
    """Canonicalize a slice for matching.

    Formula interiors are replaced by their normalized token stream so that
    pattern formulas and document formulas compare in one spelling. The piece
    table maps positions in the canonical text back to the original slice.
    """
    pieces: list[_Piece] = []
    out: list[str] = []
    m_cursor = 0

    def emit(chunk: str, s_start: int, s_end: int, is_math: bool) -> None:
        nonlocal m_cursor
        if not chunk and not is_math:
            return
        pieces.append(_Piece(m_cursor, m_cursor + len(chunk), s_start, s_end, is_math))
        out.append(chunk)
        m_cursor += len(chunk)

    i = 0
    n = len(slice_text)
    plain_start = 0
    while i < n:
        ch = slice_text[i]
        if ch == "\\":
            i += 2
            continue
        if ch == "$":
            end = i + 1
            while end < n:
                if slice_text[end] == "\\":
                    end += 2
                    continue
                if slice_text[end] == "$":
                    break
                end += 1
            if end >= n:
                # lone dollar: leave the rest as plain text
                i += 1
                continue
            emit(slice_text[plain_start:i], plain_start, i, False)
            interior = slice_text[i + 1 : end]
            emit("$" + normalize_math(interior) + "$", i, end + 1, True)
            i = end + 1
            plain_start = i
            continue
        i += 1
    emit(slice_text[plain_start:n], plain_start, n, False)
    return "".join(out), pieces


def _map_span(a: int, b: int, pieces: list[_Piece]) -> tuple[int, int]:
    """Translate a span in canonical coordinates to slice coordinates."""
    starts = [p.m_start for p in pieces]

    def locate(pos: int) -> _Piece:
        idx = bisect_right(starts, pos) - 1
        idx = max(0, min(idx, len(pieces) - 1))
        return pieces[idx]

    pa = locate(a)
    s_a = pa.s_start if pa.is_math else pa.s_start + (a - pa.m_start)
    pb = locate(max(a, b - 1))
    s_b = pb.s_end if pb.is_math else pb.s_start + (b - pb.m_start)
    return (s_a, s_b)


# --------------------------------------------------------------------------
# matching

def match_slice(entries, text_slice: TextSlice) -> list[MatchHit]:
    """All non-overlapping hits of all alternatives in one slice.

    Each alternative scans independently, leftmost first; hits are returned
    sorted by position, then entry id, then alternative index.
    """
    m_text, pieces = build_match_text(text_slice.text)
    hits: list[MatchHit] = []
    for compiled in entries:
        for alt in compiled.alternatives:
            for m in alt.regex.finditer(m_text):
                span = _map_span(m.start(), m.end(), pieces)
                hits.append(
                    MatchHit(
                        entry_id=compiled.entry.id,
                        alternative_index=alt.index,
                        origin=text_slice.origin,
                        span=span,
                        ordinal=text_slice.ordinal,
                    )
                )
    hits.sort(key=lambda h: (h.span[0], h.span[1], h.entry_id, h.alternative_index))
    return hits


def match_document(entries, parts: DocumentParts) -> list[MatchHit]:
    """All hits across a document's extracted parts.

    Hits come back grouped by pointer in the fixed pointer order, then by
    slice ordinal, then by position inside the slice.
    """
    entries = list(entries)
    hits: list[MatchHit] = []
    for ptr in POINTER_ORDER:
        for text_slice in parts.slices.get(ptr, []):
            hits.extend(match_slice(entries, text_slice))
    return hits
