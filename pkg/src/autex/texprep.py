"""Preprocessing phase: part extraction and TeX pruning.

A document is treated as a stream of characters. Six pointers name the parts
that can be fed to the matcher: title, abstract, caption, section (titles
only, at every depth), conclusions (body of the section whose title says so),
and full-text. Extracted parts are pruned: formatting commands disappear or
unwrap, while `$...$` math segments survive verbatim apart from whitespace
collapsing, so formula patterns can still match.

Pruning is idempotent: running it twice equals running it once. That holds
because the output contains no comments, no braces outside math, no known
commands, and already-collapsed whitespace.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import MalformedTex


class Pointer(str, Enum):
    """The closed set of six part selectors."""

    TITLE = "title"
    ABSTRACT = "abstract"
    CAPTION = "caption"
    SECTION = "section"
    CONCLUSIONS = "conclusions"
    FULL_TEXT = "full-text"

    def __str__(self) -> str:  # pragma: no cover - cosmetic
        return self.value


POINTER_ORDER: tuple[Pointer, ...] = (
    Pointer.TITLE,
    Pointer.ABSTRACT,
    Pointer.CAPTION,
    Pointer.SECTION,
    Pointer.CONCLUSIONS,
    Pointer.FULL_TEXT,
)


def parse_pointer(name: str) -> Pointer:
    name = name.strip().casefold()
    for ptr in Pointer:
        if ptr.value == name:
            return ptr
    legal = ", ".join(p.value for p in POINTER_ORDER)
    raise ValueError(f"unknown pointer {name!r}; legal pointers are: {legal}")


@dataclass(frozen=True)
class TextSlice:
    """One extracted, pruned piece of text with provenance.

    span is the slice's character range in a virtual stream formed by laying
    the requested parts out in pointer order; hit offsets reported by the
    matcher are relative to the slice itself.
    """

    text: str
    origin: Pointer
    span: tuple[int, int]
    ordinal: int


@dataclass
class DocumentParts:
    """All slices extracted from one document, keyed by pointer."""

    source_id: str
    slices: dict[Pointer, list[TextSlice]] = field(default_factory=dict)

    def all_slices(self) -> list[TextSlice]:
        out: list[TextSlice] = []
        for ptr in POINTER_ORDER:
            out.extend(self.slices.get(ptr, []))
        return out


# --------------------------------------------------------------------------
# comments

def strip_comments(raw: str) -> str:
    """Remove `%` comments (to end of line), honouring backslash escapes.

    `\\%` is a literal percent and survives. The newline itself survives so
    words on adjacent lines do not fuse.
    """
    out_lines = []
    for line in raw.split("\n"):
        cut = None
        i = 0
        while i < len(line):
            ch = line[i]
            if ch == "\\":
                i += 2
                continue
            if ch == "%":
                cut = i
                break
            i += 1
        out_lines.append(line if cut is None else line[:cut])
    return "\n".join(out_lines)


# --------------------------------------------------------------------------
# math protection

_MATH_ENVS = ("equation", "displaymath", "eqnarray", "align", "multline", "gather")


def _find_math_segments(text: str) -> list[tuple[int, int, str]]:
    """Locate math segments in comment-free text.

    Returns (start, end, interior) for `$...$`, `$$...$$`, `\\(...\\)`,
    `\\[...\\]` and the common display environments. Display forms normalize
    to inline interiors so the matcher sees a single math syntax.
    """
    segments: list[tuple[int, int, str]] = []
    i = 0
    n = len(text)
    env_re = re.compile(r"\\begin\{(" + "|".join(_MATH_ENVS) + r")\*?\}")
    while i < n:
        ch = text[i]
        if ch == "\\":
            nxt = text[i + 1] if i + 1 < n else ""
            if nxt == "(" or nxt == "[":
                closer = "\\)" if nxt == "(" else "\\]"
                end = text.find(closer, i + 2)
                if end == -1:
                    i += 2
                    continue
                segments.append((i, end + 2, text[i + 2 : end]))
                i = end + 2
                continue
            if text.startswith("\\begin{", i):
                m = env_re.match(text, i)
                if m:
                    env = m.group(1)
                    close = re.compile(r"\\end\{" + env + r"\*?\}")
                    mm = close.search(text, m.end())
                    if mm:
                        segments.append((i, mm.end(), text[m.end() : mm.start()]))
                        i = mm.end()
                        continue
            i += 2
            continue
        if ch == "$":
            if text.startswith("$$", i):
                end = text.find("$$", i + 2)
                if end == -1:
                    i += 2
                    continue
                segments.append((i, end + 2, text[i + 2 : end]))
                i = end + 2
                continue
            end = i + 1
            while end < n:
                if text[end] == "\\":
                    end += 2
                    continue
                if text[end] == "$":
                    break
                end += 1
            if end >= n:
                i += 1
                continue
            segments.append((i, end + 1, text[i + 1 : end]))
            i = end + 1
            continue
        i += 1
    return segments


# --------------------------------------------------------------------------
# pruning

# Commands removed together with their brace argument(s). The count is the
# number of mandatory arguments consumed; optional [..] arguments are eaten
# wherever they appear between them.
_DROP_WITH_ARGS = {
    "label": 1, "ref": 1, "eqref": 1, "pageref": 1, "cite": 1, "nocite": 1,
    "index": 1, "bibliographystyle": 1, "bibliography": 1, "input": 1,
    "include": 1, "includegraphics": 1, "epsffile": 1, "documentclass": 1,
    "usepackage": 1, "hspace": 1, "vspace": 1, "thanks": 1, "setcounter": 2,
    "addtocounter": 2, "renewcommand": 2, "newcommand": 2, "setlength": 2,
    "addcontentsline": 3,
}

# Bare commands deleted outright (no argument).
_DROP_BARE = {
    "maketitle", "noindent", "newpage", "clearpage", "bigskip", "medskip",
    "smallskip", "hline", "centering", "raggedright", "raggedleft",
    "tableofcontents", "appendix", "item", "indent", "par", "relax",
    "displaystyle", "limits", "nolimits", "allowbreak", "sloppy", "dots",
    "ldots", "protect", "hfill", "vfill", "break", "linebreak", "pagebreak",
}

# Font and size switches: the token vanishes, surrounding text stays.
_FONT_SWITCHES = {
    "it", "bf", "rm", "sl", "sc", "tt", "em", "sf", "itshape", "bfseries",
    "rmfamily", "sffamily", "ttfamily", "scshape", "slshape", "upshape",
    "mdseries", "normalfont", "tiny", "scriptsize", "footnotesize", "small",
    "normalsize", "large", "Large", "LARGE", "huge", "Huge", "boldmath",
    "unboldmath",
}

# Any other command followed by a brace group unwraps: the token goes away
# and the group's content stays in the stream. That covers \textit, \emph,
# \mbox, \footnote, \section and the long tail of unknown macros alike.

_LITERALS = {
    "TeX": "TeX", "LaTeX": "LaTeX", "LaTeXe": "LaTeX",
    "&": "&", "%": "\\%", "_": "_", "#": "#",
    ",": " ", ";": " ", ":": " ", "!": "", "/": "", "-": "",
    "quad": " ", "qquad": " ", "thinspace": " ", "enspace": " ",
    " ": " ",
}

# Accent commands reduce to their base letter.
_ACCENTS = {"'", "`", '"', "^", "~", "=", ".", "u", "v", "H", "c", "k", "b", "d", "r", "t"}

_CONTROL_WORD = re.compile(r"\\([a-zA-Z]+)\s*")
_ENV_TOKEN = re.compile(r"\\(begin|end)\{([^{}]*)\}\s*")


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i].isspace():
        i += 1
    return i


def _skip_optional(text: str, i: int) -> int:
    """Advance past a `[...]` optional argument, if present."""
    i = _skip_ws(text, i)
    if i < len(text) and text[i] == "[":
        depth = 0
        while i < len(text):
            if text[i] == "[":
                depth += 1
            elif text[i] == "]":
                depth -= 1
                if depth == 0:
                    return i + 1
            i += 1
    return i


def _read_group(text: str, i: int) -> tuple[str, int] | None:
    """Read a balanced `{...}` group starting at i; returns (body, next_i)."""
    if i >= len(text) or text[i] != "{":
        return None
    depth = 0
    j = i
    while j < len(text):
        ch = text[j]
        if ch == "\\":
            j += 2
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return text[i + 1 : j], j + 1
        j += 1
    raise MalformedTex("brace group never closes")


def _prune_nonmath(text: str) -> str:
    """Prune one stretch of text that contains no math segments."""
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\\":
            nxt = text[i + 1] if i + 1 < n else ""
            # control symbols
            if nxt == "\\":
                i += 2
                if i < n and text[i] == "*":
                    i += 1
                out.append(" ")
                continue
            if nxt == "$":
                out.append("\\$")
                i += 2
                continue
            if nxt in _ACCENTS and not nxt.isalpha():
                # \'e or \'{e}: keep the base letter
                i += 2
                grp = _read_group(text, i) if i < n and text[i] == "{" else None
                if grp is not None:
                    out.append(grp[0])
                    i = grp[1]
                continue
            if nxt in _LITERALS and not nxt.isalpha():
                out.append(_LITERALS[nxt])
                i += 2
                continue
            if nxt == "{" or nxt == "}":
                out.append(text[i : i + 2])
                i += 2
                continue
            m = _ENV_TOKEN.match(text, i)
            if m:
                # environment markers vanish; their bodies stay in the stream
                i = m.end()
                if m.group(1) == "begin":
                    i = _skip_optional(text, i)
                continue
            m = _CONTROL_WORD.match(text, i)
            if m:
                name = m.group(1)
                i = m.end()
                if name in _LITERALS:
                    out.append(_LITERALS[name])
                    # an empty group after a literal (\TeX{}) is part of the call
                    if i < n and text.startswith("{}", i):
                        i += 2
                    continue
                if name in _FONT_SWITCHES or name in _DROP_BARE:
                    out.append(" ")
                    continue
                if name in _ACCENTS:
                    grp = _read_group(text, i) if i < n and text[i] == "{" else None
                    if grp is not None:
                        out.append(grp[0])
                        i = grp[1]
                    continue
                if name in _DROP_WITH_ARGS:
                    count = _DROP_WITH_ARGS[name]
                    if i < n and text[i] == "*":
                        i += 1
                    for _ in range(count):
                        i = _skip_optional(text, i)
                        grp = _read_group(text, i)
                        if grp is None:
                            break
                        i = grp[1]
                    i = _skip_optional(text, i)
                    out.append(" ")
                    continue
                # unknown or unwrap command: keep a following group's content,
                # delete the bare token otherwise
                if i < n and text[i] == "*":
                    i += 1
                i = _skip_optional(text, i)
                if i < n and text[i] == "{":
                    # leave the group to the brace pass below: content is kept
                    out.append(" ")
                    continue
                out.append(" ")
                continue
            # lone backslash before something unhandled: drop the pair
            i += 2
            continue
        if ch == "{" or ch == "}":
            # bare group delimiters carry no text; balance was pre-checked
            i += 1
            continue
        if ch == "~":
            out.append(" ")
            i += 1
            continue
        if ch == "-" and text.startswith("--", i):
            out.append("-")
            i += 3 if text.startswith("---", i) else 2
            continue
        if ch == "`":
            out.append(" ")
            i += 2 if text.startswith("``", i) else 1
            continue
        if ch == "'" and text.startswith("''", i):
            out.append(" ")
            i += 2
            continue
        out.append(ch)
        i += 1
    return "".join(out)


def _check_braces(text: str, math_spans: list[tuple[int, int, str]]) -> None:
    """Raise MalformedTex when braces outside math segments do not balance."""
    spans = iter(math_spans)
    current = next(spans, None)
    depth = 0
    i = 0
    n = len(text)
    while i < n:
        while current is not None and i >= current[1]:
            current = next(spans, None)
        if current is not None and current[0] <= i < current[1]:
            i = current[1]
            continue
        ch = text[i]
        if ch == "\\":
            i += 2
            continue
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth < 0:
                raise MalformedTex("unbalanced closing brace")
        i += 1
    if depth != 0:
        raise MalformedTex("brace nesting never closes")


def _collapse_ws(text: str) -> str:
    return re.sub(r"\s+", " ", text).strip()


def prune_tex(raw: str) -> str:
    """Strip comments and irrelevant commands, keeping visible text and math.

    Math segments keep their `$` delimiters; display math becomes inline.
    Raises MalformedTex on unbalanced braces outside math.
    """
    text = strip_comments(raw)
    math = _find_math_segments(text)
    _check_braces(text, math)
    pieces: list[str] = []
    cursor = 0
    for start, end, interior in math:
        pieces.append(_prune_nonmath(text[cursor:start]))
        pieces.append("$" + _collapse_ws(interior) + "$")
        cursor = end
    pieces.append(_prune_nonmath(text[cursor:]))
    return _collapse_ws(" ".join(pieces))


# --------------------------------------------------------------------------
# math normalization

# Visually identical control words map onto one spelling.
_MATH_ALIASES = {
    "rightarrow": "to",
    "longrightarrow": "to",
    "overline": "bar",
}

# Pure spacing commands vanish from the token stream.
_MATH_SPACING = {"", ",", ";", "!", ":", ">", "quad", "qquad", "thinspace",
                 "displaystyle", "textstyle", "scriptstyle", "limits", "nolimits",
                 "left", "right", "big", "Big", "bigg", "Bigg", "bigl", "bigr",
                 "Bigl", "Bigr", "biggl", "biggr"}


def normalize_math(segment: str) -> str:
    """Render a math interior as a canonical space-separated token stream.

    Tokens are TeX control words, control symbols, single characters, and
    sub/superscript operators. Singleton brace groups unwrap (x^{2} == x^2);
    unknown control words pass through verbatim.
    """
    tokens: list[str] = []
    i = 0
    n = len(segment)
    while i < n:
        ch = segment[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "\\":
            nxt = segment[i + 1] if i + 1 < n else ""
            if nxt.isalpha():
                j = i + 1
                while j < n and segment[j].isalpha():
                    j += 1
                name = segment[i + 1 : j]
                if name in _MATH_SPACING:
                    i = j
                    continue
                tokens.append("\\" + _MATH_ALIASES.get(name, name))
                i = j
                continue
            if nxt in _MATH_SPACING:
                i += 2
                continue
            tokens.append(segment[i : i + 2])
            i += 2
            continue
        if ch == "{" or ch == "}" or ch == "^" or ch == "_":
            tokens.append(ch)
            i += 1
            continue
        tokens.append(ch)
        i += 1

    # unwrap singleton brace groups so x^{2} and x^2 compare equal
    changed = True
    while changed:
        changed = False
        out: list[str] = []
        i = 0
        while i < len(tokens):
            if (
                tokens[i] == "{"
                and i + 2 < len(tokens)
                and tokens[i + 2] == "}"
                and tokens[i + 1] not in ("{", "}")
            ):
                out.append(tokens[i + 1])
                i += 3
                changed = True
            else:
                out.append(tokens[i])
                i += 1
        tokens = out
    return " ".join(tokens)


# --------------------------------------------------------------------------
# part extraction

_TITLE_CMD = re.compile(r"\\title\s*(\[)?")
_CAPTION_CMD = re.compile(r"\\caption\s*(\[)?")
_SECTION_CMD = re.compile(
    r"\\(chapter|section|subsection|subsubsection|paragraph|subparagraph)\*?\s*"
)
_CONCLUSION_MARKERS = ("conclusion", "concluding remarks")


def _command_args(text: str, m: re.Match) -> tuple[str, int] | None:
    """Extract the mandatory argument of a sectioning-like command match."""
    i = m.end(0)
    if m.lastindex and m.group(m.lastindex) == "[":
        i = _skip_optional(text, m.start(m.lastindex))
    grp = _read_group(text, _skip_ws(text, i))
    if grp is None:
        return None
    return grp


def _env_body(text: str, env: str) -> list[tuple[int, str]]:
    """All bodies of \\begin{env}...\\end{env}, with their offsets."""
    out = []
    begin_re = re.compile(r"\\begin\s*\{\s*" + env + r"\s*\}")
    end_re = re.compile(r"\\end\s*\{\s*" + env + r"\s*\}")
    pos = 0
    while True:
        m = begin_re.search(text, pos)
        if not m:
            break
        mm = end_re.search(text, m.end())
        if not mm:
            out.append((m.end(), text[m.end() :]))
            break
        out.append((m.end(), text[m.end() : mm.start()]))
        pos = mm.end()
    return out


def _section_heads(text: str) -> list[tuple[int, int, str]]:
    """Every sectioning command: (start of command, end of title arg, title)."""
    out = []
    for m in _SECTION_CMD.finditer(text):
        if m.start() > 0 and text[m.start() - 1] == "\\":
            continue
        i = m.end()
        if i < len(text) and text[i] == "*":
            i += 1
        i = _skip_optional(text, i)
        grp = _read_group(text, _skip_ws(text, i))
        if grp is None:
            continue
        out.append((m.start(), grp[1], grp[0]))
    return out


def extract_parts(tex_source: str, pointers, source_id: str = "") -> DocumentParts:
    """Extract and prune the parts named by the requested pointers.

    A requested pointer with no matching construct yields an empty slice
    list. Raises MalformedTex (via prune_tex) on broken brace nesting.
    """
    requested = []
    for ptr in pointers:
        ptr = ptr if isinstance(ptr, Pointer) else parse_pointer(str(ptr))
        if ptr not in requested:
            requested.append(ptr)
    if not requested:
        raise ValueError("at least one pointer is required")
    requested.sort(key=POINTER_ORDER.index)

    text = strip_comments(tex_source)
    parts = DocumentParts(source_id=source_id)
    raw_parts: dict[Pointer, list[str]] = {ptr: [] for ptr in requested}

    doc_bodies = _env_body(text, "document")
    body = doc_bodies[0][1] if doc_bodies else text

    for ptr in requested:
        if ptr is Pointer.TITLE:
            m = _TITLE_CMD.search(text)
            if m and not (m.start() > 0 and text[m.start() - 1] == "\\"):
                grp = _command_args(text, m)
                if grp is not None:
                    raw_parts[ptr].append(grp[0])
        elif ptr is Pointer.ABSTRACT:
            for _, chunk in _env_body(text, "abstract"):
                raw_parts[ptr].append(chunk)
        elif ptr is Pointer.CAPTION:
            for m in _CAPTION_CMD.finditer(text):
                if m.start() > 0 and text[m.start() - 1] == "\\":
                    continue
                grp = _command_args(text, m)
                if grp is not None:
                    raw_parts[ptr].append(grp[0])
        elif ptr is Pointer.SECTION:
            for _, _, title in _section_heads(body):
                raw_parts[ptr].append(title)
        elif ptr is Pointer.CONCLUSIONS:
            heads = _section_heads(body)
            stops = [h[0] for h in heads]
            for idx, (start, arg_end, title) in enumerate(heads):
                pruned_title = prune_tex(title).casefold()
                if not any(marker in pruned_title for marker in _CONCLUSION_MARKERS):
                    continue
                end = len(body)
                for stop in stops:
                    if stop > start:
                        end = stop
                        break
                for terminator in (r"\appendix", r"\begin{thebibliography}", r"\end{document}"):
                    t = body.find(terminator, arg_end)
                    if t != -1 and t < end:
                        end = t
                raw_parts[ptr].append(body[arg_end:end])
        elif ptr is Pointer.FULL_TEXT:
            raw_parts[ptr].append(body)

    cursor = 0
    for ptr in requested:
        slices: list[TextSlice] = []
        for chunk in raw_parts[ptr]:
            pruned = prune_tex(chunk)
            if not pruned:
                continue
            span = (cursor, cursor + len(pruned))
            slices.append(TextSlice(text=pruned, origin=ptr, span=span, ordinal=len(slices)))
            cursor = span[1] + 1
        parts.slices[ptr] = slices
    return parts
