"""Report comparison: engine output against a reference keychain list.

The comparison output has three zones: keychains both sides agree on,
keychains only the engine produced, and keychains only the reference holds,
the last two separated by a `---` rule. Reference keychains flagged `(0)`
are recorded as irrelevant: they take no part in matching and do not count
against recall.

Precision is the matched share of the engine's keychains, recall the
matched share of the reference's relevant keychains. An empty side scores
1.0 against an equally empty side and 0.0 otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import EmptyCorpus, ParseError, SourceMismatch
from .indexer import IndexReport
from .vocabulary import Keychain, parse_keychain_text

MODE_EXACT = "exact"
MODE_ORDER_INSENSITIVE = "order-insensitive"
_MODES = (MODE_EXACT, MODE_ORDER_INSENSITIVE)

_IRRELEVANT_MARK = "(0)"


@dataclass
class ReferenceReport:
    """A reference keychain list, e.g. one produced by a human indexer."""

    source_id: str = ""
    keychains: list[tuple[Keychain, bool]] = field(default_factory=list)

    def relevant(self) -> list[Keychain]:
        return [kc for kc, irrelevant in self.keychains if not irrelevant]

    def irrelevant(self) -> list[Keychain]:
        return [kc for kc, irrelevant in self.keychains if irrelevant]


@dataclass
class ComparisonResult:
    """Outcome of one engine-versus-reference comparison."""

    source_id: str
    mode: str
    matched: list[tuple[Keychain, Keychain]]
    engine_only: list[Keychain]
    reference_only: list[Keychain]
    irrelevant: list[Keychain]
    precision: float
    recall: float
    partial_overlap: list[tuple[Keychain, Keychain]] = field(default_factory=list)


def _mode_key(keychain: Keychain, mode: str) -> tuple:
    if mode == MODE_EXACT:
        return keychain.key
    return tuple(sorted(keychain.key))


def _ratio(matched: int, own: int, other: int) -> float:
    """matched/own, with empty sides scoring 1.0 only against empty sides."""
    if own == 0:
        return 1.0 if other == 0 else 0.0
    return matched / own


def _engine_keychains(engine, include_manual: bool) -> list[Keychain]:
    if isinstance(engine, IndexReport):
        items = engine.keychains(include_rejected=False, include_manual=include_manual)
    else:
        items = [
            kc if isinstance(kc, Keychain) else parse_keychain_text(str(kc))
            for kc in engine
        ]
    out: list[Keychain] = []
    seen: set[tuple] = set()
    for kc in items:
        if kc.key not in seen:
            seen.add(kc.key)
            out.append(kc)
    return out


def compare(
    engine,
    reference: ReferenceReport,
    mode: str = MODE_EXACT,
    include_manual: bool = False,
) -> ComparisonResult:
    """Match engine keychains against the reference and score the overlap.

    `engine` is an IndexReport (rejected keychains excluded, manual ones
    only when include_manual is set) or a plain iterable of keychains.
    Matching is case-insensitive; exact mode compares keyword sequences,
    order-insensitive mode compares keyword multisets.
    """
    if mode not in _MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(_MODES)}")
    engine_id = engine.source_id if isinstance(engine, IndexReport) else ""
    if engine_id and reference.source_id and engine_id != reference.source_id:
        raise SourceMismatch(
            f"engine report is for {engine_id!r}, reference for {reference.source_id!r}"
        )

    engine_keychains = _engine_keychains(engine, include_manual)
    relevant = reference.relevant()

    by_key: dict[tuple, list[Keychain]] = {}
    for kc in relevant:
        by_key.setdefault(_mode_key(kc, mode), []).append(kc)

    matched: list[tuple[Keychain, Keychain]] = []
    engine_only: list[Keychain] = []
    consumed: set[int] = set()
    for kc in engine_keychains:
        candidates = by_key.get(_mode_key(kc, mode), [])
        hit = None
        for candidate in candidates:
            if id(candidate) not in consumed:
                hit = candidate
                break
        if hit is None:
            engine_only.append(kc)
        else:
            consumed.add(id(hit))
            matched.append((kc, hit))
    reference_only = [kc for kc in relevant if id(kc) not in consumed]

    partial: list[tuple[Keychain, Keychain]] = []
    for left in engine_only:
        left_words = set(left.key)
        for right in reference_only:
            if left_words & set(right.key):
                partial.append((left, right))

    precision = _ratio(len(matched), len(engine_keychains), len(relevant))
    recall = _ratio(len(matched), len(relevant), len(engine_keychains))
    return ComparisonResult(
        source_id=engine_id or reference.source_id,
        mode=mode,
        matched=matched,
        engine_only=engine_only,
        reference_only=reference_only,
        irrelevant=reference.irrelevant(),
        precision=precision,
        recall=recall,
        partial_overlap=partial,
    )


def parse_reference(
    text: str, source_id: str = "", filename: str | None = None
) -> ReferenceReport:
    """Parse a reference file: one keychain per line, `#` comments, blank
    lines ignored, a leading `(0) ` flagging an irrelevant keychain.
    """
    report = ReferenceReport(source_id=source_id)
    seen: set[tuple] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        irrelevant = False
        if line.startswith(_IRRELEVANT_MARK):
            irrelevant = True
            line = line[len(_IRRELEVANT_MARK) :].strip()
        try:
            keychain = parse_keychain_text(line)
        except Exception as exc:
            raise ParseError(str(exc), line=lineno, filename=filename) from None
        if keychain.key in seen:
            raise ParseError(
                f"duplicate keychain {keychain.rendering!r}",
                line=lineno,
                filename=filename,
            )
        seen.add(keychain.key)
        report.keychains.append((keychain, irrelevant))
    return report


def render_reference(report: ReferenceReport) -> str:
    """Render a reference back to its file format."""
    lines = []
    for keychain, irrelevant in report.keychains:
        prefix = _IRRELEVANT_MARK + " " if irrelevant else ""
        lines.append(prefix + keychain.rendering)
    return "\n".join(lines) + ("\n" if lines else "")


def render_comparison(result: ComparisonResult) -> str:
    """The three-zone text layout plus a machine-readable summary line."""
    lines: list[str] = []
    for engine_kc, ref_kc in result.matched:
        if engine_kc.key == ref_kc.key:
            lines.append(engine_kc.rendering)
        else:
            lines.append(f"{engine_kc.rendering} == {ref_kc.rendering}")
    for kc in result.engine_only:
        lines.append(kc.rendering)
    lines.append("---")
    for kc in result.reference_only:
        lines.append(kc.rendering)
    for kc in result.irrelevant:
        lines.append(f"{_IRRELEVANT_MARK} {kc.rendering}")
    lines.append(f"P={result.precision} R={result.recall} mode={result.mode}")
    return "\n".join(lines) + "\n"


@dataclass
class CorpusMetrics:
    """Micro (pooled) and macro (averaged) precision and recall."""

    micro_precision: float
    micro_recall: float
    macro_precision: float
    macro_recall: float
    documents: int


def corpus_metrics(results: list[ComparisonResult]) -> CorpusMetrics:
    """Aggregate per-document comparisons over a corpus."""
    if not results:
        raise EmptyCorpus("no comparison results to aggregate")
    total_matched = sum(len(r.matched) for r in results)
    total_engine = sum(len(r.matched) + len(r.engine_only) for r in results)
    total_reference = sum(len(r.matched) + len(r.reference_only) for r in results)
    return CorpusMetrics(
        micro_precision=_ratio(total_matched, total_engine, total_reference),
        micro_recall=_ratio(total_matched, total_reference, total_engine),
        macro_precision=sum(r.precision for r in results) / len(results),
        macro_recall=sum(r.recall for r in results) / len(results),
        documents=len(results),
    )
