"""Indexing pipeline: preprocessing plus matching folded into a report.

A report is the immutable engine output (which keychains fired, where) plus
a curation overlay: each assigned keychain carries a status that a curator
may flip to confirmed or rejected, and keychains the engine missed can be
inserted manually. The engine's hits are never edited.

Reports render to a bit-exact text format so that repeated runs diff clean:

    # autex-report v1
    source: <source_id>
    apd: <content hash of the dictionary dump>
    pointers: <comma-separated pointer names>
    <keychain rendering>\\t<comma-separated pointer names>\\t<status>

Rows are sorted by each keychain's first hit (pointer order, then slice,
then offset); manually inserted keychains come last with status `manual`.
Rejected keychains are omitted unless the store form is requested.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime, timezone

from .apd import Apd
from .errors import (
    AutexError,
    EmptyApd,
    ParseError,
    UnknownKeychainInReport,
)
from .matchengine import DEFAULT_GAP_BOUND, MatchHit, compile_apd, match_document
from .texprep import POINTER_ORDER, Pointer, extract_parts, parse_pointer
from .vocabulary import Keychain, parse_keychain_text

STATUS_AUTO = "auto"
STATUS_CONFIRMED = "confirmed"
STATUS_REJECTED = "rejected"
_STATUSES = (STATUS_AUTO, STATUS_CONFIRMED, STATUS_REJECTED)

_REPORT_MAGIC = "# autex-report v1"


@dataclass(frozen=True)
class EngineConfig:
    """The parameters a report was produced with."""

    pointers: tuple[Pointer, ...]
    gap_bound: int
    apd_hash: str


@dataclass
class IndexRequest:
    """One document to index: source text plus the parts to look at."""

    source_id: str
    tex_source: str
    pointers: tuple[Pointer, ...]
    apd_snapshot: Apd | None = None

    def __post_init__(self) -> None:
        pointers = []
        for ptr in self.pointers:
            ptr = ptr if isinstance(ptr, Pointer) else parse_pointer(str(ptr))
            if ptr not in pointers:
                pointers.append(ptr)
        if not pointers:
            raise ValueError("at least one pointer is required")
        pointers.sort(key=POINTER_ORDER.index)
        self.pointers = tuple(pointers)


@dataclass
class AssignedKeychain:
    """One keychain in a report, with provenance and curation status."""

    keychain: Keychain
    hits: list[MatchHit] = field(default_factory=list)
    sources: set[Pointer] = field(default_factory=set)
    status: str = STATUS_AUTO
    manual: bool = False

    def __post_init__(self) -> None:
        if self.status not in _STATUSES:
            raise ValueError(f"unknown status {self.status!r}")
        if self.hits and not self.sources:
            self.sources = {h.origin for h in self.hits}

    def first_hit_key(self) -> tuple:
        if not self.hits:
            return (len(POINTER_ORDER), 0, 0)
        return min(
            (POINTER_ORDER.index(h.origin), h.ordinal, h.span[0]) for h in self.hits
        )


@dataclass
class IndexReport:
    """Engine output for one document plus the curation overlay."""

    source_id: str
    assigned: list[AssignedKeychain]
    engine_config: EngineConfig
    generated_at: str = ""

    def get(self, keychain: Keychain | str) -> AssignedKeychain | None:
        key = _as_keychain(keychain).key
        for item in self.assigned:
            if item.keychain.key == key:
                return item
        return None

    def keychains(self, include_rejected: bool = False, include_manual: bool = True):
        out = []
        for item in self.assigned:
            if item.status == STATUS_REJECTED and not include_rejected:
                continue
            if item.manual and not include_manual:
                continue
            out.append(item.keychain)
        return out


def _as_keychain(value: Keychain | str) -> Keychain:
    if isinstance(value, Keychain):
        return value
    return parse_keychain_text(str(value))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# --------------------------------------------------------------------------
# the pipeline

def index_document(
    request: IndexRequest,
    apd: Apd | None = None,
    gap_bound: int = DEFAULT_GAP_BOUND,
) -> IndexReport:
    """Extract the requested parts, run the dictionary, fold hits by keychain.

    Distinct entries contributing the same keychain merge into one assigned
    keychain whose hits aggregate across entries and alternatives. Raises
    MalformedTex for broken input and EmptyApd when the dictionary yields no
    usable pattern at all.
    """
    dictionary = apd if apd is not None else request.apd_snapshot
    if dictionary is None:
        raise ValueError("no dictionary supplied with the request")
    compiled = compile_apd(dictionary, gap_bound=gap_bound, strict=False)
    if not compiled:
        raise EmptyApd("the dictionary has no compilable entries")

    parts = extract_parts(request.tex_source, request.pointers, request.source_id)
    hits = match_document(compiled, parts)

    entries_by_id = {c.entry.id: c.entry for c in compiled}
    by_key: dict[tuple, AssignedKeychain] = {}
    order: list[AssignedKeychain] = []
    for hit in hits:
        entry = entries_by_id[hit.entry_id]
        for keychain in entry.keychains:
            slot = by_key.get(keychain.key)
            if slot is None:
                slot = AssignedKeychain(keychain=keychain)
                by_key[keychain.key] = slot
                order.append(slot)
            slot.hits.append(hit)
            slot.sources.add(hit.origin)

    config = EngineConfig(
        pointers=tuple(request.pointers),
        gap_bound=gap_bound,
        apd_hash=dictionary.content_hash(),
    )
    return IndexReport(
        source_id=request.source_id,
        assigned=order,
        engine_config=config,
        generated_at=_now(),
    )


# --------------------------------------------------------------------------
# process queue

@dataclass
class BatchOutcome:
    """Result of one queued document: a report or an error record."""

    source_id: str
    report: IndexReport | None = None
    error: str | None = None


@dataclass
class ProcessQueue:
    """FIFO queue of documents uploaded but not indexed yet."""

    pending: list[IndexRequest] = field(default_factory=list)

    def is_pending(self, source_id: str) -> bool:
        return any(req.source_id == source_id for req in self.pending)


def enqueue(queue: ProcessQueue, request: IndexRequest) -> ProcessQueue:
    """Append FIFO; a document already pending is left where it is."""
    if not queue.is_pending(request.source_id):
        queue.pending.append(request)
    return queue


def run_batch(
    queue: ProcessQueue,
    apd: Apd | None = None,
    gap_bound: int = DEFAULT_GAP_BOUND,
) -> list[BatchOutcome]:
    """Drain the queue in order. A document that fails leaves an error
    record in its slot; the batch always runs to the end.
    """
    outcomes: list[BatchOutcome] = []
    while queue.pending:
        request = queue.pending.pop(0)
        try:
            report = index_document(request, apd=apd, gap_bound=gap_bound)
            outcomes.append(BatchOutcome(source_id=request.source_id, report=report))
        except (AutexError, ValueError) as exc:
            outcomes.append(BatchOutcome(source_id=request.source_id, error=str(exc)))
    return outcomes


# --------------------------------------------------------------------------
# curation

def apply_correction(
    report: IndexReport, keychain: Keychain | str, new_status: str
) -> IndexReport:
    """Flip one keychain's curation status.

    Confirming a keychain the engine missed inserts it manually, with no
    hits. Rejecting an absent keychain raises UnknownKeychainInReport.
    Resetting to auto undoes a correction; on a manual insertion it removes
    the row, recovering the engine's original report.
    """
    if new_status not in _STATUSES:
        raise ValueError(
            f"unknown status {new_status!r}; expected one of {', '.join(_STATUSES)}"
        )
    target = _as_keychain(keychain)
    item = report.get(target)
    if item is None:
        if new_status == STATUS_CONFIRMED:
            report.assigned.append(
                AssignedKeychain(
                    keychain=target, status=STATUS_CONFIRMED, manual=True
                )
            )
            return report
        raise UnknownKeychainInReport(
            f"keychain {target.rendering!r} is not in the report for "
            f"{report.source_id!r}"
        )
    if new_status == STATUS_AUTO and item.manual:
        report.assigned.remove(item)
        return report
    item.status = new_status
    return report


# --------------------------------------------------------------------------
# bit-exact report format

def render_report(report: IndexReport, include_rejected: bool = False) -> str:
    """Render the canonical report text.

    The canonical form omits rejected keychains; the store form
    (include_rejected=True) keeps them so corrections survive a reload.
    """
    lines = [
        _REPORT_MAGIC,
        f"source: {report.source_id}",
        f"apd: {report.engine_config.apd_hash}",
        "pointers: " + ",".join(p.value for p in report.engine_config.pointers),
    ]
    rows = [
        (item.manual, item.first_hit_key(), idx, item)
        for idx, item in enumerate(report.assigned)
        if include_rejected or item.status != STATUS_REJECTED
    ]
    rows.sort(key=lambda r: r[:3])
    for _, _, _, item in rows:
        sources = ",".join(
            p.value for p in POINTER_ORDER if p in item.sources
        )
        status = "manual" if item.manual else item.status
        lines.append(f"{item.keychain.rendering}\t{sources}\t{status}")
    return "\n".join(lines) + "\n"


def parse_report(text: str, filename: str | None = None) -> IndexReport:
    """Parse a rendered report back into an IndexReport.

    Hit offsets are not persisted; parsed reports carry pointer-level
    provenance only.
    """
    lines = text.splitlines()
    if not lines or lines[0] != _REPORT_MAGIC:
        raise ParseError("not a report file (missing magic line)", line=1, filename=filename)

    def header(idx: int, name: str) -> str:
        if idx >= len(lines) or not lines[idx].startswith(name + ":"):
            raise ParseError(f"expected `{name}:` header", line=idx + 1, filename=filename)
        return lines[idx][len(name) + 1 :].strip()

    source_id = header(1, "source")
    apd_hash = header(2, "apd")
    pointer_field = header(3, "pointers")
    try:
        pointers = tuple(
            parse_pointer(p) for p in pointer_field.split(",") if p.strip()
        )
    except ValueError as exc:
        raise ParseError(str(exc), line=4, filename=filename) from None
    if not pointers:
        raise ParseError("report declares no pointers", line=4, filename=filename)

    assigned: list[AssignedKeychain] = []
    seen: set[tuple] = set()
    for lineno, line in enumerate(lines[4:], start=5):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != 3:
            raise ParseError(
                "report row must be rendering<TAB>pointers<TAB>status",
                line=lineno,
                filename=filename,
            )
        rendering, sources_field, status = cells
        try:
            keychain = parse_keychain_text(rendering)
        except AutexError as exc:
            raise ParseError(str(exc), line=lineno, filename=filename) from None
        if keychain.key in seen:
            raise ParseError(
                f"duplicate keychain {keychain.rendering!r}", line=lineno, filename=filename
            )
        seen.add(keychain.key)
        manual = status == "manual"
        if manual:
            status = STATUS_CONFIRMED
        if status not in _STATUSES:
            raise ParseError(f"unknown status {status!r}", line=lineno, filename=filename)
        try:
            sources = {
                parse_pointer(p) for p in sources_field.split(",") if p.strip()
            }
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno, filename=filename) from None
        assigned.append(
            AssignedKeychain(
                keychain=keychain, sources=sources, status=status, manual=manual
            )
        )

    config = EngineConfig(pointers=pointers, gap_bound=DEFAULT_GAP_BOUND, apd_hash=apd_hash)
    return IndexReport(source_id=source_id, assigned=assigned, engine_config=config)
