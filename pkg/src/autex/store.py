"""File-backed persistence for the vocabulary, dictionary, articles,
reports, and the process queue.

Everything lives under one store root as plain text in the bit-exact
formats the domain modules define, so a store diffs cleanly under version
control. Every write goes to a temporary file in the same directory and is
renamed into place, so a reader never observes a half-written file and a
crash never corrupts a store.

A single-writer lock file at `<root>/lock` keeps two processes from
mutating one store at the same time.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .apd import Apd
from .errors import CorruptStore, ParseError, StoreLocked
from .indexer import IndexReport, parse_report, render_report
from .texprep import Pointer, parse_pointer
from .vocabulary import Vocabulary

_SLUG_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")


def slugify(source_id: str) -> str:
    """A filesystem-safe name for a source id (hep-ph/0106157 and friends)."""
    return _SLUG_UNSAFE.sub("_", source_id.replace("/", "__"))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class ArticleRecord:
    """One uploaded document with its profile."""

    source_id: str
    tex_source: str
    profile: dict = field(default_factory=dict)
    uploaded_at: str = ""
    revision: int = 1

    def meta(self) -> dict:
        return {
            "source_id": self.source_id,
            "profile": {
                "slac_id": self.profile.get("slac_id"),
                "prefix": self.profile.get("prefix"),
            },
            "uploaded_at": self.uploaded_at,
            "revision": self.revision,
        }


@dataclass
class QueueRow:
    """One pending queue entry, by reference to a stored article."""

    source_id: str
    pointers: tuple[Pointer, ...]


class Store:
    """A store root opened into memory, with explicit save points."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.vocabulary = Vocabulary()
        self.apd = Apd(vocabulary=self.vocabulary)
        self.articles: dict[str, ArticleRecord] = {}
        self.reports: dict[str, IndexReport] = {}
        self.queue: list[QueueRow] = []

    # -- paths ---------------------------------------------------------

    @property
    def keywords_path(self) -> Path:
        return self.root / "keywords.txt"

    @property
    def keychains_path(self) -> Path:
        return self.root / "keychains.txt"

    @property
    def apd_path(self) -> Path:
        return self.root / "apd.txt"

    @property
    def queue_path(self) -> Path:
        return self.root / "queue.txt"

    @property
    def lock_path(self) -> Path:
        return self.root / "lock"

    def article_tex_path(self, source_id: str) -> Path:
        return self.root / "articles" / (slugify(source_id) + ".tex")

    def article_meta_path(self, source_id: str) -> Path:
        return self.root / "articles" / (slugify(source_id) + ".json")

    def report_path(self, source_id: str) -> Path:
        return self.root / "reports" / (slugify(source_id) + ".txt")

    # -- lifecycle -------------------------------------------------------

    @classmethod
    def open(cls, root: str | Path) -> "Store":
        """Open (creating directories as needed) and load everything."""
        store = cls(root)
        store.root.mkdir(parents=True, exist_ok=True)
        (store.root / "articles").mkdir(exist_ok=True)
        (store.root / "reports").mkdir(exist_ok=True)
        try:
            store._load()
        except ParseError as exc:
            raise CorruptStore(str(exc)) from exc
        return store

    def _load(self) -> None:
        if self.keywords_path.exists():
            self.vocabulary.load_keywords(
                self.keywords_path.read_text(encoding="utf-8"),
                filename=str(self.keywords_path),
            )
        if self.keychains_path.exists():
            self.vocabulary.load_keychains(
                self.keychains_path.read_text(encoding="utf-8"),
                filename=str(self.keychains_path),
            )
        if self.apd_path.exists():
            self.apd.load(
                self.apd_path.read_text(encoding="utf-8"),
                filename=str(self.apd_path),
            )
        for meta_path in sorted((self.root / "articles").glob("*.json")):
            try:
                meta = json.loads(meta_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise CorruptStore(f"{meta_path}: {exc}") from exc
            source_id = meta.get("source_id")
            if not source_id:
                raise CorruptStore(f"{meta_path}: article record without source_id")
            tex_path = self.article_tex_path(source_id)
            if not tex_path.exists():
                raise CorruptStore(f"{meta_path}: missing document file {tex_path}")
            profile = meta.get("profile") or {}
            self.articles[source_id] = ArticleRecord(
                source_id=source_id,
                tex_source=tex_path.read_text(encoding="utf-8"),
                profile={k: v for k, v in profile.items() if v is not None},
                uploaded_at=meta.get("uploaded_at", ""),
                revision=int(meta.get("revision", 1)),
            )
        for report_file in sorted((self.root / "reports").glob("*.txt")):
            report = parse_report(
                report_file.read_text(encoding="utf-8"), filename=str(report_file)
            )
            self.reports[report.source_id] = report
        if self.queue_path.exists():
            for lineno, line in enumerate(
                self.queue_path.read_text(encoding="utf-8").splitlines(), start=1
            ):
                if not line.strip():
                    continue
                cells = line.split("\t")
                if len(cells) != 2:
                    raise CorruptStore(
                        f"{self.queue_path}:{lineno}: queue row must be "
                        "source_id<TAB>pointers"
                    )
                try:
                    pointers = tuple(
                        parse_pointer(p) for p in cells[1].split(",") if p.strip()
                    )
                except ValueError as exc:
                    raise CorruptStore(f"{self.queue_path}:{lineno}: {exc}") from None
                self.queue.append(QueueRow(source_id=cells[0], pointers=pointers))

    # -- atomic writes -----------------------------------------------------

    def _write(self, path: Path, text: str) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=str(path.parent), prefix=path.name + ".")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(text)
                handle.flush()
                os.fsync(handle.fileno())
            os.replace(tmp, path)
        except BaseException:
            try:
                os.unlink(tmp)
            except OSError:
                pass
            raise

    # -- save points -------------------------------------------------------

    def save_vocabulary(self) -> None:
        self._write(self.keywords_path, self.vocabulary.dump_keywords())
        self._write(self.keychains_path, self.vocabulary.dump_keychains())

    def save_apd(self) -> None:
        self._write(self.apd_path, self.apd.dump())

    def save_queue(self) -> None:
        lines = [
            row.source_id + "\t" + ",".join(p.value for p in row.pointers)
            for row in self.queue
        ]
        self._write(self.queue_path, "\n".join(lines) + ("\n" if lines else ""))

    def save_article(self, record: ArticleRecord) -> None:
        self._write(self.article_tex_path(record.source_id), record.tex_source)
        self._write(
            self.article_meta_path(record.source_id),
            json.dumps(record.meta(), indent=2, sort_keys=True) + "\n",
        )

    def save_report(self, report: IndexReport) -> None:
        # the store form keeps rejected keychains so corrections survive
        self._write(self.report_path(report.source_id), render_report(report, include_rejected=True))

    def save_all(self) -> None:
        self.save_vocabulary()
        self.save_apd()
        self.save_queue()
        for record in self.articles.values():
            self.save_article(record)
        for report in self.reports.values():
            self.save_report(report)

    # -- articles ----------------------------------------------------------

    def add_article(
        self, source_id: str, tex_source: str, profile: dict | None = None
    ) -> ArticleRecord:
        """Store a document. Re-uploading different text makes a new
        revision; the previous text is archived beside the current one.
        """
        existing = self.articles.get(source_id)
        if existing is None:
            record = ArticleRecord(
                source_id=source_id,
                tex_source=tex_source,
                profile=dict(profile or {}),
                uploaded_at=_now(),
            )
        elif existing.tex_source == tex_source:
            record = existing
            if profile:
                record.profile.update(profile)
        else:
            archive = self.root / "articles" / (
                f"{slugify(source_id)}.r{existing.revision}.tex"
            )
            self._write(archive, existing.tex_source)
            record = ArticleRecord(
                source_id=source_id,
                tex_source=tex_source,
                profile={**existing.profile, **(profile or {})},
                uploaded_at=_now(),
                revision=existing.revision + 1,
            )
        self.articles[source_id] = record
        self.save_article(record)
        return record

    # -- queue ---------------------------------------------------------

    def enqueue(self, source_id: str, pointers: tuple[Pointer, ...]) -> bool:
        """FIFO append unless the article is already pending."""
        if any(row.source_id == source_id for row in self.queue):
            return False
        self.queue.append(QueueRow(source_id=source_id, pointers=pointers))
        self.save_queue()
        return True

    # -- locking ---------------------------------------------------------

    def acquire_lock(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        try:
            fd = os.open(str(self.lock_path), os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreLocked(
                f"store {self.root} is locked by another process "
                f"(remove {self.lock_path} if that process is gone)"
            ) from None
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(str(os.getpid()) + "\n")

    def release_lock(self) -> None:
        try:
            os.unlink(self.lock_path)
        except FileNotFoundError:
            pass

    @contextmanager
    def locked(self):
        self.acquire_lock()
        try:
            yield self
        finally:
            self.release_lock()
