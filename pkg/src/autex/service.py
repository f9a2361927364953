"""HTTP front-end: the managers, queue, indexing, and evaluation under /v1.

The service is a thin JSON layer over the library: every endpoint is a
projection of store state or a delegation to an engine call, so the CLI and
the API produce identical artifacts. Batch indexing runs on a background
thread with a polling endpoint, so reads never wait for a batch.

The store root comes from the AUTEX_STORE environment variable or explicit
configuration; a single-writer lock file guards it for the lifetime of the
service process.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, unquote, urlsplit

from . import evaluation, indexer
from .errors import (
    AutexError,
    EmptyApd,
    InvalidFilter,
    MalformedTex,
    ParseError,
    SourceMismatch,
    UnbalancedMath,
    UnknownKeychain,
    UnknownKeychainInReport,
    UnsupportedConstruct,
)
from .matchengine import DEFAULT_GAP_BOUND, check_pattern
from .store import Store
from .texprep import Pointer, parse_pointer
from .vocabulary import Keychain, VocabularyFilter, parse_keychain_text

DEFAULT_POINTERS = (Pointer.TITLE, Pointer.ABSTRACT)


class ApiError(Exception):
    """An error with an HTTP status, surfaced to the client as JSON."""

    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


@dataclass
class Job:
    """One background batch run."""

    job_id: str
    status: str = "running"  # running | done
    outcomes: list[dict] = field(default_factory=list)
    started_at: str = ""
    finished_at: str = ""

    def as_json(self) -> dict:
        return {
            "job_id": self.job_id,
            "status": self.status,
            "outcomes": self.outcomes,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def keychain_json(kc: Keychain) -> dict:
    return {"rendering": kc.rendering, "keywords": list(kc.keywords)}


def entry_json(entry) -> dict:
    return {
        "id": entry.id,
        "pattern": " | ".join(entry.alternatives),
        "alternatives": list(entry.alternatives),
        "keys": [kc.rendering for kc in entry.keychains],
        "note": entry.note,
    }


def report_json(report: indexer.IndexReport) -> dict:
    return {
        "source_id": report.source_id,
        "apd": report.engine_config.apd_hash,
        "pointers": [p.value for p in report.engine_config.pointers],
        "gap_bound": report.engine_config.gap_bound,
        "generated_at": report.generated_at,
        "assigned": [
            {
                "keychain": item.keychain.rendering,
                "keywords": list(item.keychain.keywords),
                "sources": [
                    p.value for p in indexer.POINTER_ORDER if p in item.sources
                ],
                "status": item.status,
                "manual": item.manual,
                "hits": len(item.hits),
            }
            for item in report.assigned
        ],
    }


def comparison_json(result: evaluation.ComparisonResult) -> dict:
    return {
        "source_id": result.source_id,
        "mode": result.mode,
        "precision": result.precision,
        "recall": result.recall,
        "matched": [
            [e.rendering, r.rendering] for e, r in result.matched
        ],
        "engine_only": [kc.rendering for kc in result.engine_only],
        "reference_only": [kc.rendering for kc in result.reference_only],
        "irrelevant": [kc.rendering for kc in result.irrelevant],
        "partial_overlap": [
            [e.rendering, r.rendering] for e, r in result.partial_overlap
        ],
        "text": evaluation.render_comparison(result),
    }


class Service:
    """Store plus engine behind a mutex, shared by all request threads."""

    def __init__(self, store: Store, gap_bound: int = DEFAULT_GAP_BOUND):
        self.store = store
        self.gap_bound = gap_bound
        self.mutex = threading.RLock()
        self.jobs: dict[str, Job] = {}
        self._job_counter = 0

    # -- filters ---------------------------------------------------------

    def _filter(self, params: dict) -> VocabularyFilter:
        letter = params.get("letter", [None])[0]
        prefix = params.get("prefix", [None])[0]
        keychain_param = params.get("keychain", [])
        selector = None
        if keychain_param:
            selector = {parse_keychain_text(k) for k in keychain_param}
        flt = VocabularyFilter(
            letter=letter, prefix=prefix, keychain_selector=selector
        )
        try:
            flt.validate()
        except InvalidFilter as exc:
            raise ApiError(400, str(exc)) from None
        return flt

    # -- vocabulary ------------------------------------------------------

    def list_keywords(self, params: dict) -> dict:
        with self.mutex:
            words = self.store.vocabulary.filter_keywords(self._filter(params))
            return {"keywords": [w.text for w in words]}

    def add_keyword(self, payload: dict) -> tuple[int, dict]:
        text = payload.get("text", "")
        with self.mutex:
            word = self.store.vocabulary.add_keyword(text)
            self.store.save_vocabulary()
            return 201, {"keyword": word.text}

    def list_keychains(self, params: dict) -> dict:
        with self.mutex:
            chains = self.store.vocabulary.filter_keychains(self._filter(params))
            return {"keychains": [keychain_json(kc) for kc in chains]}

    def add_keychain(self, payload: dict) -> tuple[int, dict]:
        with self.mutex:
            if "keywords" in payload:
                chain = self.store.vocabulary.make_keychain(payload["keywords"])
            else:
                chain = self.store.vocabulary.parse_keychain(
                    payload.get("rendering", "")
                )
            self.store.save_vocabulary()
            return 201, {"keychain": keychain_json(chain)}

    # -- patterns ----------------------------------------------------------

    def list_patterns(self, params: dict) -> dict:
        with self.mutex:
            entries = self.store.apd.filter_entries(self._filter(params))
            return {"patterns": [entry_json(e) for e in entries]}

    def add_pattern(self, payload: dict) -> tuple[int, dict]:
        with self.mutex:
            # reject a pattern that can never match before it mutates anything
            check_pattern(payload.get("pattern", ""), gap_bound=self.gap_bound)
            entry = self.store.apd.add_entry(
                payload.get("pattern", ""),
                payload.get("keys", []),
                note=payload.get("note"),
                entry_id=payload.get("id"),
                ingest=bool(payload.get("ingest", True)),
            )
            self.store.save_apd()
            self.store.save_vocabulary()
            return 201, {"pattern": entry_json(entry)}

    def replace_pattern(self, entry_id: str, payload: dict) -> dict:
        with self.mutex:
            if self.store.apd.get(entry_id) is None:
                raise ApiError(404, f"no pattern {entry_id!r}")
            check_pattern(payload.get("pattern", ""), gap_bound=self.gap_bound)
            entry = self.store.apd.replace_entry(
                entry_id,
                payload.get("pattern", ""),
                payload.get("keys", []),
                note=payload.get("note"),
                ingest=bool(payload.get("ingest", True)),
            )
            self.store.save_apd()
            self.store.save_vocabulary()
            return {"pattern": entry_json(entry)}

    def delete_pattern(self, entry_id: str) -> dict:
        with self.mutex:
            if self.store.apd.get(entry_id) is None:
                raise ApiError(404, f"no pattern {entry_id!r}")
            self.store.apd.remove_entry(entry_id)
            self.store.save_apd()
            return {"deleted": entry_id}

    # -- articles ----------------------------------------------------------

    def add_article(self, payload: dict) -> tuple[int, dict]:
        source_id = (payload.get("source_id") or "").strip()
        tex_source = payload.get("tex_source", "")
        if not source_id:
            raise ApiError(400, "source_id is required")
        if not tex_source:
            raise ApiError(400, "tex_source is required")
        with self.mutex:
            created = source_id not in self.store.articles
            record = self.store.add_article(
                source_id, tex_source, payload.get("profile") or {}
            )
            return (201 if created else 200), {"article": record.meta()}

    def list_articles(self) -> dict:
        with self.mutex:
            return {
                "articles": [
                    self.store.articles[sid].meta()
                    for sid in sorted(self.store.articles)
                ]
            }

    def get_article(self, source_id: str) -> dict:
        with self.mutex:
            record = self.store.articles.get(source_id)
            if record is None:
                raise ApiError(404, f"no article {source_id!r}")
            data = record.meta()
            data["tex_source"] = record.tex_source
            return {"article": data}

    def patch_article(self, source_id: str, payload: dict) -> dict:
        with self.mutex:
            record = self.store.articles.get(source_id)
            if record is None:
                raise ApiError(404, f"no article {source_id!r}")
            profile = payload.get("profile") or {}
            record.profile.update(profile)
            self.store.save_article(record)
            return {"article": record.meta()}

    # -- queue ---------------------------------------------------------

    def enqueue(self, source_id: str, payload: dict) -> tuple[int, dict]:
        pointers = payload.get("pointers") or [p.value for p in DEFAULT_POINTERS]
        try:
            parsed = tuple(parse_pointer(p) for p in pointers)
        except ValueError as exc:
            raise ApiError(400, str(exc)) from None
        with self.mutex:
            if source_id not in self.store.articles:
                raise ApiError(404, f"no article {source_id!r}; upload it first")
            added = self.store.enqueue(source_id, parsed)
            return (202 if added else 200), {
                "queued": added,
                "pending": [row.source_id for row in self.store.queue],
            }

    def queue_state(self) -> dict:
        with self.mutex:
            return {
                "pending": [
                    {
                        "source_id": row.source_id,
                        "pointers": [p.value for p in row.pointers],
                    }
                    for row in self.store.queue
                ]
            }

    def run_queue(self, payload: dict) -> tuple[int, dict]:
        gap_bound = int(payload.get("gap_bound") or self.gap_bound)
        with self.mutex:
            self._job_counter += 1
            job = Job(job_id=f"job-{self._job_counter:04d}", started_at=_now())
            self.jobs[job.job_id] = job
            rows = list(self.store.queue)
            self.store.queue.clear()
            self.store.save_queue()
            requests = []
            for row in rows:
                record = self.store.articles.get(row.source_id)
                if record is None:
                    job.outcomes.append(
                        {
                            "source_id": row.source_id,
                            "ok": False,
                            "error": "article is gone from the store",
                        }
                    )
                    continue
                requests.append(
                    indexer.IndexRequest(
                        source_id=row.source_id,
                        tex_source=record.tex_source,
                        pointers=row.pointers,
                    )
                )
            # snapshot the dictionary so a concurrent edit cannot shear a batch
            snapshot = self._apd_snapshot()

        def run() -> None:
            queue = indexer.ProcessQueue(pending=requests)
            outcomes = indexer.run_batch(queue, apd=snapshot, gap_bound=gap_bound)
            with self.mutex:
                for outcome in outcomes:
                    if outcome.report is not None:
                        self.store.reports[outcome.source_id] = outcome.report
                        self.store.save_report(outcome.report)
                        job.outcomes.append(
                            {
                                "source_id": outcome.source_id,
                                "ok": True,
                                "keychains": len(outcome.report.assigned),
                            }
                        )
                    else:
                        job.outcomes.append(
                            {
                                "source_id": outcome.source_id,
                                "ok": False,
                                "error": outcome.error,
                            }
                        )
                job.status = "done"
                job.finished_at = _now()

        threading.Thread(target=run, name=job.job_id, daemon=True).start()
        return 202, {"job_id": job.job_id}

    def _apd_snapshot(self):
        from .apd import Apd
        from .vocabulary import Vocabulary

        snapshot = Apd(vocabulary=Vocabulary())
        dump = self.store.apd.dump()
        if dump:
            snapshot.load(dump)
        return snapshot

    def job_state(self, job_id: str) -> dict:
        with self.mutex:
            job = self.jobs.get(job_id)
            if job is None:
                raise ApiError(404, f"no job {job_id!r}")
            return {"job": job.as_json()}

    # -- reports ---------------------------------------------------------

    def get_report(self, source_id: str) -> indexer.IndexReport:
        with self.mutex:
            report = self.store.reports.get(source_id)
            if report is None:
                raise ApiError(404, f"no report for {source_id!r}")
            return report

    def patch_report(self, source_id: str, payload: dict) -> dict:
        keychain = payload.get("keychain", "")
        status = payload.get("status", "")
        with self.mutex:
            report = self.store.reports.get(source_id)
            if report is None:
                raise ApiError(404, f"no report for {source_id!r}")
            try:
                indexer.apply_correction(report, keychain, status)
            except UnknownKeychainInReport as exc:
                raise ApiError(409, str(exc)) from None
            except (ValueError, AutexError) as exc:
                raise ApiError(400, str(exc)) from None
            self.store.save_report(report)
            return {"report": report_json(report)}

    # -- evaluation --------------------------------------------------------

    def evaluate(self, payload: dict) -> dict:
        mode = payload.get("mode") or evaluation.MODE_EXACT
        reference_text = payload.get("reference")
        if reference_text is None:
            raise ApiError(400, "reference text is required")
        with self.mutex:
            if "source_id" in payload:
                source_id = payload["source_id"]
                engine = self.store.reports.get(source_id)
                if engine is None:
                    raise ApiError(404, f"no report for {source_id!r}")
            elif "engine" in payload:
                engine = indexer.parse_report(payload["engine"])
            else:
                raise ApiError(400, "supply engine report text or a source_id")
            reference = evaluation.parse_reference(
                reference_text, source_id=engine.source_id
            )
            include_manual = bool(payload.get("include_manual", False))
            result = evaluation.compare(
                engine, reference, mode=mode, include_manual=include_manual
            )
            return {"comparison": comparison_json(result)}


# --------------------------------------------------------------------------
# HTTP plumbing

class _Handler(BaseHTTPRequestHandler):
    server_version = "autex"
    protocol_version = "HTTP/1.1"

    # silence per-request stderr logging; tests assert on clean output
    def log_message(self, format: str, *args) -> None:  # noqa: A002
        pass

    @property
    def service(self) -> Service:
        return self.server.service  # type: ignore[attr-defined]

    def _payload(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            data = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ApiError(400, f"request body is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ApiError(400, "request body must be a JSON object")
        return data

    def _send(self, status: int, body: bytes, content_type: str) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header(
            "Access-Control-Allow-Methods", "GET, POST, PUT, PATCH, DELETE, OPTIONS"
        )
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, data: dict) -> None:
        body = (json.dumps(data, indent=2, sort_keys=True) + "\n").encode("utf-8")
        self._send(status, body, "application/json; charset=utf-8")

    def _send_text(self, status: int, text: str) -> None:
        self._send(status, text.encode("utf-8"), "text/plain; charset=utf-8")

    def _dispatch(self, method: str) -> None:
        url = urlsplit(self.path)
        path = unquote(url.path)
        params = parse_qs(url.query)
        try:
            self._route(method, path, params)
        except ApiError as exc:
            self._send_json(exc.status, {"error": str(exc)})
        except (
            ParseError,
            InvalidFilter,
            UnknownKeychain,
            UnsupportedConstruct,
            UnbalancedMath,
            MalformedTex,
            EmptyApd,
            SourceMismatch,
            ValueError,
        ) as exc:
            self._send_json(400, {"error": str(exc)})
        except AutexError as exc:
            self._send_json(400, {"error": str(exc)})
        except Exception as exc:  # pragma: no cover - last resort
            self._send_json(500, {"error": f"internal error: {exc}"})

    def _route(self, method: str, path: str, params: dict) -> None:
        service = self.service
        if method == "OPTIONS":
            self._send(204, b"", "text/plain")
            return
        if not path.startswith("/v1/"):
            raise ApiError(404, f"unknown path {path!r}; the API lives under /v1")
        rest = path[len("/v1/") :].rstrip("/")

        if rest == "keywords":
            if method == "GET":
                self._send_json(200, service.list_keywords(params))
            elif method == "POST":
                status, data = service.add_keyword(self._payload())
                self._send_json(status, data)
            else:
                raise ApiError(405, f"{method} not allowed on /v1/keywords")
            return
        if rest == "keychains":
            if method == "GET":
                self._send_json(200, service.list_keychains(params))
            elif method == "POST":
                status, data = service.add_keychain(self._payload())
                self._send_json(status, data)
            else:
                raise ApiError(405, f"{method} not allowed on /v1/keychains")
            return
        if rest == "patterns":
            if method == "GET":
                self._send_json(200, service.list_patterns(params))
            elif method == "POST":
                status, data = service.add_pattern(self._payload())
                self._send_json(status, data)
            else:
                raise ApiError(405, f"{method} not allowed on /v1/patterns")
            return
        if rest.startswith("patterns/"):
            entry_id = rest[len("patterns/") :]
            if method == "PUT":
                self._send_json(200, service.replace_pattern(entry_id, self._payload()))
            elif method == "DELETE":
                self._send_json(200, service.delete_pattern(entry_id))
            else:
                raise ApiError(405, f"{method} not allowed on /v1/patterns/<id>")
            return
        if rest == "articles":
            if method == "GET":
                self._send_json(200, service.list_articles())
            elif method == "POST":
                status, data = service.add_article(self._payload())
                self._send_json(status, data)
            else:
                raise ApiError(405, f"{method} not allowed on /v1/articles")
            return
        if rest.startswith("articles/"):
            source_id = rest[len("articles/") :]
            if method == "GET":
                self._send_json(200, service.get_article(source_id))
            elif method == "PATCH":
                self._send_json(200, service.patch_article(source_id, self._payload()))
            else:
                raise ApiError(405, f"{method} not allowed on /v1/articles/<id>")
            return
        if rest == "queue":
            if method == "GET":
                self._send_json(200, service.queue_state())
            else:
                raise ApiError(405, f"{method} not allowed on /v1/queue")
            return
        if rest == "queue/run":
            if method == "POST":
                status, data = service.run_queue(self._payload())
                self._send_json(status, data)
            else:
                raise ApiError(405, f"{method} not allowed on /v1/queue/run")
            return
        if rest.startswith("queue/"):
            source_id = rest[len("queue/") :]
            if method == "POST":
                status, data = service.enqueue(source_id, self._payload())
                self._send_json(status, data)
            else:
                raise ApiError(405, f"{method} not allowed on /v1/queue/<id>")
            return
        if rest.startswith("jobs/"):
            job_id = rest[len("jobs/") :]
            if method == "GET":
                self._send_json(200, service.job_state(job_id))
            else:
                raise ApiError(405, f"{method} not allowed on /v1/jobs/<id>")
            return
        if rest.startswith("reports/"):
            source_id = rest[len("reports/") :]
            if method == "GET":
                fmt = params.get("format", ["json"])[0]
                with service.mutex:
                    report = service.get_report(source_id)
                    if fmt == "text":
                        include_rejected = params.get("include_rejected", ["0"])[0] in (
                            "1",
                            "true",
                        )
                        body = indexer.render_report(
                            report, include_rejected=include_rejected
                        )
                    else:
                        body = None
                        data = {"report": report_json(report)}
                if fmt == "text":
                    self._send_text(200, body)
                else:
                    self._send_json(200, data)
            elif method == "PATCH":
                self._send_json(200, service.patch_report(source_id, self._payload()))
            else:
                raise ApiError(405, f"{method} not allowed on /v1/reports/<id>")
            return
        if rest == "evaluate":
            if method == "POST":
                self._send_json(200, service.evaluate(self._payload()))
            else:
                raise ApiError(405, f"{method} not allowed on /v1/evaluate")
            return
        raise ApiError(404, f"unknown path {path!r}")

    def do_GET(self) -> None:  # noqa: N802
        self._dispatch("GET")

    def do_POST(self) -> None:  # noqa: N802
        self._dispatch("POST")

    def do_PUT(self) -> None:  # noqa: N802
        self._dispatch("PUT")

    def do_PATCH(self) -> None:  # noqa: N802
        self._dispatch("PATCH")

    def do_DELETE(self) -> None:  # noqa: N802
        self._dispatch("DELETE")

    def do_OPTIONS(self) -> None:  # noqa: N802
        self._dispatch("OPTIONS")


class ServiceServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], service: Service):
        super().__init__(address, _Handler)
        self.service = service


def make_server(
    store_root: str,
    host: str = "127.0.0.1",
    port: int = 8765,
    gap_bound: int = DEFAULT_GAP_BOUND,
) -> ServiceServer:
    """Open the store, take the single-writer lock, and bind the server.

    Raises StoreLocked when another process holds the store. The caller owns
    the lock until shutdown_server is called.
    """
    store = Store.open(store_root)
    store.acquire_lock()
    try:
        service = Service(store, gap_bound=gap_bound)
        return ServiceServer((host, port), service)
    except BaseException:
        store.release_lock()
        raise


def shutdown_server(server: ServiceServer) -> None:
    """Stop serving and release the store lock."""
    try:
        server.shutdown()
    finally:
        server.server_close()
        server.service.store.release_lock()


def serve(
    store_root: str,
    host: str = "127.0.0.1",
    port: int = 8765,
    gap_bound: int = DEFAULT_GAP_BOUND,
) -> None:
    """Run the service until interrupted."""
    server = make_server(store_root, host=host, port=port, gap_bound=gap_bound)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        shutdown_server(server)
