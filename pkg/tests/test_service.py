"""HTTP service: routes, envelopes, status codes, CORS, background jobs."""

import json
import threading
import time
import urllib.error
import urllib.parse
import urllib.request

import pytest

from autex import Pointer, Store, StoreLocked
from autex.service import make_server, shutdown_server

from conftest import load_apd, make_doc


class Client:
    def __init__(self, base: str):
        self.base = base

    def request(self, method: str, path: str, payload=None, raw: bool = False):
        data = None
        headers = {}
        if payload is not None:
            data = json.dumps(payload).encode("utf-8")
            headers["Content-Type"] = "application/json"
        req = urllib.request.Request(
            self.base + path, data=data, method=method, headers=headers
        )
        try:
            resp = urllib.request.urlopen(req, timeout=10)
            status, body, hdrs = resp.status, resp.read(), resp.headers
        except urllib.error.HTTPError as err:
            status, body, hdrs = err.code, err.read(), err.headers
        if raw:
            return status, body.decode("utf-8"), hdrs
        parsed = json.loads(body) if body else {}
        return status, parsed, hdrs

    def get(self, path, **kw):
        return self.request("GET", path, **kw)

    def post(self, path, payload=None, **kw):
        return self.request("POST", path, payload, **kw)

    def put(self, path, payload=None, **kw):
        return self.request("PUT", path, payload, **kw)

    def patch(self, path, payload=None, **kw):
        return self.request("PATCH", path, payload, **kw)

    def delete(self, path, **kw):
        return self.request("DELETE", path, **kw)


@pytest.fixture()
def client(tmp_path):
    root = tmp_path / "storeroot"
    store = Store.open(root)
    worked = load_apd("worked.apd")
    store.vocabulary = worked.vocabulary
    store.apd = worked
    store.add_article(
        "hep-ph/0000001",
        make_doc("On leptogenesis", "Abelian horizontal charge assignments."),
    )
    store.save_all()

    server = make_server(str(root), port=0)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]
    try:
        yield Client(f"http://{host}:{port}")
    finally:
        shutdown_server(server)
        thread.join(timeout=5)


def wait_for_job(client: Client, job_id: str) -> dict:
    for _ in range(200):
        status, data, _ = client.get(f"/v1/jobs/{job_id}")
        assert status == 200
        if data["job"]["status"] == "done":
            return data["job"]
        time.sleep(0.02)
    raise AssertionError(f"job {job_id} never finished")


def index_one(client: Client, source_id: str = "hep-ph/0000001") -> None:
    status, data, _ = client.post(f"/v1/queue/{urllib.parse.quote(source_id, safe='')}")
    assert status == 202
    status, data, _ = client.post("/v1/queue/run")
    assert status == 202
    job = wait_for_job(client, data["job_id"])
    assert all(o["ok"] for o in job["outcomes"])


class TestPlumbing:
    def test_cors_on_success_error_and_preflight(self, client):
        for status_want, (status, _, headers) in [
            (200, client.get("/v1/articles")),
            (404, client.get("/v1/nowhere")),
            (204, client.request("OPTIONS", "/v1/articles")),
        ]:
            assert status == status_want
            assert headers["Access-Control-Allow-Origin"] == "*"

    def test_api_lives_under_v1(self, client):
        status, data, _ = client.get("/articles")
        assert status == 404
        assert "/v1" in data["error"]

    def test_unknown_method_is_405(self, client):
        status, data, _ = client.delete("/v1/articles")
        assert status == 405

    def test_malformed_json_body_is_400(self, client):
        req = urllib.request.Request(
            client.base + "/v1/keywords", data=b"{oops", method="POST"
        )
        try:
            resp = urllib.request.urlopen(req, timeout=10)
            status = resp.status
        except urllib.error.HTTPError as err:
            status = err.code
        assert status == 400


class TestVocabularyRoutes:
    def test_add_and_list_keywords(self, client):
        status, data, _ = client.post("/v1/keywords", {"text": "zeta function"})
        assert status == 201 and data == {"keyword": "zeta function"}
        status, data, _ = client.get("/v1/keywords?prefix=ze")
        assert status == 200 and data["keywords"] == ["zeta function"]

    def test_letter_and_prefix_filters_combine(self, client):
        for text in ["alpha", "abelian", "beta"]:
            client.post("/v1/keywords", {"text": text})
        status, data, _ = client.get("/v1/keywords?letter=a&prefix=ab")
        assert data["keywords"] == ["abelian"]

    def test_invalid_filter_is_400(self, client):
        status, data, _ = client.get("/v1/keywords?prefix=z")
        assert status == 400
        status, data, _ = client.get("/v1/keywords?letter=zz")
        assert status == 400

    def test_add_and_filter_keychains(self, client):
        status, data, _ = client.post("/v1/keychains", {"rendering": "zeta, function"})
        assert status == 201
        assert data["keychain"] == {
            "rendering": "zeta, function",
            "keywords": ["zeta", "function"],
        }
        status, data, _ = client.get("/v1/keychains?prefix=zet")
        assert [kc["rendering"] for kc in data["keychains"]] == ["zeta, function"]

    def test_add_keychain_from_keyword_list_requires_known_words(self, client):
        status, data, _ = client.post("/v1/keychains", {"keywords": ["never seen"]})
        assert status == 400


class TestPatternRoutes:
    def test_crud_cycle(self, client):
        status, data, _ = client.post(
            "/v1/patterns",
            {"pattern": "zeta functions?", "keys": ["zeta, function"]},
        )
        assert status == 201
        entry = data["pattern"]
        assert entry["alternatives"] == ["zeta functions?"]
        entry_id = entry["id"]

        status, data, _ = client.put(
            f"/v1/patterns/{entry_id}",
            {"pattern": "zeta function | Riemann zeta", "keys": ["zeta, Riemann"]},
        )
        assert status == 200
        assert data["pattern"]["keys"] == ["zeta, Riemann"]

        status, data, _ = client.delete(f"/v1/patterns/{entry_id}")
        assert status == 200
        status, data, _ = client.get("/v1/patterns")
        assert entry_id not in [e["id"] for e in data["patterns"]]

    def test_replace_missing_pattern_is_404(self, client):
        status, _, _ = client.put(
            "/v1/patterns/apd-9999", {"pattern": "x", "keys": ["x"]}
        )
        assert status == 404

    def test_bad_pattern_is_400(self, client):
        status, data, _ = client.post(
            "/v1/patterns", {"pattern": "a{2}b", "keys": ["k"]}
        )
        assert status == 400

    def test_patterns_filter_by_prefix_of_first_alternative(self, client):
        status, data, _ = client.get("/v1/patterns?prefix=le")
        assert [e["alternatives"][0] for e in data["patterns"]] == ["leptogenesis"]


class TestArticleRoutes:
    def test_upload_fetch_patch(self, client):
        status, data, _ = client.post(
            "/v1/articles",
            {
                "source_id": "astro-ph/1234567",
                "tex_source": make_doc("A title", "An abstract."),
                "profile": {"slac_id": "S99"},
            },
        )
        assert status == 201
        assert data["article"]["source_id"] == "astro-ph/1234567"

        # same text again: 200, not a new revision
        status, data, _ = client.post(
            "/v1/articles",
            {"source_id": "astro-ph/1234567", "tex_source": make_doc("A title", "An abstract.")},
        )
        assert status == 200 and data["article"]["revision"] == 1

        status, data, _ = client.get("/v1/articles/astro-ph/1234567")
        assert status == 200
        assert "tex_source" in data["article"]

        status, data, _ = client.patch(
            "/v1/articles/astro-ph/1234567", {"profile": {"prefix": "ASTRO"}}
        )
        assert status == 200 and data["article"]["profile"]["prefix"] == "ASTRO"

    def test_missing_fields_are_400(self, client):
        assert client.post("/v1/articles", {"tex_source": "x"})[0] == 400
        assert client.post("/v1/articles", {"source_id": "x"})[0] == 400

    def test_missing_article_is_404(self, client):
        assert client.get("/v1/articles/none/here")[0] == 404


class TestQueueAndJobs:
    def test_enqueue_then_run_then_report(self, client):
        status, data, _ = client.post("/v1/queue/hep-ph/0000001")
        assert status == 202 and data["queued"] is True
        # second enqueue: already pending
        status, data, _ = client.post("/v1/queue/hep-ph/0000001")
        assert status == 200 and data["queued"] is False

        status, data, _ = client.get("/v1/queue")
        assert [row["source_id"] for row in data["pending"]] == ["hep-ph/0000001"]

        status, data, _ = client.post("/v1/queue/run")
        assert status == 202
        job = wait_for_job(client, data["job_id"])
        assert job["outcomes"] == [
            {"source_id": "hep-ph/0000001", "ok": True, "keychains": 3}
        ]

        status, data, _ = client.get("/v1/queue")
        assert data["pending"] == []

        status, data, _ = client.get("/v1/reports/hep-ph/0000001")
        assert status == 200
        report = data["report"]
        assert report["source_id"] == "hep-ph/0000001"
        assert sorted(r["keychain"] for r in report["assigned"]) == [
            "charge, abelian",
            "horizontal symmetry",
            "lepton, production",
        ]

    def test_enqueue_unknown_article_is_404(self, client):
        assert client.post("/v1/queue/none")[0] == 404

    def test_enqueue_bad_pointer_is_400(self, client):
        status, _, _ = client.post(
            "/v1/queue/hep-ph/0000001", {"pointers": ["body"]}
        )
        assert status == 400

    def test_unknown_job_is_404(self, client):
        assert client.get("/v1/jobs/job-9999")[0] == 404


class TestReportRoutes:
    def test_missing_report_is_404(self, client):
        assert client.get("/v1/reports/hep-ph/0000001")[0] == 404

    def test_corrections_and_text_format(self, client):
        index_one(client)

        status, data, _ = client.patch(
            "/v1/reports/hep-ph/0000001",
            {"keychain": "charge, abelian", "status": "rejected"},
        )
        assert status == 200
        rows = {r["keychain"]: r for r in data["report"]["assigned"]}
        assert rows["charge, abelian"]["status"] == "rejected"

        status, data, _ = client.patch(
            "/v1/reports/hep-ph/0000001",
            {"keychain": "hand, made", "status": "confirmed"},
        )
        rows = {r["keychain"]: r for r in data["report"]["assigned"]}
        assert rows["hand, made"]["manual"] is True

        # rejecting something absent is a conflict
        status, data, _ = client.patch(
            "/v1/reports/hep-ph/0000001",
            {"keychain": "never, there", "status": "rejected"},
        )
        assert status == 409

        # bad status value
        status, _, _ = client.patch(
            "/v1/reports/hep-ph/0000001",
            {"keychain": "hand, made", "status": "perhaps"},
        )
        assert status == 400

        status, text, _ = client.get(
            "/v1/reports/hep-ph/0000001?format=text", raw=True
        )
        assert status == 200
        assert text.startswith("# autex-report v1\n")
        assert "charge, abelian" not in text

        status, text, _ = client.get(
            "/v1/reports/hep-ph/0000001?format=text&include_rejected=1", raw=True
        )
        assert "charge, abelian\t" in text

    def test_corrections_are_saved_immediately(self, client):
        index_one(client)
        client.patch(
            "/v1/reports/hep-ph/0000001",
            {"keychain": "charge, abelian", "status": "rejected"},
        )
        # the service writes the store form on every correction, so the
        # rejection is already on disk in the full render
        status, text, _ = client.get(
            "/v1/reports/hep-ph/0000001?format=text&include_rejected=1", raw=True
        )
        assert "charge, abelian\tabstract\trejected" in text


class TestEvaluateRoute:
    def test_evaluate_stored_report(self, client):
        index_one(client)
        status, data, _ = client.post(
            "/v1/evaluate",
            {
                "source_id": "hep-ph/0000001",
                "reference": "lepton, production\n(0) noise, row\nmissed, one\n",
            },
        )
        assert status == 200
        comparison = data["comparison"]
        assert comparison["matched"] == [["lepton, production", "lepton, production"]]
        assert comparison["reference_only"] == ["missed, one"]
        assert comparison["irrelevant"] == ["noise, row"]
        assert comparison["precision"] == pytest.approx(1 / 3)
        assert comparison["recall"] == pytest.approx(1 / 2)
        assert comparison["text"].endswith("mode=exact\n")

    def test_evaluate_inline_engine_text(self, client):
        engine = (
            "# autex-report v1\nsource: d\napd: h\npointers: title\n"
            "a, b\t\tauto\n"
        )
        status, data, _ = client.post(
            "/v1/evaluate",
            {"engine": engine, "reference": "b, a\n", "mode": "order-insensitive"},
        )
        assert status == 200
        assert data["comparison"]["precision"] == 1.0

    def test_missing_reference_is_400(self, client):
        assert client.post("/v1/evaluate", {"source_id": "x"})[0] == 400

    def test_unknown_source_is_404(self, client):
        status, _, _ = client.post(
            "/v1/evaluate", {"source_id": "none", "reference": "a\n"}
        )
        assert status == 404


class TestStoreLock:
    # shutdown_server stops a serving loop, so each server here gets one,
    # exactly as the real entry point runs it.

    @staticmethod
    def running(root) -> tuple:
        server = make_server(str(root), port=0)
        thread = threading.Thread(target=server.serve_forever, daemon=True)
        thread.start()
        return server, thread

    def stop(self, server, thread) -> None:
        shutdown_server(server)
        thread.join(timeout=5)

    def test_second_server_on_same_root_is_refused(self, tmp_path):
        root = tmp_path / "locked-root"
        server, thread = self.running(root)
        try:
            with pytest.raises(StoreLocked):
                make_server(str(root), port=0)
        finally:
            self.stop(server, thread)

    def test_shutdown_releases_the_lock(self, tmp_path):
        root = tmp_path / "relock-root"
        server, thread = self.running(root)
        self.stop(server, thread)
        second, second_thread = self.running(root)
        self.stop(second, second_thread)
