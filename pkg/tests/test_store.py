"""Persistent store: layout, round-trips, revisions, locking."""

import pytest

from autex import (
    CorruptStore,
    Pointer,
    Store,
    StoreLocked,
    apply_correction,
    index_document,
    IndexRequest,
    slugify,
)

from conftest import load_apd, make_doc


@pytest.fixture()
def store(tmp_path):
    return Store.open(tmp_path / "root")


def seeded(store: Store) -> Store:
    worked = load_apd("worked.apd")
    store.vocabulary = worked.vocabulary
    store.apd = worked
    store.add_article("hep-ph/0000001", make_doc("On leptogenesis", "A study."))
    store.enqueue("hep-ph/0000001", (Pointer.TITLE, Pointer.ABSTRACT))
    store.save_all()
    return store


class TestSlugify:
    def test_slash_becomes_double_underscore(self):
        assert slugify("hep-ph/0106157") == "hep-ph__0106157"

    def test_unsafe_characters_flattened(self):
        slug = slugify("weird id:with spaces?")
        assert "/" not in slug and " " not in slug and "?" not in slug and ":" not in slug

    def test_distinct_ids_stay_distinct(self):
        assert slugify("a/b") != slugify("a_b")


class TestLifecycle:
    def test_open_creates_layout(self, tmp_path):
        store = Store.open(tmp_path / "fresh")
        assert (tmp_path / "fresh" / "articles").is_dir()
        assert (tmp_path / "fresh" / "reports").is_dir()
        assert store.articles == {} and store.queue == []

    def test_save_reload_is_a_fixed_point(self, store):
        seeded(store)
        first = Store.open(store.root)
        first.save_all()
        second = Store.open(store.root)
        assert second.apd.dump() == store.apd.dump()
        assert second.vocabulary.dump_keywords() == store.vocabulary.dump_keywords()
        assert set(second.articles) == {"hep-ph/0000001"}
        assert [(r.source_id, r.pointers) for r in second.queue] == [
            ("hep-ph/0000001", (Pointer.TITLE, Pointer.ABSTRACT))
        ]

    def test_reports_persist_with_corrections(self, store):
        seeded(store)
        report = index_document(
            IndexRequest(
                "hep-ph/0000001",
                store.articles["hep-ph/0000001"].tex_source,
                pointers=(Pointer.TITLE,),
            ),
            apd=store.apd,
        )
        apply_correction(report, "lepton, production", "rejected")
        apply_correction(report, "added, by hand", "confirmed")
        store.reports[report.source_id] = report
        store.save_report(report)

        reloaded = Store.open(store.root)
        loaded = reloaded.reports["hep-ph/0000001"]
        assert loaded.get("lepton, production").status == "rejected"
        assert loaded.get("added, by hand").manual

    def test_corrupt_article_meta_rejected(self, store):
        (store.root / "articles" / "x.json").write_text("not json", encoding="utf-8")
        with pytest.raises(CorruptStore):
            Store.open(store.root)

    def test_article_meta_without_document_rejected(self, store):
        seeded(store)
        store.article_tex_path("hep-ph/0000001").unlink()
        with pytest.raises(CorruptStore):
            Store.open(store.root)

    def test_corrupt_queue_rejected(self, store):
        store.queue_path.write_text("too\tmany\tcells\n", encoding="utf-8")
        with pytest.raises(CorruptStore):
            Store.open(store.root)

    def test_corrupt_apd_rejected(self, store):
        store.apd_path.write_text("@entry x\nkeys: k\n", encoding="utf-8")
        with pytest.raises(CorruptStore):
            Store.open(store.root)


class TestArticles:
    def test_add_article_writes_files(self, store):
        store.add_article("a/1", "text", profile={"slac_id": "S1"})
        assert store.article_tex_path("a/1").read_text(encoding="utf-8") == "text"
        assert store.articles["a/1"].revision == 1

    def test_same_text_updates_profile_without_revision(self, store):
        store.add_article("a/1", "text")
        record = store.add_article("a/1", "text", profile={"prefix": "ASTRO"})
        assert record.revision == 1
        assert record.profile["prefix"] == "ASTRO"

    def test_new_text_archives_previous_revision(self, store):
        store.add_article("a/1", "old text")
        record = store.add_article("a/1", "new text")
        assert record.revision == 2
        archive = store.root / "articles" / (slugify("a/1") + ".r1.tex")
        assert archive.read_text(encoding="utf-8") == "old text"
        assert store.article_tex_path("a/1").read_text(encoding="utf-8") == "new text"

    def test_enqueue_dedups_by_source(self, store):
        assert store.enqueue("a/1", (Pointer.TITLE,))
        assert not store.enqueue("a/1", (Pointer.FULL_TEXT,))
        assert len(store.queue) == 1


class TestAtomicWrites:
    def test_no_temp_file_debris(self, store):
        seeded(store)
        leftovers = [
            p
            for p in store.root.rglob("*")
            if p.is_file() and ".tex." in p.name or p.name.endswith(".tmp")
        ]
        assert leftovers == []

    def test_write_replaces_content_completely(self, store):
        store._write(store.root / "f.txt", "first")
        store._write(store.root / "f.txt", "second")
        assert (store.root / "f.txt").read_text(encoding="utf-8") == "second"


class TestLocking:
    def test_lock_excludes_second_holder(self, store):
        store.acquire_lock()
        try:
            with pytest.raises(StoreLocked):
                Store.open(store.root).acquire_lock()
        finally:
            store.release_lock()

    def test_release_then_reacquire(self, store):
        store.acquire_lock()
        store.release_lock()
        store.acquire_lock()
        store.release_lock()

    def test_locked_context_manager_releases_on_error(self, store):
        with pytest.raises(RuntimeError):
            with store.locked():
                assert store.lock_path.exists()
                raise RuntimeError("boom")
        assert not store.lock_path.exists()

    def test_stale_lock_message_names_the_file(self, store):
        store.acquire_lock()
        try:
            with pytest.raises(StoreLocked) as err:
                Store.open(store.root).acquire_lock()
            assert str(store.lock_path) in str(err.value)
        finally:
            store.release_lock()
