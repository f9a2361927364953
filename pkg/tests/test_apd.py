"""Dictionary records: alternatives, entries, the record file format, lint."""

import pytest

from autex import (
    Apd,
    EmptyPattern,
    ParseError,
    UnbalancedMath,
    Vocabulary,
    lint_apd,
    split_alternatives,
)
from autex.apd import LintFinding


def fresh_apd() -> Apd:
    return Apd(vocabulary=Vocabulary())


class TestSplitAlternatives:
    def test_top_level_split(self):
        assert split_alternatives("a | b|c") == ["a", "b", "c"]

    def test_bar_inside_math_not_split(self):
        assert split_alternatives(r"$a | b$ | plain") == [r"$a | b$", "plain"]

    def test_unbalanced_math_rejected(self):
        with pytest.raises(UnbalancedMath):
            split_alternatives(r"$a | b")

    def test_empty_segments_dropped(self):
        assert split_alternatives("a || b |") == ["a", "b"]


class TestEntries:
    def test_auto_ids_are_sequential(self):
        apd = fresh_apd()
        first = apd.add_entry("neutrino mass", ["neutrino, mass"], ingest=True)
        second = apd.add_entry("axion", ["axion"], ingest=True)
        assert first.id == "apd-0001"
        assert second.id == "apd-0002"

    def test_pattern_list_and_string_agree(self):
        apd = fresh_apd()
        a = apd.add_entry("a | b", ["k"], ingest=True)
        b = apd.add_entry(["a", "b"], ["k"], ingest=True)
        assert a.alternatives == b.alternatives == ("a", "b")

    def test_duplicate_alternatives_collapse(self):
        apd = fresh_apd()
        entry = apd.add_entry("SUSY | susy | SUSY", ["supersymmetry"], ingest=True)
        assert entry.alternatives == ("SUSY",)

    def test_empty_pattern_rejected(self):
        apd = fresh_apd()
        with pytest.raises(EmptyPattern):
            apd.add_entry("  |  ", ["k"], ingest=True)
        with pytest.raises(EmptyPattern):
            apd.add_entry("ok", [], ingest=True)

    def test_replace_and_remove(self):
        apd = fresh_apd()
        entry = apd.add_entry("old", ["k"], ingest=True)
        replaced = apd.replace_entry(entry.id, "new", ["k2"], ingest=True)
        assert replaced.id == entry.id
        assert apd.get(entry.id).alternatives == ("new",)
        apd.remove_entry(entry.id)
        assert apd.get(entry.id) is None

    def test_replace_without_ingest_requires_known_keychains(self):
        from autex import UnknownKeychain

        apd = fresh_apd()
        entry = apd.add_entry("old", ["k"], ingest=True)
        with pytest.raises(UnknownKeychain):
            apd.replace_entry(entry.id, "new", ["unseen, keys"])

    def test_entries_keep_insertion_order(self):
        apd = fresh_apd()
        names = ["cc", "aa", "bb"]
        for name in names:
            apd.add_entry(name, [name], ingest=True)
        assert [e.alternatives[0] for e in apd.entries] == names


class TestRecordFormat:
    RECORD = (
        "@entry e1\n"
        "pattern: neutrino mass | mass of the neutrino\n"
        "keys: neutrino, mass\n"
        "\n"
        "@entry e2\n"
        "pattern: $\\nu \\to \\nu \\gamma$\n"
        "keys: neutrino, radiative decay ; neutrino → neutrino photon\n"
        "note: reaction form\n"
    )

    def test_load_and_dump_round_trip(self):
        apd = fresh_apd()
        apd.load(self.RECORD)
        assert apd.dump() == self.RECORD

        again = fresh_apd()
        again.load(apd.dump())
        assert again.dump() == apd.dump()

    def test_load_populates_vocabulary(self):
        apd = fresh_apd()
        apd.load(self.RECORD)
        assert apd.vocabulary.has_keyword("neutrino")
        assert apd.vocabulary.has_keychain(
            apd.vocabulary.parse_keychain("neutrino, radiative decay")
        )

    def test_missing_pattern_line(self):
        apd = fresh_apd()
        with pytest.raises(ParseError) as err:
            apd.load("@entry x\nkeys: k\n", filename="bad.apd")
        assert "pattern" in str(err.value)
        assert "bad.apd" in str(err.value)

    def test_missing_keys_line(self):
        apd = fresh_apd()
        with pytest.raises(ParseError):
            apd.load("@entry x\npattern: a\n")

    def test_duplicate_id_rejected(self):
        apd = fresh_apd()
        text = "@entry x\npattern: a\nkeys: k\n\n@entry x\npattern: b\nkeys: k\n"
        with pytest.raises(ParseError) as err:
            apd.load(text)
        assert "duplicate" in str(err.value)

    def test_unrecognized_line_rejected(self):
        apd = fresh_apd()
        with pytest.raises(ParseError):
            apd.load("@entry x\npattern: a\nkeys: k\nwhat is this\n")

    def test_content_hash_tracks_content(self):
        apd = fresh_apd()
        apd.load(self.RECORD)
        before = apd.content_hash()
        assert before == fresh_apd_loaded(self.RECORD).content_hash()
        apd.add_entry("more", ["more"], ingest=True)
        assert apd.content_hash() != before

    def test_fixture_dictionaries_round_trip(self):
        from conftest import FIXTURES

        for name in ["desk.apd", "worked.apd"]:
            text = (FIXTURES / "apd" / name).read_text(encoding="utf-8")
            apd = fresh_apd()
            apd.load(text, filename=name)
            assert apd.dump() == text


def fresh_apd_loaded(text: str) -> Apd:
    apd = fresh_apd()
    apd.load(text)
    return apd


class TestLint:
    def test_clean_dictionary_has_no_findings(self):
        apd = fresh_apd()
        apd.add_entry("neutrino mass", ["neutrino, mass"], ingest=True)
        assert lint_apd(apd) == []

    def test_fixture_dictionaries_are_clean(self, desk_apd, worked_apd):
        assert lint_apd(desk_apd) == []
        assert lint_apd(worked_apd) == []

    def test_duplicate_alternative_is_warning(self):
        apd = fresh_apd()
        apd.add_entry("neutrino mass", ["neutrino, mass"], ingest=True)
        apd.add_entry("neutrino mass | other", ["neutrino, massive"], ingest=True)
        findings = lint_apd(apd)
        assert findings
        assert all(not f.fatal for f in findings)
        assert any("appears in entries" in f.message for f in findings)

    def test_entry_with_no_usable_alternative_is_fatal(self):
        apd = fresh_apd()
        apd.add_entry("a{2}b", ["k"], ingest=True)
        findings = lint_apd(apd)
        assert any(f.fatal for f in findings)

    def test_partial_compile_failure_not_fatal(self):
        apd = fresh_apd()
        apd.add_entry("fine | a{2}b", ["k"], ingest=True)
        findings = lint_apd(apd)
        assert findings
        assert all(not f.fatal for f in findings)

    def test_findings_carry_entry_ids(self):
        apd = fresh_apd()
        entry = apd.add_entry("^anchored", ["k"], ingest=True)
        findings = lint_apd(apd)
        assert findings and isinstance(findings[0], LintFinding)
        assert findings[0].entry_id == entry.id
