"""Vocabulary primitives: keywords, keychains, filters, list files."""

import pytest

from autex import (
    EmptyKeychain,
    EmptyKeyword,
    InvalidFilter,
    UnknownKeyword,
    Vocabulary,
    VocabularyFilter,
    parse_keychain_text,
)
from autex.vocabulary import canonical_keyword_text


class TestKeyword:
    def test_canonical_text_collapses_whitespace(self):
        assert canonical_keyword_text("  neutrino   mass ") == "neutrino mass"

    def test_empty_keyword_rejected(self):
        with pytest.raises(EmptyKeyword):
            Vocabulary().add_keyword("   ")

    def test_key_is_casefolded(self):
        vocab = Vocabulary()
        word = vocab.add_keyword("Majorana")
        assert word.key == "majorana"
        assert vocab.has_keyword("MAJORANA")

    def test_add_keyword_idempotent(self):
        vocab = Vocabulary()
        first = vocab.add_keyword("neutrino")
        second = vocab.add_keyword("Neutrino")
        assert first is second
        assert len(vocab.keywords) == 1


class TestKeychain:
    def test_rendering_joins_with_comma_space(self):
        chain = parse_keychain_text("neutrino,   mass")
        assert chain.rendering == "neutrino, mass"
        assert chain.keywords == ("neutrino", "mass")

    def test_key_case_insensitive_order_sensitive(self):
        a = parse_keychain_text("Neutrino, Mass")
        b = parse_keychain_text("neutrino, mass")
        c = parse_keychain_text("mass, neutrino")
        assert a == b
        assert hash(a) == hash(b)
        assert a != c

    def test_single_keyword_chain(self):
        chain = parse_keychain_text("supersymmetry")
        assert chain.keywords == ("supersymmetry",)

    def test_reaction_arrow_is_one_keyword(self):
        chain = parse_keychain_text("photon → positron electron")
        assert chain.keywords == ("photon → positron electron",)

    def test_empty_keychain_rejected(self):
        with pytest.raises(EmptyKeychain):
            parse_keychain_text("  ")
        with pytest.raises(EmptyKeychain):
            parse_keychain_text(", ,")

    def test_blank_segments_dropped(self):
        assert parse_keychain_text("a, , b").keywords == ("a", "b")

    def test_make_keychain_requires_known_keywords(self):
        vocab = Vocabulary()
        vocab.add_keyword("neutrino")
        with pytest.raises(UnknownKeyword):
            vocab.make_keychain(["neutrino", "mass"])
        vocab.add_keyword("mass")
        chain = vocab.make_keychain(["neutrino", "mass"])
        assert chain.rendering == "neutrino, mass"

    def test_parse_keychain_auto_creates_keywords(self):
        vocab = Vocabulary()
        chain = vocab.parse_keychain("neutrino, mass")
        assert vocab.has_keyword("neutrino")
        assert vocab.has_keyword("mass")
        assert vocab.has_keychain(chain)

    def test_keychain_identity_shared(self):
        vocab = Vocabulary()
        first = vocab.parse_keychain("neutrino, mass")
        second = vocab.parse_keychain("Neutrino, MASS")
        assert first is second
        assert len(vocab.keychains) == 1


class TestVocabularyFilter:
    def test_letter_must_be_single_alpha(self):
        with pytest.raises(InvalidFilter):
            VocabularyFilter(letter="ab").validate()
        with pytest.raises(InvalidFilter):
            VocabularyFilter(letter="1").validate()
        VocabularyFilter(letter="n").validate()

    def test_prefix_needs_two_characters(self):
        with pytest.raises(InvalidFilter):
            VocabularyFilter(prefix="n").validate()
        VocabularyFilter(prefix="ne").validate()

    def test_letter_and_prefix_are_anded(self):
        selector = VocabularyFilter(letter="n", prefix="neu")
        assert selector.accepts_text("Neutrino")
        assert not selector.accepts_text("nucleon")

        mismatch = VocabularyFilter(letter="m", prefix="neu")
        assert not mismatch.accepts_text("neutrino")

    def test_filter_keywords_sorted(self):
        vocab = Vocabulary()
        for word in ["neutrino", "mass", "Nucleon", "neutron"]:
            vocab.add_keyword(word)
        got = [w.text for w in vocab.filter_keywords(VocabularyFilter(letter="n"))]
        assert got == ["neutrino", "neutron", "Nucleon"]

    def test_filter_keychains_by_prefix(self):
        vocab = Vocabulary()
        vocab.parse_keychain("neutrino, mass")
        vocab.parse_keychain("mass, threshold")
        got = vocab.filter_keychains(VocabularyFilter(prefix="neu"))
        assert [c.rendering for c in got] == ["neutrino, mass"]


class TestListFiles:
    def test_keyword_file_round_trip(self):
        vocab = Vocabulary()
        text = "# controlled vocabulary\nneutrino\nmass\n\nMajorana\n"
        vocab.load_keywords(text)
        assert sorted(w.text for w in vocab.keywords) == [
            "Majorana",
            "mass",
            "neutrino",
        ]
        dumped = vocab.dump_keywords()
        again = Vocabulary()
        again.load_keywords(dumped)
        assert again.dump_keywords() == dumped

    def test_keychain_file_round_trip(self):
        vocab = Vocabulary()
        text = "# keychains\nneutrino, mass\nphoton → positron electron\n"
        vocab.load_keychains(text)
        dumped = vocab.dump_keychains()
        again = Vocabulary()
        again.load_keychains(dumped)
        assert again.dump_keychains() == dumped
        assert "photon → positron electron" in dumped
