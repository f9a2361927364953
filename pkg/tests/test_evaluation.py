"""Evaluation: reference lists, engine-versus-reference comparison, metrics."""

import pytest

from autex import (
    EmptyCorpus,
    ParseError,
    SourceMismatch,
    compare,
    corpus_metrics,
    parse_reference,
    render_comparison,
    render_reference,
)

from conftest import FIXTURES


def ref(text: str, source_id: str = ""):
    return parse_reference(text, source_id=source_id)


class TestParseReference:
    def test_lines_comments_blanks(self):
        report = ref("# a comment\n\nneutrino, mass\n(0) photon, energy loss\n")
        assert [k.rendering for k in report.relevant()] == ["neutrino, mass"]
        assert [k.rendering for k in report.irrelevant()] == ["photon, energy loss"]

    def test_duplicate_rejected_with_location(self):
        with pytest.raises(ParseError) as err:
            parse_reference("a, b\na, b\n", filename="r.ref")
        assert err.value.line == 2
        assert "r.ref" in str(err.value)

    def test_bad_keychain_rejected(self):
        with pytest.raises(ParseError):
            parse_reference(", ,\n")

    def test_round_trip(self):
        text = "neutrino, mass\n(0) photon, energy loss\nplasma\n"
        assert render_reference(ref(text)) == text

    def test_fixture_references_round_trip(self):
        for path in sorted((FIXTURES / "reports").glob("*.ref")):
            text = path.read_text(encoding="utf-8")
            assert render_reference(parse_reference(text, filename=path.name)) == text

    def test_empty_reference_renders_empty(self):
        assert render_reference(ref("")) == ""


class TestCompare:
    def test_plain_iterables_accepted(self):
        result = compare(["a, b", "c"], ref("a, b\nd\n"))
        assert [(e.rendering, r.rendering) for e, r in result.matched] == [("a, b", "a, b")]
        assert [k.rendering for k in result.engine_only] == ["c"]
        assert [k.rendering for k in result.reference_only] == ["d"]

    def test_matching_is_case_insensitive(self):
        result = compare(["Neutrino, Mass"], ref("neutrino, mass\n"))
        assert len(result.matched) == 1

    def test_exact_mode_is_order_sensitive(self):
        result = compare(["a, b"], ref("b, a\n"))
        assert result.matched == []
        assert result.precision == 0.0

    def test_order_insensitive_mode(self):
        result = compare(["a, b"], ref("b, a\n"), mode="order-insensitive")
        assert len(result.matched) == 1
        assert result.precision == 1.0 and result.recall == 1.0

    def test_unknown_mode_rejected(self):
        with pytest.raises(ValueError):
            compare(["a"], ref("a\n"), mode="fuzzy")

    def test_each_reference_row_matches_at_most_once(self):
        # Engine duplicates collapse before matching, so a single reference
        # row cannot be double-counted.
        result = compare(["a, b", "A, B"], ref("a, b\n"))
        assert len(result.matched) == 1
        assert result.precision == 1.0

    def test_irrelevant_rows_neither_match_nor_count(self):
        result = compare(["photon, energy loss"], ref("(0) photon, energy loss\nkept\n"))
        assert [k.rendering for k in result.engine_only] == ["photon, energy loss"]
        assert [k.rendering for k in result.irrelevant] == ["photon, energy loss"]
        assert [k.rendering for k in result.reference_only] == ["kept"]
        assert result.recall == 0.0  # denominator is the one relevant row

    def test_empty_against_empty_scores_one(self):
        result = compare([], ref(""))
        assert result.precision == 1.0 and result.recall == 1.0

    def test_empty_engine_against_nonempty_reference(self):
        result = compare([], ref("a\n"))
        assert result.precision == 0.0 and result.recall == 0.0

    def test_nonempty_engine_against_empty_reference(self):
        # An empty side scores 1.0 only against another empty side.
        result = compare(["a"], ref(""))
        assert result.precision == 0.0 and result.recall == 0.0

    def test_partial_overlap_pairs_share_a_keyword(self):
        result = compare(["plasma, frequency"], ref("dispersion, plasma\nother\n"))
        assert [(e.rendering, r.rendering) for e, r in result.partial_overlap] == [
            ("plasma, frequency", "dispersion, plasma")
        ]

    def test_source_mismatch_needs_both_ids(self):
        from autex import (
            AssignedKeychain,
            EngineConfig,
            IndexReport,
            Pointer,
            Vocabulary,
        )

        vocab = Vocabulary()
        config = EngineConfig(pointers=(Pointer.TITLE,), gap_bound=56, apd_hash="h")
        report = IndexReport(
            "doc-a",
            [AssignedKeychain(keychain=vocab.parse_keychain("a"))],
            config,
        )
        with pytest.raises(SourceMismatch):
            compare(report, ref("a\n", source_id="doc-b"))
        assert compare(report, ref("a\n")).source_id == "doc-a"
        assert compare(report, ref("a\n", source_id="doc-a")).precision == 1.0

    def test_rejected_rows_do_not_evaluate(self):
        from autex import apply_correction

        report = self.engine_report(["a", "b"])
        apply_correction(report, "b", "rejected")
        result = compare(report, ref("a\nb\n"))
        assert len(result.matched) == 1
        assert [k.rendering for k in result.reference_only] == ["b"]

    def test_manual_rows_evaluate_only_on_request(self):
        from autex import apply_correction

        report = self.engine_report(["a"])
        apply_correction(report, "hand, added", "confirmed")
        assert len(compare(report, ref("a\nhand, added\n")).matched) == 1
        assert (
            len(compare(report, ref("a\nhand, added\n"), include_manual=True).matched)
            == 2
        )

    @staticmethod
    def engine_report(chains):
        from autex import (
            AssignedKeychain,
            EngineConfig,
            IndexReport,
            Pointer,
            Vocabulary,
        )

        vocab = Vocabulary()
        return IndexReport(
            "",
            [AssignedKeychain(keychain=vocab.parse_keychain(c)) for c in chains],
            EngineConfig(pointers=(Pointer.TITLE,), gap_bound=56, apd_hash="h"),
        )


class TestRenderComparison:
    def test_three_zone_layout(self):
        result = compare(
            ["a, b", "only, engine"],
            ref("b, a\nonly, reference\n(0) skipped\n"),
            mode="order-insensitive",
        )
        text = render_comparison(result)
        assert text == (
            "a, b == b, a\n"
            "only, engine\n"
            "---\n"
            "only, reference\n"
            "(0) skipped\n"
            "P=0.5 R=0.5 mode=order-insensitive\n"
        )

    def test_exact_match_renders_once(self):
        text = render_comparison(compare(["a, b"], ref("a, b\n")))
        assert text.splitlines()[0] == "a, b"

    def test_summary_line_uses_float_repr(self):
        text = render_comparison(compare(["a", "b", "c"], ref("a\nb\nc\nd\ne\nf\n")))
        assert text.splitlines()[-1] == "P=1.0 R=0.5 mode=exact"


class TestCorpusMetrics:
    def test_micro_pools_macro_averages(self):
        first = compare(["a"], ref("a\n"))  # P=1 R=1, 1 of 1
        second = compare(["b", "c"], ref("b\nd\ne\nf\n"))  # P=0.5 R=0.25
        metrics = corpus_metrics([first, second])
        assert metrics.documents == 2
        assert metrics.micro_precision == pytest.approx(2 / 3)
        assert metrics.micro_recall == pytest.approx(2 / 5)
        assert metrics.macro_precision == pytest.approx(0.75)
        assert metrics.macro_recall == pytest.approx(0.625)

    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpus):
            corpus_metrics([])
