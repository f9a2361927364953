"""Command-line front-end.

Commands: index, batch, eval, apd {lint,list,add}, vocab {list,add}, serve.

Exit codes are stable: 0 when the requested artifact was fully produced,
1 for partial batch failures and fatal lint findings, 2 for malformed TeX,
file parse errors, and usage errors, 3 for dictionary errors during
indexing. Diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import evaluation, indexer, service
from .apd import Apd, lint_apd
from .errors import (
    AutexError,
    EmptyApd,
    MalformedTex,
    ParseError,
    StoreLocked,
    UnbalancedMath,
    UnsupportedConstruct,
)
from .matchengine import DEFAULT_GAP_BOUND, check_pattern
from .store import Store
from .texprep import POINTER_ORDER, parse_pointer
from .vocabulary import VocabularyFilter, Vocabulary

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_INPUT = 2
EXIT_APD = 3

_POINTER_NAMES = ", ".join(p.value for p in POINTER_ORDER)


def _err(message: str) -> None:
    print(f"autex: {message}", file=sys.stderr)


def _store_root(args) -> str | None:
    return args.store or os.environ.get("AUTEX_STORE")


def _require_store(args, parser: argparse.ArgumentParser) -> Store:
    root = _store_root(args)
    if not root:
        parser.error("a store is required: pass --store or set AUTEX_STORE")
    return Store.open(root)


def _parse_parts(parser: argparse.ArgumentParser, value: str):
    try:
        parts = tuple(parse_pointer(p) for p in value.split(",") if p.strip())
    except ValueError as exc:
        parser.error(str(exc))
    if not parts:
        parser.error(f"--parts needs at least one of: {_POINTER_NAMES}")
    return parts


def _load_apd(args, parser: argparse.ArgumentParser) -> Apd:
    """Load the dictionary from --apd or from the store."""
    if args.apd:
        path = Path(args.apd)
        if not path.exists():
            raise ParseError("no such dictionary file", filename=str(path))
        apd = Apd(vocabulary=Vocabulary())
        apd.load(path.read_text(encoding="utf-8"), filename=str(path))
        return apd
    root = _store_root(args)
    if not root:
        parser.error("pass --apd FILE or --store DIR (or set AUTEX_STORE)")
    return Store.open(root).apd


def _sources_cell(item) -> str:
    return ",".join(p.value for p in POINTER_ORDER if p in item.sources)


# --------------------------------------------------------------------------
# index

def cmd_index(args, parser) -> int:
    parts = _parse_parts(parser, args.parts)
    try:
        apd = _load_apd(args, parser)
    except ParseError as exc:
        _err(str(exc))
        return EXIT_APD

    tex_path = Path(args.document)
    if not tex_path.exists():
        _err(f"no such document: {tex_path}")
        return EXIT_INPUT
    source_id = args.source_id or tex_path.stem

    request = indexer.IndexRequest(
        source_id=source_id,
        tex_source=tex_path.read_text(encoding="utf-8"),
        pointers=parts,
    )
    try:
        report = indexer.index_document(request, apd=apd, gap_bound=args.gap_bound)
    except MalformedTex as exc:
        _err(f"malformed TeX in {tex_path}: {exc}")
        return EXIT_INPUT
    except (EmptyApd, UnsupportedConstruct, UnbalancedMath) as exc:
        _err(f"dictionary error: {exc}")
        return EXIT_APD

    canonical = indexer.render_report(report)
    out_path = Path(args.out) if args.out else tex_path.with_suffix(".report")
    out_path.write_text(canonical, encoding="utf-8")

    if args.format == "json":
        from .service import report_json

        print(json.dumps(report_json(report), indent=2, sort_keys=True))
    else:
        for item in sorted(
            (i for i in report.assigned if i.status != indexer.STATUS_REJECTED),
            key=lambda i: (i.manual, i.first_hit_key()),
        ):
            print(f"{item.keychain.rendering}\t{_sources_cell(item)}")
        print(f"report written to {out_path}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# batch

def cmd_batch(args, parser) -> int:
    parts = _parse_parts(parser, args.parts)
    try:
        apd = _load_apd(args, parser)
    except ParseError as exc:
        _err(str(exc))
        return EXIT_APD

    queue = indexer.ProcessQueue()
    store = None
    if args.documents:
        for doc in args.documents:
            path = Path(doc)
            if not path.exists():
                _err(f"no such document: {path}")
                return EXIT_INPUT
            indexer.enqueue(
                queue,
                indexer.IndexRequest(
                    source_id=path.stem,
                    tex_source=path.read_text(encoding="utf-8"),
                    pointers=parts,
                ),
            )
    else:
        store = _require_store(args, parser)
        for row in store.queue:
            record = store.articles.get(row.source_id)
            if record is None:
                _err(f"queued article {row.source_id!r} is gone from the store")
                continue
            indexer.enqueue(
                queue,
                indexer.IndexRequest(
                    source_id=row.source_id,
                    tex_source=record.tex_source,
                    pointers=row.pointers or parts,
                ),
            )
        store.queue.clear()
        store.save_queue()

    outcomes = indexer.run_batch(queue, apd=apd, gap_bound=args.gap_bound)
    failures = 0
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for outcome in outcomes:
        if outcome.report is None:
            failures += 1
            print(f"{outcome.source_id}\tERROR\t{outcome.error}")
            continue
        if store is not None:
            store.reports[outcome.source_id] = outcome.report
            store.save_report(outcome.report)
        if out_dir:
            target = out_dir / (outcome.source_id.replace("/", "__") + ".report")
            target.write_text(indexer.render_report(outcome.report), encoding="utf-8")
        print(f"{outcome.source_id}\tok\t{len(outcome.report.assigned)} keychains")
    return EXIT_PARTIAL if failures else EXIT_OK


# --------------------------------------------------------------------------
# eval

def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def cmd_eval(args, parser) -> int:
    try:
        if args.corpus:
            return _eval_corpus(args)
        if not args.engine or not args.reference:
            parser.error("pass --engine and --reference files, or --corpus DIR")
        engine = indexer.parse_report(_read(args.engine), filename=args.engine)
        reference = evaluation.parse_reference(
            _read(args.reference), source_id=engine.source_id, filename=args.reference
        )
        result = evaluation.compare(engine, reference, mode=args.mode)
    except (ParseError, AutexError) as exc:
        _err(str(exc))
        return EXIT_INPUT
    except OSError as exc:
        _err(str(exc))
        return EXIT_INPUT
    if args.format == "json":
        from .service import comparison_json

        print(json.dumps(comparison_json(result), indent=2, sort_keys=True))
    else:
        print(evaluation.render_comparison(result), end="")
    return EXIT_OK


def _eval_corpus(args) -> int:
    corpus = Path(args.corpus)
    pairs = []
    for engine_path in sorted(corpus.glob("*.autex")) + sorted(corpus.glob("*.report")):
        ref_path = engine_path.with_suffix(".ref")
        if ref_path.exists():
            pairs.append((engine_path, ref_path))
    if not pairs:
        _err(f"no report/reference pairs (*.autex + *.ref) found in {corpus}")
        return EXIT_INPUT
    results = []
    for engine_path, ref_path in pairs:
        engine = indexer.parse_report(_read(str(engine_path)), filename=str(engine_path))
        reference = evaluation.parse_reference(
            _read(str(ref_path)), source_id=engine.source_id, filename=str(ref_path)
        )
        result = evaluation.compare(engine, reference, mode=args.mode)
        results.append(result)
        print(
            f"{engine.source_id}\tP={result.precision:.4f}\tR={result.recall:.4f}"
            f"\tmatched={len(result.matched)}"
        )
    metrics = evaluation.corpus_metrics(results)
    print(
        f"micro\tP={metrics.micro_precision:.4f}\tR={metrics.micro_recall:.4f}"
        f"\tdocuments={metrics.documents}"
    )
    print(
        f"macro\tP={metrics.macro_precision:.4f}\tR={metrics.macro_recall:.4f}"
        f"\tdocuments={metrics.documents}"
    )
    return EXIT_OK


# --------------------------------------------------------------------------
# apd maintenance

def _load_apd_for_maintenance(args, parser) -> tuple[Apd, Path | None, Store | None]:
    if args.apd:
        path = Path(args.apd)
        apd = Apd(vocabulary=Vocabulary())
        if path.exists():
            apd.load(path.read_text(encoding="utf-8"), filename=str(path))
        return apd, path, None
    root = _store_root(args)
    if not root:
        parser.error("pass --apd FILE or --store DIR (or set AUTEX_STORE)")
    store = Store.open(root)
    return store.apd, None, store


def cmd_apd(args, parser) -> int:
    try:
        apd, path, store = _load_apd_for_maintenance(args, parser)
    except ParseError as exc:
        _err(str(exc))
        return EXIT_INPUT

    if args.apd_command == "lint":
        findings = lint_apd(apd, gap_bound=args.gap_bound)
        fatal = False
        for finding in findings:
            severity = "fatal" if finding.fatal else "warning"
            fatal = fatal or finding.fatal
            print(f"{severity}\t{finding.entry_id}\t{finding.message}")
        if not findings:
            print(f"clean: {len(apd.entries)} entries, no findings", file=sys.stderr)
        return EXIT_PARTIAL if fatal else EXIT_OK

    if args.apd_command == "list":
        selector = VocabularyFilter(
            letter=args.letter,
            prefix=args.prefix,
            keychain_selector=(
                {apd.vocabulary.parse_keychain(args.keychain)} if args.keychain else None
            ),
        )
        try:
            entries = apd.filter_entries(selector)
        except AutexError as exc:
            parser.error(str(exc))
        if args.format == "json":
            from .service import entry_json

            print(json.dumps([entry_json(e) for e in entries], indent=2, sort_keys=True))
        else:
            for entry in entries:
                pattern = " | ".join(entry.alternatives)
                keys = " ; ".join(kc.rendering for kc in entry.keychains)
                print(f"{entry.id}\t{pattern}\t{keys}")
        return EXIT_OK

    if args.apd_command == "add":
        keys = [k for k in (args.keys or "").split(";") if k.strip()]
        if not args.pattern or not args.pattern.strip():
            parser.error("--pattern must not be empty")
        if not keys:
            parser.error("--keys must name at least one keychain (separate with ;)")
        try:
            check_pattern(args.pattern, gap_bound=args.gap_bound)
            entry = apd.add_entry(args.pattern, keys, note=args.note, ingest=True)
        except (UnsupportedConstruct, UnbalancedMath) as exc:
            _err(str(exc))
            return EXIT_APD
        except AutexError as exc:
            _err(str(exc))
            return EXIT_INPUT
        if path is not None:
            path.write_text(apd.dump(), encoding="utf-8")
            print(f"{entry.id} added to {path}", file=sys.stderr)
        elif store is not None:
            store.save_apd()
            store.save_vocabulary()
            print(f"{entry.id} added to store", file=sys.stderr)
        print(entry.id)
        return EXIT_OK

    parser.error(f"unknown apd command {args.apd_command!r}")


# --------------------------------------------------------------------------
# vocabulary maintenance

def cmd_vocab(args, parser) -> int:
    store = _require_store(args, parser)
    if args.vocab_command == "list":
        selector = VocabularyFilter(letter=args.letter, prefix=args.prefix)
        try:
            if args.keychains:
                for chain in store.vocabulary.filter_keychains(selector):
                    print(chain.rendering)
            else:
                for word in store.vocabulary.filter_keywords(selector):
                    print(word.text)
        except AutexError as exc:
            parser.error(str(exc))
        return EXIT_OK
    if args.vocab_command == "add":
        try:
            if args.keychain:
                chain = store.vocabulary.parse_keychain(args.text)
                print(chain.rendering)
            else:
                word = store.vocabulary.add_keyword(args.text)
                print(word.text)
        except AutexError as exc:
            _err(str(exc))
            return EXIT_INPUT
        store.save_vocabulary()
        return EXIT_OK
    parser.error(f"unknown vocab command {args.vocab_command!r}")


# --------------------------------------------------------------------------
# serve

def cmd_serve(args, parser) -> int:
    root = _store_root(args)
    if not root:
        parser.error("a store is required: pass --store or set AUTEX_STORE")
    try:
        print(f"serving store {root} on http://{args.host}:{args.port}/v1", file=sys.stderr)
        service.serve(root, host=args.host, port=args.port, gap_bound=args.gap_bound)
    except StoreLocked as exc:
        _err(str(exc))
        return EXIT_PARTIAL
    return EXIT_OK


# --------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autex",
        description="Rule-based keyword indexer for TeX e-prints.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--store", help="store root directory (default: $AUTEX_STORE)")
    common.add_argument(
        "--gap-bound",
        type=int,
        default=DEFAULT_GAP_BOUND,
        help=f"longest character run a gap class may bridge (default {DEFAULT_GAP_BOUND})",
    )
    common.add_argument(
        "--format",
        choices=("text", "json"),
        default="text",
        help="output format for listings and results",
    )

    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser(
        "index", parents=[common], help="index one document to a report file"
    )
    p_index.add_argument("document", help="TeX source file")
    p_index.add_argument("--apd", help="dictionary file (default: the store's)")
    p_index.add_argument(
        "--parts",
        default="title,abstract",
        help=f"comma-separated parts to scan; legal: {_POINTER_NAMES}",
    )
    p_index.add_argument("--out", help="report file path (default: <document>.report)")
    p_index.add_argument("--source-id", help="source id recorded in the report")
    p_index.set_defaults(func=cmd_index, parser_ref="index")

    p_batch = sub.add_parser(
        "batch", parents=[common], help="index many documents, or drain the store queue"
    )
    p_batch.add_argument("documents", nargs="*", help="TeX files (empty: use the store queue)")
    p_batch.add_argument("--apd", help="dictionary file (default: the store's)")
    p_batch.add_argument(
        "--parts",
        default="title,abstract",
        help=f"comma-separated parts to scan; legal: {_POINTER_NAMES}",
    )
    p_batch.add_argument("--out-dir", help="directory for report files")
    p_batch.set_defaults(func=cmd_batch)

    p_eval = sub.add_parser(
        "eval", parents=[common], help="compare an engine report against a reference"
    )
    p_eval.add_argument("--engine", help="engine report file")
    p_eval.add_argument("--reference", help="reference keychain list file")
    p_eval.add_argument(
        "--mode",
        choices=(evaluation.MODE_EXACT, evaluation.MODE_ORDER_INSENSITIVE),
        default=evaluation.MODE_EXACT,
    )
    p_eval.add_argument(
        "--corpus", help="directory of <name>.autex/<name>.report + <name>.ref pairs"
    )
    p_eval.set_defaults(func=cmd_eval)

    p_apd = sub.add_parser("apd", parents=[common], help="dictionary maintenance")
    apd_sub = p_apd.add_subparsers(dest="apd_command", required=True)
    p_lint = apd_sub.add_parser("lint", parents=[common], help="check every entry compiles")
    p_lint.add_argument("--apd", help="dictionary file (default: the store's)")
    p_lint.set_defaults(func=cmd_apd)
    p_list = apd_sub.add_parser("list", parents=[common], help="list entries with filters")
    p_list.add_argument("--apd", help="dictionary file (default: the store's)")
    p_list.add_argument("--letter", help="first-letter filter")
    p_list.add_argument("--prefix", help="prefix filter (at least two characters)")
    p_list.add_argument("--keychain", help="only entries mapping to this keychain")
    p_list.set_defaults(func=cmd_apd)
    p_add = apd_sub.add_parser("add", parents=[common], help="append an entry")
    p_add.add_argument("--apd", help="dictionary file (default: the store's)")
    p_add.add_argument("--pattern", required=True, help="pattern, alternatives split on |")
    p_add.add_argument("--keys", required=True, help="keychains, separated by ;")
    p_add.add_argument("--note", help="free-text note")
    p_add.set_defaults(func=cmd_apd)

    p_vocab = sub.add_parser("vocab", parents=[common], help="vocabulary maintenance")
    vocab_sub = p_vocab.add_subparsers(dest="vocab_command", required=True)
    v_list = vocab_sub.add_parser("list", parents=[common], help="list keywords or keychains")
    v_list.add_argument("--letter", help="first-letter filter")
    v_list.add_argument("--prefix", help="prefix filter (at least two characters)")
    v_list.add_argument("--keychains", action="store_true", help="list keychains instead")
    v_list.set_defaults(func=cmd_vocab)
    v_add = vocab_sub.add_parser("add", parents=[common], help="add a keyword or keychain")
    v_add.add_argument("text", help="keyword text, or keychain rendering with --keychain")
    v_add.add_argument("--keychain", action="store_true", help="add a keychain")
    v_add.set_defaults(func=cmd_vocab)

    p_serve = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.gap_bound < 1:
        parser.error("--gap-bound must be at least 1")
    try:
        return args.func(args, parser)
    except SystemExit:
        raise
    except BrokenPipeError:
        return EXIT_OK
    except AutexError as exc:
        _err(str(exc))
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
