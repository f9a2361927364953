"""autex: rule-based keyword indexing for TeX e-prints.

A dictionary of phrase patterns maps onto keychains (ordered keyword
sequences) from a controlled vocabulary. Documents are pruned of TeX
markup, the requested parts are extracted, every pattern is run over them,
and the keychains of matching entries become the document's index, with
provenance recording which part each keychain came from.
"""

from .apd import Apd, ApdEntry, LintFinding, lint_apd, split_alternatives
from .errors import (
    AutexError,
    CorruptStore,
    EmptyApd,
    EmptyCorpus,
    EmptyKeychain,
    EmptyKeyword,
    EmptyPattern,
    InvalidFilter,
    MalformedTex,
    ParseError,
    SourceMismatch,
    StoreLocked,
    UnbalancedMath,
    UnknownKeychain,
    UnknownKeychainInReport,
    UnknownKeyword,
    UnsupportedConstruct,
)
from .evaluation import (
    ComparisonResult,
    CorpusMetrics,
    ReferenceReport,
    compare,
    corpus_metrics,
    parse_reference,
    render_comparison,
    render_reference,
)
from .indexer import (
    AssignedKeychain,
    BatchOutcome,
    EngineConfig,
    IndexReport,
    IndexRequest,
    ProcessQueue,
    apply_correction,
    enqueue,
    index_document,
    parse_report,
    render_report,
    run_batch,
)
from .matchengine import (
    DEFAULT_GAP_BOUND,
    CompiledAlternative,
    CompiledEntry,
    MatchHit,
    build_match_text,
    check_pattern,
    compile_alternative,
    compile_apd,
    compile_entry,
    match_document,
    match_slice,
)
from .store import ArticleRecord, QueueRow, Store, slugify
from .texprep import (
    POINTER_ORDER,
    DocumentParts,
    Pointer,
    TextSlice,
    extract_parts,
    normalize_math,
    parse_pointer,
    prune_tex,
)
from .vocabulary import (
    Keychain,
    Keyword,
    Vocabulary,
    VocabularyFilter,
    parse_keychain_text,
)

__version__ = "1.0.0"

__all__ = [name for name in dir() if not name.startswith("_")]
