"""Portable annotations over hierarchical text corpora.

Sources and annotations live in two separate stores connected only by
symbolic anchors, so annotations stay portable: they can outlive their
sources, travel between archives as linked-data triples, and be re-anchored
on new incarnations of a work.
"""

from .annotations import (
    Annotation,
    AnnotationStore,
    FeatureBody,
    KeywordBody,
    QueryBody,
    TopicBody,
)
from .archive import Archive
from .corpus import (
    Anchor,
    Corpus,
    TextObject,
    Work,
    format_anchor,
    ingest_work,
    parse_anchor,
    work_to_document,
)
from .errors import (
    AnchorSyntaxError,
    EmptyResultError,
    FeatureTableError,
    IngestError,
    PortannError,
    PortingError,
    QueryError,
    QuerySyntaxError,
    ResolutionError,
    StoreFormatError,
    TripleSyntaxError,
    UnknownAnnotationError,
    UnknownTypeError,
    UnknownWorkError,
    UnresolvedAnchorError,
    ValidationError,
)
from .features import FeatureStore
from .linkeddata import (
    ImportResult,
    anchor_to_uri,
    export_triples,
    import_triples,
    uri_to_anchor,
)
from .porter import (
    Alignment,
    Link,
    PortOutcome,
    PortReport,
    align_works,
    alignment_cost,
    normalize_token,
    port_annotation,
)
from .tql import Block, Match, QueryResult, parse_query, run_query

__version__ = "0.1.0"

__all__ = [
    "Anchor",
    "Annotation",
    "AnnotationStore",
    "Alignment",
    "Archive",
    "Block",
    "Corpus",
    "FeatureBody",
    "FeatureStore",
    "ImportResult",
    "KeywordBody",
    "Link",
    "Match",
    "PortOutcome",
    "PortReport",
    "QueryBody",
    "QueryResult",
    "TextObject",
    "TopicBody",
    "Work",
    "align_works",
    "alignment_cost",
    "anchor_to_uri",
    "export_triples",
    "format_anchor",
    "import_triples",
    "ingest_work",
    "normalize_token",
    "parse_anchor",
    "parse_query",
    "port_annotation",
    "run_query",
    "uri_to_anchor",
    "work_to_document",
    "AnchorSyntaxError",
    "EmptyResultError",
    "FeatureTableError",
    "IngestError",
    "PortannError",
    "PortingError",
    "QueryError",
    "QuerySyntaxError",
    "ResolutionError",
    "StoreFormatError",
    "TripleSyntaxError",
    "UnknownAnnotationError",
    "UnknownTypeError",
    "UnknownWorkError",
    "UnresolvedAnchorError",
    "ValidationError",
]
