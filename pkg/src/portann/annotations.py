"""Annotations: typed bodies bound to symbolic anchors, with persistence.

An annotation is a record ``(id, kind, body, targets, metadata)``. Bodies come
in four kinds (query, feature, keyword, topic); targets are one or more
anchors; metadata is an open name-to-text map carried alongside the record,
never inside body or targets. Targets must be syntactically valid anchors at
creation time, but nothing requires them to stay resolvable: sources can be
archived away and the annotations remain usable.

Persistence is line-oriented: one JSON record per line, UTF-8, written
atomically. Loading a file twice is idempotent (records replace by id).
"""

from __future__ import annotations

import json
import os
import tempfile
import threading
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Callable, ClassVar, Iterable, Union

from .corpus import Anchor, Work, parse_anchor
from .errors import (
    EmptyResultError,
    StoreFormatError,
    UnknownAnnotationError,
    ValidationError,
)
from .features import FeatureStore
from .tql import parse_query, run_query

KINDS = ("query", "feature", "keyword", "topic")

RESERVED_METADATA = (
    "author",
    "created",
    "project",
    "publications",
    "research_problem",
    "last_run",
)

WEIGHT_TOLERANCE = 1e-9

# Targets are Anchor values; opaque strings appear only for imported targets
# whose URIs lived under a foreign base and cannot be parsed locally.
Target = Union[Anchor, str]

Clock = Callable[[], str]


def utc_clock() -> str:
    """Current time as an ISO-8601 UTC string with second precision."""
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class QueryBody:
    kind: ClassVar[str] = "query"
    language: str
    text: str
    result_count: int

    def render(self) -> str:
        return self.text

    def to_json(self) -> dict:
        return {
            "language": self.language,
            "text": self.text,
            "result_count": self.result_count,
        }


@dataclass(frozen=True)
class FeatureBody:
    kind: ClassVar[str] = "feature"
    key: str
    value: str

    def render(self) -> str:
        return f"{self.key}={self.value}"

    def to_json(self) -> dict:
        return {"key": self.key, "value": self.value}


@dataclass(frozen=True)
class KeywordBody:
    kind: ClassVar[str] = "keyword"
    keyword: str

    def render(self) -> str:
        return self.keyword

    def to_json(self) -> dict:
        return {"keyword": self.keyword}


@dataclass(frozen=True)
class TopicBody:
    """A topic-model topic plus the assignment confidence, in one body."""

    kind: ClassVar[str] = "topic"
    topic_id: str
    label: str
    words: tuple[tuple[str, float], ...]
    confidence: float

    def __post_init__(self):
        for _, weight in self.words:
            if not weight > 0:
                raise ValidationError("weights must be positive")
        total = sum(weight for _, weight in self.words)
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ValidationError("weights must sum to 1")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError("confidence out of range")

    def render(self) -> str:
        return f"{self.topic_id}: {self.label}"

    def to_json(self) -> dict:
        return {
            "topic_id": self.topic_id,
            "label": self.label,
            "words": [{"word": w, "weight": wt} for w, wt in self.words],
            "confidence": self.confidence,
        }


Body = Union[QueryBody, FeatureBody, KeywordBody, TopicBody]


@dataclass(frozen=True)
class Annotation:
    id: str
    kind: str
    body: Body
    targets: tuple[Target, ...]
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown annotation kind: {self.kind!r}")
        if self.body.kind != self.kind:
            raise ValidationError(
                f"body of kind {self.body.kind!r} under annotation kind {self.kind!r}"
            )
        if not self.targets:
            raise ValidationError("one or more targets required")

    def target_strings(self) -> list[str]:
        return [str(t) for t in self.targets]


def _body_from_json(kind: str, obj) -> Body:
    if not isinstance(obj, dict):
        raise ValidationError("body must be an object")
    try:
        if kind == "query":
            return QueryBody(
                language=str(obj["language"]),
                text=str(obj["text"]),
                result_count=int(obj["result_count"]),
            )
        if kind == "feature":
            return FeatureBody(key=str(obj["key"]), value=str(obj["value"]))
        if kind == "keyword":
            return KeywordBody(keyword=str(obj["keyword"]))
        if kind == "topic":
            words = tuple(
                (str(w["word"]), float(w["weight"])) for w in obj["words"]
            )
            return TopicBody(
                topic_id=str(obj["topic_id"]),
                label=str(obj["label"]),
                words=words,
                confidence=float(obj["confidence"]),
            )
    except KeyError as exc:
        raise ValidationError(f"body missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"bad body field: {exc}") from None
    raise ValidationError(f"unknown annotation kind: {kind!r}")


def annotation_to_json(ann: Annotation) -> dict:
    return {
        "id": ann.id,
        "kind": ann.kind,
        "body": ann.body.to_json(),
        "targets": ann.target_strings(),
        "metadata": dict(ann.metadata),
    }


def annotation_from_json(obj) -> Annotation:
    if not isinstance(obj, dict):
        raise ValidationError("record must be an object")
    for name in ("id", "kind", "body", "targets", "metadata"):
        if name not in obj:
            raise ValidationError(f"missing field {name!r}")
    kind = obj["kind"]
    if kind not in KINDS:
        raise ValidationError(f"unknown annotation kind: {kind!r}")
    body = _body_from_json(kind, obj["body"])
    raw_targets = obj["targets"]
    if not isinstance(raw_targets, list) or not raw_targets:
        raise ValidationError("one or more targets required")
    targets = tuple(_target_from_string(str(t)) for t in raw_targets)
    metadata_obj = obj["metadata"]
    if not isinstance(metadata_obj, dict):
        raise ValidationError("metadata must be an object")
    metadata = {}
    for name, value in metadata_obj.items():
        if not isinstance(value, str):
            raise ValidationError(f"metadata value for {name!r} must be text")
        metadata[str(name)] = value
    return Annotation(str(obj["id"]), kind, body, targets, metadata)


def _target_from_string(text: str) -> Target:
    """Parse a stored target, keeping unparseable (foreign) ones opaque."""
    from .errors import AnchorSyntaxError

    try:
        return parse_anchor(text)
    except AnchorSyntaxError:
        return text


def _id_sort_key(annotation_id: str) -> tuple:
    if annotation_id.isdigit():
        return (0, int(annotation_id), "")
    return (1, 0, annotation_id)


def _clean_metadata(metadata: dict[str, str] | None) -> dict[str, str]:
    if not metadata:
        return {}
    return {str(k): str(v) for k, v in metadata.items()}


class AnnotationStore:
    """All annotations of one archive; the only link to sources is anchors.

    Mutations are serialized behind an internal lock so the store behaves
    under the threaded HTTP service; reads take point-in-time snapshots.
    """

    def __init__(self, clock: Clock | None = None):
        self._lock = threading.Lock()
        self._by_id: dict[str, Annotation] = {}
        self._next_id = 1
        self.clock: Clock = clock or utc_clock

    def __len__(self) -> int:
        return len(self._by_id)

    def get(self, annotation_id: str) -> Annotation:
        try:
            return self._by_id[annotation_id]
        except KeyError:
            raise UnknownAnnotationError(
                f"unknown annotation: {annotation_id!r}"
            ) from None

    def all(self) -> list[Annotation]:
        anns = list(self._by_id.values())
        anns.sort(key=lambda a: _id_sort_key(a.id))
        return anns

    def register(self, annotation: Annotation) -> Annotation:
        """Store an annotation, assigning a fresh id when the given one is empty."""
        with self._lock:
            return self._register_locked(annotation)

    def _register_locked(self, annotation: Annotation) -> Annotation:
        if not annotation.id:
            annotation = replace(annotation, id=str(self._next_id))
        self._by_id[annotation.id] = annotation
        if annotation.id.isdigit():
            self._next_id = max(self._next_id, int(annotation.id) + 1)
        return annotation

    # ------------------------------------------------------------------
    # creation operations

    def freeze_query(self, work: Work, features: FeatureStore, query_text: str,
                     metadata: dict[str, str] | None = None,
                     clock: Clock | None = None) -> Annotation:
        """Run a query and freeze its full binding set as one annotation.

        Targets are the deduplicated anchors of every bound object of every
        match, outer and inner blocks alike, in document order. The metadata
        records the moment of the run under ``last_run``.
        """
        ast = parse_query(query_text)
        result = run_query(work, features, ast, limit=None)
        anchors: set[Anchor] = set()
        for match in result.matches:
            for _, anchor in match.bindings:
                anchors.add(anchor)
        if not anchors:
            raise EmptyResultError("empty result; nothing to freeze")
        ordered = sorted(anchors, key=lambda a: work.doc_key(work.resolve(a.path)))
        meta = _clean_metadata(metadata)
        meta["last_run"] = (clock or self.clock)()
        body = QueryBody("tql", query_text, len(result.matches))
        return self.register(Annotation("", "query", body, tuple(ordered), meta))

    def freeze_feature(self, work: Work, features: FeatureStore, key: str,
                       value: str, metadata: dict[str, str] | None = None) -> Annotation:
        """Freeze the extension of one (key, value) pair as an annotation."""
        targets = features.objects_with(work, key, value)
        if not targets:
            raise EmptyResultError("empty result; nothing to freeze")
        body = FeatureBody(key, value)
        return self.register(
            Annotation("", "feature", body, tuple(targets), _clean_metadata(metadata))
        )

    def assign_keyword(self, keyword: str, targets: Iterable[Anchor | str],
                       metadata: dict[str, str] | None = None) -> Annotation:
        """Attach a keyword to whole objects; no fragment addressing."""
        anchors = [t if isinstance(t, Anchor) else parse_anchor(t) for t in targets]
        deduped = tuple(dict.fromkeys(anchors))
        if not deduped:
            raise ValidationError("one or more targets required")
        body = KeywordBody(keyword)
        return self.register(
            Annotation("", "keyword", body, deduped, _clean_metadata(metadata))
        )

    def assign_topic(self, topic: TopicBody, target: Anchor | str,
                     metadata: dict[str, str] | None = None) -> Annotation:
        """One annotation per (topic, target); confidence travels in the body."""
        anchor = target if isinstance(target, Anchor) else parse_anchor(target)
        return self.register(
            Annotation("", "topic", topic, (anchor,), _clean_metadata(metadata))
        )

    # ------------------------------------------------------------------
    # lookup

    def annotations_targeting(self, anchor: Anchor, scope: str = "exact") -> list[Annotation]:
        """Annotations whose targets touch an anchor, widened by scope.

        ``exact`` requires the anchor itself among the targets; ``ancestors``
        also accepts targets that are prefix-anchors of it, ``descendants``
        targets that extend it, ``all`` both.
        """
        if scope not in ("exact", "ancestors", "descendants", "all"):
            raise ValidationError(f"unknown scope: {scope!r}")
        up = scope in ("ancestors", "all")
        down = scope in ("descendants", "all")
        hits = []
        for ann in self._by_id.values():
            if self._touches(ann, anchor, up, down):
                hits.append(ann)
        hits.sort(key=lambda a: (a.kind, _id_sort_key(a.id)))
        return hits

    @staticmethod
    def _touches(ann: Annotation, anchor: Anchor, up: bool, down: bool) -> bool:
        for target in ann.targets:
            if not isinstance(target, Anchor):
                continue
            if target == anchor:
                return True
            if up and target.is_prefix_of(anchor):
                return True
            if down and anchor.is_prefix_of(target):
                return True
        return False

    def filter(self, kind: str | None = None, body_substring: str | None = None,
               work: str | None = None,
               metadata: dict[str, str] | None = None) -> list[Annotation]:
        """Conjunction of optional criteria; no criteria lists everything."""
        hits = []
        for ann in self.all():
            if kind is not None and ann.kind != kind:
                continue
            if body_substring is not None and body_substring not in ann.body.render():
                continue
            if work is not None and not any(
                isinstance(t, Anchor) and t.work_id == work for t in ann.targets
            ):
                continue
            if metadata and any(
                ann.metadata.get(k) != v for k, v in metadata.items()
            ):
                continue
            hits.append(ann)
        return hits

    # ------------------------------------------------------------------
    # persistence

    def save(self, path: str | os.PathLike) -> int:
        """Write every annotation, one JSON record per line, atomically."""
        with self._lock:
            records = [
                json.dumps(annotation_to_json(ann), ensure_ascii=False)
                for ann in self.all()
            ]
        payload = "".join(record + "\n" for record in records)
        directory = os.path.dirname(os.path.abspath(path)) or "."
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".annotations-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as handle:
                handle.write(payload)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return len(records)

    def load(self, path: str | os.PathLike) -> int:
        """Read records from a store file; same-id records replace, so the
        operation is idempotent. Errors carry 1-based line numbers."""
        with open(path, encoding="utf-8") as handle:
            lines = handle.readlines()
        count = 0
        with self._lock:
            for number, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise StoreFormatError(f"line {number}: {exc.msg}") from None
                try:
                    ann = annotation_from_json(record)
                except ValidationError as exc:
                    raise StoreFormatError(f"line {number}: {exc}") from None
                self._register_locked(ann)
                count += 1
        return count
