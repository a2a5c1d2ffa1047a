"""Export annotation sets to a line-oriented triple format and read them back.

The format is deliberately plain: one triple per line, `<subject> <predicate>
object .`, where the object is either a `<URI>` or a double-quoted literal
with backslash escapes for `\\`, `"`, newline, carriage return, and tab.
Keeping the serialization line-oriented makes exports byte-reproducible and
therefore golden-file testable.

Mapping table (frozen; also documented in the README):

    annotation URI   base + "annotation/" + id
    body URI         annotation URI + "/body"
    word node URI    body URI + "/word/" + position (0-based)
    rdf:type         http://www.w3.org/1999/02/22-rdf-syntax-ns#type
    oa:Annotation    http://www.openannotation.org/spec/core#Annotation
    oa:hasBody       http://www.openannotation.org/spec/core#hasBody
    oa:hasTarget     http://www.openannotation.org/spec/core#hasTarget
    art:*            http://example.org/portann/terms/  followed by one of
                     kind, key, value, queryLanguage, queryText, resultCount,
                     keyword, topicId, label, word, weight, confidence
    metadata         http://example.org/portann/terms/meta/ + encoded name

Per annotation the triples appear in a fixed order: rdf:type, art:kind,
oa:hasBody, the body-field literals (fixed per-kind order), topic word nodes,
one oa:hasTarget per target in target order, metadata sorted by name.
Annotations are emitted in id order. Weight and confidence literals use up to
nine significant digits with no trailing zeros.

Anchors become URIs under `base + "work/"`; the work root maps to the bare
work URI. Importing keeps target URIs under a different base verbatim as
opaque strings and flags them, so foreign material survives a round trip.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .annotations import (
    Annotation,
    FeatureBody,
    KeywordBody,
    QueryBody,
    TopicBody,
)
from .corpus import Anchor, decode_segment, encode_segment
from .errors import AnchorSyntaxError, TripleSyntaxError

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
OA = "http://www.openannotation.org/spec/core#"
OA_ANNOTATION = OA + "Annotation"
OA_HAS_BODY = OA + "hasBody"
OA_HAS_TARGET = OA + "hasTarget"
ART = "http://example.org/portann/terms/"
ART_META = ART + "meta/"

_BASE_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*://\S+/$")

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _check_base(base: str) -> None:
    if not _BASE_RE.match(base):
        raise TripleSyntaxError(f"malformed base: {base!r}")


def anchor_to_uri(anchor: Anchor, base: str) -> str:
    """Translate a symbolic anchor into an absolute URI under a base."""
    _check_base(base)
    uri = base + "work/" + encode_segment(anchor.work_id)
    for object_type, key in anchor.path:
        uri += "/" + encode_segment(object_type) + "/" + encode_segment(key)
    return uri


def uri_to_anchor(uri: str, base: str) -> Anchor:
    """Inverse of anchor_to_uri for URIs under our own base."""
    _check_base(base)
    prefix = base + "work/"
    if not uri.startswith(prefix):
        raise TripleSyntaxError(f"foreign base: {uri!r}")
    segments = uri[len(prefix):].split("/")
    rest = segments[1:]
    if len(rest) % 2 != 0:
        raise TripleSyntaxError(f"dangling type: {uri!r}")
    try:
        work_id = decode_segment(segments[0])
        path = tuple(
            (decode_segment(rest[i]), decode_segment(rest[i + 1]))
            for i in range(0, len(rest), 2)
        )
    except AnchorSyntaxError as exc:
        raise TripleSyntaxError(f"bad anchor URI {uri!r}: {exc}") from None
    return Anchor(work_id, path)


def _literal(value: str) -> str:
    return '"' + "".join(_ESCAPES.get(ch, ch) for ch in value) + '"'


def _number(value: float) -> str:
    return f"{value:.9g}"


def _id_sort_key(annotation_id: str) -> tuple:
    if annotation_id.isdigit():
        return (0, int(annotation_id), "")
    return (1, 0, annotation_id)


def export_triples(annotations, base: str) -> str:
    """Serialize annotations deterministically; equal inputs, equal bytes."""
    _check_base(base)
    lines: list[str] = []

    def emit(subject: str, predicate: str, obj: str) -> None:
        lines.append(f"<{subject}> <{predicate}> {obj} .")

    for ann in sorted(annotations, key=lambda a: _id_sort_key(a.id)):
        ann_uri = base + "annotation/" + encode_segment(ann.id)
        body_uri = ann_uri + "/body"
        emit(ann_uri, RDF_TYPE, f"<{OA_ANNOTATION}>")
        emit(ann_uri, ART + "kind", _literal(ann.kind))
        emit(ann_uri, OA_HAS_BODY, f"<{body_uri}>")
        body = ann.body
        if isinstance(body, QueryBody):
            emit(body_uri, ART + "queryLanguage", _literal(body.language))
            emit(body_uri, ART + "queryText", _literal(body.text))
            emit(body_uri, ART + "resultCount", _literal(str(body.result_count)))
        elif isinstance(body, FeatureBody):
            emit(body_uri, ART + "key", _literal(body.key))
            emit(body_uri, ART + "value", _literal(body.value))
        elif isinstance(body, KeywordBody):
            emit(body_uri, ART + "keyword", _literal(body.keyword))
        elif isinstance(body, TopicBody):
            emit(body_uri, ART + "topicId", _literal(body.topic_id))
            emit(body_uri, ART + "label", _literal(body.label))
            emit(body_uri, ART + "confidence", _literal(_number(body.confidence)))
            for position, (word, weight) in enumerate(body.words):
                word_uri = f"{body_uri}/word/{position}"
                emit(word_uri, ART + "word", _literal(word))
                emit(word_uri, ART + "weight", _literal(_number(weight)))
        for target in ann.targets:
            if isinstance(target, Anchor):
                emit(ann_uri, OA_HAS_TARGET, f"<{anchor_to_uri(target, base)}>")
            else:
                emit(ann_uri, OA_HAS_TARGET, f"<{target}>")
        for name in sorted(ann.metadata):
            emit(ann_uri, ART_META + encode_segment(name), _literal(ann.metadata[name]))
    return "".join(line + "\n" for line in lines)


def _parse_uri(line: str, pos: int, number: int) -> tuple[str, int]:
    if pos >= len(line) or line[pos] != "<":
        raise TripleSyntaxError(f"line {number}: expected '<'")
    end = line.find(">", pos + 1)
    if end < 0:
        raise TripleSyntaxError(f"line {number}: unterminated URI")
    return line[pos + 1:end], end + 1


def _parse_literal(line: str, pos: int, number: int) -> tuple[str, int]:
    out = []
    i = pos + 1
    while True:
        if i >= len(line):
            raise TripleSyntaxError(f"line {number}: unterminated literal")
        ch = line[i]
        if ch == '"':
            return "".join(out), i + 1
        if ch == "\\":
            if i + 1 >= len(line) or line[i + 1] not in _UNESCAPES:
                raise TripleSyntaxError(f"line {number}: unknown escape")
            out.append(_UNESCAPES[line[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1


def parse_triples(document: str) -> list[tuple[str, str, tuple[str, str]]]:
    """Parse a triple document into (subject, predicate, (objkind, value))
    tuples, where objkind is "uri" or "literal". Blank lines are skipped."""
    triples = []
    for number, raw in enumerate(document.splitlines(), start=1):
        line = raw.rstrip()
        if not line:
            continue
        if not line.endswith(" ."):
            raise TripleSyntaxError(f"line {number}: missing ' .' terminator")
        body = line[:-2]
        subject, pos = _parse_uri(body, 0, number)
        if pos >= len(body) or body[pos] != " ":
            raise TripleSyntaxError(f"line {number}: expected space after subject")
        predicate, pos = _parse_uri(body, pos + 1, number)
        if pos >= len(body) or body[pos] != " ":
            raise TripleSyntaxError(f"line {number}: expected space after predicate")
        pos += 1
        if pos >= len(body):
            raise TripleSyntaxError(f"line {number}: missing object")
        if body[pos] == "<":
            value, pos = _parse_uri(body, pos, number)
            obj = ("uri", value)
        elif body[pos] == '"':
            value, pos = _parse_literal(body, pos, number)
            obj = ("literal", value)
        else:
            raise TripleSyntaxError(f"line {number}: malformed object")
        if pos != len(body):
            raise TripleSyntaxError(f"line {number}: trailing content")
        triples.append((subject, predicate, obj))
    return triples


@dataclass(frozen=True)
class ImportResult:
    annotations: tuple[Annotation, ...]
    id_map: dict[str, str]  # foreign id -> fresh local id
    opaque_targets: tuple[str, ...]  # target URIs kept verbatim


def import_triples(document: str, base: str, next_id: int = 1) -> ImportResult:
    """Reconstruct annotations from a triple document.

    Foreign annotation ids are remapped to fresh local ids (decimal strings
    counting up from next_id) in order of first appearance; the mapping is
    returned. Target URIs under a different base are kept verbatim as opaque
    anchor strings and flagged, not rejected.
    """
    _check_base(base)
    triples = parse_triples(document)
    ann_prefix = base + "annotation/"

    order: list[str] = []  # annotation URIs in first-appearance order
    kind_of: dict[str, str] = {}
    body_fields: dict[str, dict[str, str]] = {}
    words: dict[str, dict[int, dict[str, str]]] = {}
    targets: dict[str, list[str]] = {}
    metadata: dict[str, dict[str, str]] = {}

    word_re = re.compile(r"^(.*)/body/word/(\d+)$")

    for subject, predicate, (objkind, value) in triples:
        if not subject.startswith(ann_prefix):
            raise TripleSyntaxError(f"foreign subject: {subject!r}")
        word_match = word_re.match(subject)
        if word_match:
            ann_uri = word_match.group(1)
            position = int(word_match.group(2))
            slot = words.setdefault(ann_uri, {}).setdefault(position, {})
            if predicate == ART + "word":
                slot["word"] = value
            elif predicate == ART + "weight":
                slot["weight"] = value
            else:
                raise TripleSyntaxError(f"unexpected word-node predicate: {predicate!r}")
            continue
        ann_uri = subject[:-5] if subject.endswith("/body") else subject
        if ann_uri not in kind_of:
            order.append(ann_uri)
            kind_of[ann_uri] = ""
            body_fields[ann_uri] = {}
            targets[ann_uri] = []
            metadata[ann_uri] = {}
        if subject.endswith("/body"):
            if not predicate.startswith(ART):
                raise TripleSyntaxError(f"unexpected body predicate: {predicate!r}")
            body_fields[ann_uri][predicate[len(ART):]] = value
            continue
        if predicate == RDF_TYPE:
            continue
        if predicate == ART + "kind":
            kind_of[ann_uri] = value
        elif predicate == OA_HAS_BODY:
            pass  # body node is recognized by its URI shape
        elif predicate == OA_HAS_TARGET:
            if objkind != "uri":
                raise TripleSyntaxError("target must be a URI")
            targets[ann_uri].append(value)
        elif predicate.startswith(ART_META):
            name = decode_segment(predicate[len(ART_META):])
            metadata[ann_uri][name] = value
        else:
            raise TripleSyntaxError(f"unknown predicate: {predicate!r}")

    annotations: list[Annotation] = []
    id_map: dict[str, str] = {}
    opaque: list[str] = []
    counter = next_id
    for ann_uri in order:
        try:
            foreign_id = decode_segment(ann_uri[len(ann_prefix):])
        except AnchorSyntaxError as exc:
            raise TripleSyntaxError(f"bad annotation URI {ann_uri!r}: {exc}") from None
        kind = kind_of[ann_uri]
        if kind not in ("query", "feature", "keyword", "topic"):
            raise TripleSyntaxError(f"annotation {foreign_id!r}: unknown kind {kind!r}")
        body = _build_body(kind, foreign_id, body_fields[ann_uri],
                           words.get(ann_uri, {}))
        if not targets[ann_uri]:
            raise TripleSyntaxError(f"annotation {foreign_id!r}: no target")
        resolved_targets: list[Anchor | str] = []
        for uri in targets[ann_uri]:
            if uri.startswith(base + "work/"):
                resolved_targets.append(uri_to_anchor(uri, base))
            else:
                resolved_targets.append(uri)
                if uri not in opaque:
                    opaque.append(uri)
        local_id = str(counter)
        counter += 1
        id_map[foreign_id] = local_id
        annotations.append(
            Annotation(local_id, kind, body, tuple(resolved_targets),
                       metadata[ann_uri])
        )
    return ImportResult(tuple(annotations), id_map, tuple(opaque))


def _field(fields: dict[str, str], name: str, foreign_id: str) -> str:
    try:
        return fields[name]
    except KeyError:
        raise TripleSyntaxError(
            f"annotation {foreign_id!r}: missing body field {name!r}"
        ) from None


def _build_body(kind: str, foreign_id: str, fields: dict[str, str],
                word_slots: dict[int, dict[str, str]]):
    try:
        if kind == "query":
            return QueryBody(
                language=_field(fields, "queryLanguage", foreign_id),
                text=_field(fields, "queryText", foreign_id),
                result_count=int(_field(fields, "resultCount", foreign_id)),
            )
        if kind == "feature":
            return FeatureBody(
                key=_field(fields, "key", foreign_id),
                value=_field(fields, "value", foreign_id),
            )
        if kind == "keyword":
            return KeywordBody(keyword=_field(fields, "keyword", foreign_id))
        word_list = []
        for position in sorted(word_slots):
            slot = word_slots[position]
            if "word" not in slot or "weight" not in slot:
                raise TripleSyntaxError(
                    f"annotation {foreign_id!r}: incomplete word node {position}"
                )
            word_list.append((slot["word"], float(slot["weight"])))
        return TopicBody(
            topic_id=_field(fields, "topicId", foreign_id),
            label=_field(fields, "label", foreign_id),
            words=tuple(word_list),
            confidence=float(_field(fields, "confidence", foreign_id)),
        )
    except ValueError as exc:
        raise TripleSyntaxError(f"annotation {foreign_id!r}: {exc}") from None
