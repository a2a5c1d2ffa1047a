"""Sources store: works as single-rooted typed object trees, addressed by anchors.

An anchor is a purely symbolic, work-level identifier:

    anchor := WORKID ":" [ TYPE "/" KEY { "/" TYPE "/" KEY } ]

WORKID, TYPE and KEY are nonempty percent-encoded segments. The safe
charset is [A-Za-z0-9_.-]; every other character is %XX-encoded (UTF-8
bytes, uppercase hex). An empty path denotes the work's root object.

Works are ingested from the corpus-interchange format: one JSON document
per work, ``{"work": id, "types": [t0..tn], "tree": node}`` where a node
is ``{"type","key","children":[...]}`` or ``{"type","key","text": token}``.

Works are immutable after ingest; replacing a work swaps it in atomically,
so concurrent readers always see a complete tree.
"""

from __future__ import annotations

import json
import string
from dataclasses import dataclass
from typing import Iterator

from .errors import (
    AnchorSyntaxError,
    IngestError,
    UnknownTypeError,
    UnknownWorkError,
    UnresolvedAnchorError,
)

_SAFE_CHARS = frozenset(string.ascii_letters + string.digits + "_.-")
_HEX_DIGITS = frozenset(string.hexdigits)


def encode_segment(text: str) -> str:
    """Percent-encode one anchor segment; [A-Za-z0-9_.-] stays bare."""
    out = []
    for ch in text:
        if ch in _SAFE_CHARS:
            out.append(ch)
        else:
            out.extend(f"%{b:02X}" for b in ch.encode("utf-8"))
    return "".join(out)


def decode_segment(segment: str, position: int = 0) -> str:
    """Inverse of encode_segment; rejects bare unsafe characters and bad escapes."""
    if segment == "":
        raise AnchorSyntaxError("empty segment", position)
    raw = bytearray()
    i = 0
    while i < len(segment):
        ch = segment[i]
        if ch == "%":
            esc = segment[i + 1 : i + 3]
            if len(esc) != 2 or not set(esc) <= _HEX_DIGITS:
                raise AnchorSyntaxError(f"bad percent escape {segment[i:i+3]!r}", position + i)
            raw.append(int(esc, 16))
            i += 3
        elif ch in _SAFE_CHARS:
            raw.append(ord(ch))
            i += 1
        else:
            raise AnchorSyntaxError(f"character {ch!r} must be percent-encoded", position + i)
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        raise AnchorSyntaxError("percent escapes are not valid UTF-8", position) from None


@dataclass(frozen=True)
class Anchor:
    """Work-level identifier for a work (empty path) or one of its fragments."""

    work_id: str
    path: tuple[tuple[str, str], ...] = ()

    def __str__(self) -> str:
        return format_anchor(self)

    def is_prefix_of(self, other: "Anchor") -> bool:
        """True if self addresses other or one of other's ancestors."""
        return (
            self.work_id == other.work_id
            and len(self.path) <= len(other.path)
            and other.path[: len(self.path)] == self.path
        )


def parse_anchor(text: str) -> Anchor:
    """Parse the canonical anchor form; positions in errors are 0-based offsets."""
    colon = text.find(":")
    if colon < 0:
        raise AnchorSyntaxError("expected ':'", len(text))
    work_id = decode_segment(text[:colon], 0)
    rest = text[colon + 1 :]
    if rest == "":
        return Anchor(work_id, ())
    segments = []
    offset = colon + 1
    for seg in rest.split("/"):
        segments.append((seg, offset))
        offset += len(seg) + 1
    if len(segments) % 2 != 0:
        raise AnchorSyntaxError("dangling type without key", segments[-1][1])
    path = []
    for i in range(0, len(segments), 2):
        tseg, tpos = segments[i]
        kseg, kpos = segments[i + 1]
        path.append((decode_segment(tseg, tpos), decode_segment(kseg, kpos)))
    return Anchor(work_id, tuple(path))


def format_anchor(anchor: Anchor) -> str:
    """Canonical text form; parse_anchor(format_anchor(a)) == a."""
    head = encode_segment(anchor.work_id) + ":"
    parts = []
    for object_type, key in anchor.path:
        parts.append(encode_segment(object_type))
        parts.append(encode_segment(key))
    return head + "/".join(parts)


@dataclass(frozen=True)
class TextObject:
    """A node in a work's granularity hierarchy.

    Internal nodes hold children, leaves hold a single token. ``span`` is the
    inclusive (first, last) leaf-index range the node covers; ``path`` is the
    (type, key) chain from the root down to and including this node.
    """

    object_type: str
    key: str
    path: tuple[tuple[str, str], ...]
    span: tuple[int, int]
    children: tuple["TextObject", ...] | None = None
    token: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.token is not None

    @property
    def depth(self) -> int:
        return len(self.path)

    def iter_subtree(self) -> Iterator["TextObject"]:
        yield self
        if self.children:
            for child in self.children:
                yield from child.iter_subtree()


class Work:
    """One ingested incarnation of a work, indexed for symbolic lookup."""

    def __init__(self, work_id: str, type_order: tuple[str, ...], root: TextObject):
        self.work_id = work_id
        self.type_order = type_order
        self.root = root
        self._by_path: dict[tuple[tuple[str, str], ...], TextObject] = {}
        self._by_type: dict[str, list[TextObject]] = {t: [] for t in type_order}
        self._leaves: list[TextObject] = []
        for obj in root.iter_subtree():
            self._by_path[obj.path] = obj
            self._by_type[obj.object_type].append(obj)
            if obj.is_leaf:
                self._leaves.append(obj)

    @property
    def leaves(self) -> list[TextObject]:
        return self._leaves

    @property
    def leaf_count(self) -> int:
        return len(self._leaves)

    def objects(self) -> Iterator[TextObject]:
        """All objects in document order (ancestors before descendants)."""
        return self.root.iter_subtree()

    def objects_of(self, object_type: str) -> list[TextObject]:
        """All objects of one type, in document order."""
        if object_type not in self._by_type:
            raise UnknownTypeError(f"unknown type: {object_type!r}")
        return list(self._by_type[object_type])

    def anchors_of(self, object_type: str) -> list[Anchor]:
        return [self.anchor_of(o) for o in self.objects_of(object_type)]

    def anchor_of(self, obj: TextObject) -> Anchor:
        return Anchor(self.work_id, obj.path)

    def resolve(self, path: tuple[tuple[str, str], ...]) -> TextObject:
        """Object at an exact (type, key) chain; the empty path is the root."""
        path = tuple(path)
        if not path:
            return self.root
        obj = self._by_path.get(path)
        if obj is not None:
            return obj
        for depth in range(1, len(path) + 1):
            if path[:depth] not in self._by_path:
                raise UnresolvedAnchorError(f"unresolved path at segment {depth}")
        raise UnresolvedAnchorError(f"unresolved path at segment {len(path)}")

    def text_of(self, obj: TextObject) -> str:
        first, last = obj.span
        return " ".join(leaf.token for leaf in self._leaves[first : last + 1])

    def doc_key(self, obj: TextObject) -> tuple[int, int, str]:
        """Sort key realizing document order: span start, ancestors first."""
        return (obj.span[0], obj.depth, format_anchor(self.anchor_of(obj)))


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise IngestError(message)


def _build_node(raw: object, parent_path: tuple, type_order: tuple[str, ...],
                parent_level: int, counter: list[int]) -> TextObject:
    _require(isinstance(raw, dict), "malformed document: node must be an object")
    object_type = raw.get("type")
    key = raw.get("key")
    _require(isinstance(object_type, str) and object_type != "", "malformed document: node missing 'type'")
    _require(isinstance(key, str) and key != "", "malformed document: node missing 'key'")
    if object_type not in type_order:
        raise IngestError(f"type not in type_order: {object_type!r}")
    level = type_order.index(object_type)
    if parent_level >= 0 and level <= parent_level:
        raise IngestError(
            f"child type {object_type!r} not finer than parent type {type_order[parent_level]!r}"
        )
    path = parent_path + ((object_type, key),)
    has_children = "children" in raw
    has_text = "text" in raw
    _require(not (has_children and has_text), f"node {key!r} has both children and text")
    _require(has_children or has_text, f"node {key!r} has neither children nor text")
    if has_text:
        token = raw["text"]
        _require(isinstance(token, str), "malformed document: 'text' must be a string")
        index = counter[0]
        counter[0] += 1
        return TextObject(object_type, key, path, (index, index), token=token)
    raw_children = raw["children"]
    _require(isinstance(raw_children, list) and raw_children, f"node {key!r} has empty children")
    children = []
    seen_keys = set()
    for raw_child in raw_children:
        child = _build_node(raw_child, path, type_order, level, counter)
        if child.key in seen_keys:
            raise IngestError(f"duplicate sibling key {child.key!r} under {key!r}")
        seen_keys.add(child.key)
        children.append(child)
    span = (children[0].span[0], children[-1].span[1])
    return TextObject(object_type, key, path, span, children=tuple(children))


def ingest_work(document: str) -> Work:
    """Build a Work from corpus-interchange text, computing spans and indexes."""
    try:
        data = json.loads(document)
    except ValueError as exc:
        raise IngestError(f"malformed document: {exc}") from None
    _require(isinstance(data, dict), "malformed document: top level must be an object")
    work_id = data.get("work")
    _require(isinstance(work_id, str) and work_id != "", "malformed document: missing 'work' id")
    types = data.get("types")
    _require(isinstance(types, list) and types, "malformed document: missing 'types'")
    _require(all(isinstance(t, str) and t for t in types), "malformed document: bad type name")
    _require(len(set(types)) == len(types), "malformed document: duplicate type name")
    tree = data.get("tree")
    _require(tree is not None, "malformed document: missing 'tree'")
    if isinstance(tree, list):
        if len(tree) != 1:
            raise IngestError("single root required")
        tree = tree[0]
    type_order = tuple(types)
    counter = [0]
    root = _build_node(tree, (), type_order, -1, counter)
    if root.object_type != type_order[0]:
        raise IngestError(f"root type must be {type_order[0]!r}, got {root.object_type!r}")
    return Work(work_id, type_order, root)


def work_to_document(work: Work) -> dict:
    """Canonical corpus-interchange object for a work (inverse of ingest)."""

    def node(obj: TextObject) -> dict:
        if obj.is_leaf:
            return {"type": obj.object_type, "key": obj.key, "text": obj.token}
        return {
            "type": obj.object_type,
            "key": obj.key,
            "children": [node(c) for c in obj.children],
        }

    return {"work": work.work_id, "types": list(work.type_order), "tree": node(work.root)}


class Corpus:
    """The in-memory sources store: a set of works, kept apart from annotations."""

    def __init__(self):
        self._works: dict[str, Work] = {}

    def ingest(self, document: str) -> Work:
        work = ingest_work(document)
        self._works[work.work_id] = work
        return work

    def add(self, work: Work) -> None:
        self._works[work.work_id] = work

    def get(self, work_id: str) -> Work:
        try:
            return self._works[work_id]
        except KeyError:
            raise UnknownWorkError(f"unknown work: {work_id!r}") from None

    def work_ids(self) -> list[str]:
        return sorted(self._works)

    def resolve_anchor(self, anchor: Anchor) -> tuple[Work, TextObject]:
        work = self.get(anchor.work_id)
        return work, work.resolve(anchor.path)

    def text_of(self, anchor: Anchor) -> str:
        work, obj = self.resolve_anchor(anchor)
        return work.text_of(obj)
