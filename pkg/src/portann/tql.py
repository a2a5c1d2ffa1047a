"""A small topographic query language: containment and order over typed objects.

Grammar (whitespace-insensitive):

    query := block
    block := "[" TYPE test* block* "]"
    test  := KEY ("=" | "!=") (BAREWORD | QUOTED)

TYPE, KEY and BAREWORD are runs of [A-Za-z0-9_.-]; QUOTED is a double-quoted
string whose only escapes are \\" and \\\\. Tests must precede child blocks.

Semantics of evaluation over a work plus its feature assignments:

  * a block binds an object of exactly its type that passes all tests;
    "=" fails on an absent key, "!=" succeeds on an absent key;
  * each child block binds a strict descendant of its parent block's object;
  * consecutive sibling bindings have strictly increasing, non-overlapping
    spans (next start > previous end);
  * matches are produced in lexicographic document order of their binding
    tuples (blocks taken in pre-order), truncated at the limit.

Evaluation is a pure function of immutable inputs and is safe to run
concurrently.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Iterator

from .corpus import Anchor, TextObject, Work
from .errors import QueryError, QuerySyntaxError
from .features import FeatureStore

DEFAULT_LIMIT = 10000

_WORD_CHARS = frozenset(
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_.-"
)


@dataclass(frozen=True)
class Block:
    """One query block: an object type, feature tests, nested blocks."""

    object_type: str
    tests: tuple[tuple[str, str, str], ...] = ()  # (key, op, value), op in {"=", "!="}
    children: tuple["Block", ...] = ()


@dataclass(frozen=True)
class Match:
    """One query result: a binding per block, keyed by block path in the AST."""

    bindings: tuple[tuple[tuple[int, ...], Anchor], ...]


@dataclass(frozen=True)
class QueryResult:
    matches: tuple[Match, ...]
    truncated: bool = False


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.col = 1

    def location(self) -> tuple[int, int]:
        return self.line, self.col

    def _advance(self, n: int = 1) -> None:
        for _ in range(n):
            if self.pos < len(self.text) and self.text[self.pos] == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
            self.pos += 1

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self._advance()

    def peek(self) -> str | None:
        return self.text[self.pos] if self.pos < len(self.text) else None

    def take_word(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] in _WORD_CHARS:
            self._advance()
        return self.text[start : self.pos]

    def take_quoted(self) -> str:
        open_line, open_col = self.location()
        self._advance()  # opening quote
        out = []
        while True:
            ch = self.peek()
            if ch is None:
                raise QuerySyntaxError("unterminated quoted value", open_line, open_col)
            if ch == '"':
                self._advance()
                return "".join(out)
            if ch == "\\":
                esc_line, esc_col = self.location()
                self._advance()
                esc = self.peek()
                if esc not in ('"', "\\"):
                    shown = "end of input" if esc is None else repr(esc)
                    raise QuerySyntaxError(f"unknown escape {shown}", esc_line, esc_col)
                out.append(esc)
                self._advance()
            else:
                out.append(ch)
                self._advance()


def parse_query(text: str) -> Block:
    """Parse query text to its AST; errors carry 1-based line:column positions."""
    scanner = _Scanner(text)
    scanner.skip_ws()
    if scanner.peek() != "[":
        raise QuerySyntaxError("expected '['", *scanner.location())
    block = _parse_block(scanner)
    scanner.skip_ws()
    if scanner.peek() is not None:
        raise QuerySyntaxError("unexpected content after query", *scanner.location())
    return block


def _parse_block(scanner: _Scanner) -> Block:
    scanner._advance()  # "["
    scanner.skip_ws()
    object_type = scanner.take_word()
    if not object_type:
        raise QuerySyntaxError("expected object type", *scanner.location())
    tests: list[tuple[str, str, str]] = []
    children: list[Block] = []
    while True:
        scanner.skip_ws()
        ch = scanner.peek()
        if ch is None:
            raise QuerySyntaxError("unclosed block", *scanner.location())
        if ch == "]":
            scanner._advance()
            return Block(object_type, tuple(tests), tuple(children))
        if ch == "[":
            children.append(_parse_block(scanner))
            continue
        if ch in _WORD_CHARS:
            key_line, key_col = scanner.location()
            if children:
                raise QuerySyntaxError("tests must precede child blocks", key_line, key_col)
            key = scanner.take_word()
            op = _parse_op(scanner)
            scanner.skip_ws()
            value_ch = scanner.peek()
            if value_ch == '"':
                value = scanner.take_quoted()
            elif value_ch in _WORD_CHARS if value_ch else False:
                value = scanner.take_word()
            else:
                raise QuerySyntaxError("expected test value", *scanner.location())
            tests.append((key, op, value))
            continue
        raise QuerySyntaxError(f"unexpected character {ch!r}", *scanner.location())


def _parse_op(scanner: _Scanner) -> str:
    scanner.skip_ws()
    ch = scanner.peek()
    if ch == "=":
        scanner._advance()
        return "="
    if ch == "!":
        scanner._advance()
        if scanner.peek() == "=":
            scanner._advance()
            return "!="
        raise QuerySyntaxError("expected '=' after '!'", *scanner.location())
    raise QuerySyntaxError("expected '=' or '!='", *scanner.location())


def _blocks_preorder(block: Block, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], Block]]:
    yield path, block
    for i, child in enumerate(block.children):
        yield from _blocks_preorder(child, path + (i,))


def _passes_tests(features: FeatureStore, anchor: Anchor, tests) -> bool:
    for key, op, value in tests:
        actual = features.value(anchor, key)
        if op == "=":
            if actual != value:
                return False
        else:  # "!=": absent counts as "not that value"
            if actual == value:
                return False
    return True


def _is_strict_descendant(obj: TextObject, ancestor: TextObject) -> bool:
    return len(obj.path) > len(ancestor.path) and obj.path[: len(ancestor.path)] == ancestor.path


def run_query(work: Work, features: FeatureStore, ast: Block,
              limit: int | None = DEFAULT_LIMIT) -> QueryResult:
    """Evaluate a query; deterministic, re-runnable, document-ordered.

    ``limit=None`` disables truncation (used when freezing results).
    """
    if limit is not None and limit <= 0:
        raise QueryError("limit must be positive")
    blocks = list(_blocks_preorder(ast))
    for _, block in blocks:
        if block.object_type not in work.type_order:
            raise QueryError(f"unknown object type: {block.object_type!r}")

    candidates: dict[tuple[int, ...], list[TextObject]] = {}
    starts: dict[tuple[int, ...], list[int]] = {}
    for path, block in blocks:
        objs = [
            obj
            for obj in work.objects_of(block.object_type)
            if _passes_tests(features, work.anchor_of(obj), block.tests)
        ]
        candidates[path] = objs
        starts[path] = [o.span[0] for o in objs]

    def bind(block_path: tuple[int, ...], block: Block, parent: TextObject | None,
             min_start: int) -> Iterator[tuple[list, int]]:
        """Yield (bindings for block's subtree in pre-order, span end of block's object)."""
        objs = candidates[block_path]
        lo = bisect_left(starts[block_path], min_start)
        for obj in objs[lo:]:
            if parent is not None:
                if obj.span[0] > parent.span[1]:
                    break
                if obj.span[1] > parent.span[1] or not _is_strict_descendant(obj, parent):
                    continue
            for sub in bind_children(block.children, block_path, obj):
                yield [(block_path, obj)] + sub, obj.span[1]

    def bind_children(children: tuple[Block, ...], base_path: tuple[int, ...],
                      parent: TextObject) -> Iterator[list]:
        def rec(index: int, min_start: int) -> Iterator[list]:
            if index == len(children):
                yield []
                return
            child_path = base_path + (index,)
            for head, end in bind(child_path, children[index], parent, min_start):
                for tail in rec(index + 1, end + 1):
                    yield head + tail

        # descendants of parent cannot start before parent's span does
        return rec(0, parent.span[0])

    matches: list[Match] = []
    truncated = False
    for bindings, _ in bind((), ast, None, 0):
        if limit is not None and len(matches) == limit:
            truncated = True
            break
        matches.append(
            Match(tuple((path, work.anchor_of(obj)) for path, obj in bindings))
        )
    return QueryResult(tuple(matches), truncated)
