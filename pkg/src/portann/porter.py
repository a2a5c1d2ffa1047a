"""Align two incarnations of a work and port annotations across them.

Alignment works at the leaf-token level. Tokens are first normalized by a
configurable pipeline (case folding, diacritic stripping, punctuation
stripping), then a dynamic program finds the minimum-cost monotone alignment
using five moves:

    one_one   1-to-1, normalized tokens equal          cost 0
    merge     k-to-1 (2 <= k <= max_group), the k      cost 1
              source tokens concatenate to the dest
    split     1-to-k, symmetric to merge               cost 1
    modified  1-to-1, normalized tokens differ         cost 2
    gap       token unmatched on either side           cost 2 per token

Ties prefer one_one, then merge, then split, then modified, then gaps
(source gap before dest gap; smaller groups first). The cost constants and
tie order are fixed so that alignments are reproducible.

Porting maps each target of an annotation through the alignment: resolve the
target to its source leaf span, collect the linked destination leaves, and
re-anchor at the smallest destination object covering them. Targets touching
an unmatched source leaf are dropped; everything else is reported as exact,
merged, split, or modified.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, replace

from .annotations import Annotation
from .corpus import Anchor, TextObject, Work
from .errors import PortingError

NORMALIZATION_RULES = ("lowercase", "strip-diacritics", "strip-punctuation")

DEFAULT_MAX_GROUP = 4

_COST_GROUP = 1
_COST_MODIFIED = 2
_COST_GAP = 2


def normalize_token(token: str, rules: list[str] | tuple[str, ...]) -> str:
    """Apply normalization rules left to right; empty pipeline is identity."""
    out = token
    for rule in rules:
        if rule == "lowercase":
            out = out.casefold()
        elif rule == "strip-diacritics":
            decomposed = unicodedata.normalize("NFD", out)
            out = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
        elif rule == "strip-punctuation":
            out = "".join(
                ch for ch in out if not unicodedata.category(ch).startswith("P")
            )
        else:
            raise PortingError(f"unknown normalization rule: {rule!r}")
    return out


@dataclass(frozen=True)
class Link:
    source_leaf_anchors: tuple[Anchor, ...]
    dest_leaf_anchors: tuple[Anchor, ...]
    link_kind: str  # one_one | merge | split | modified


@dataclass(frozen=True)
class Alignment:
    """A leaf-level correspondence between two works.

    Every leaf of either work appears in exactly one link or one unmatched
    list, and link spans strictly increase on both sides.
    """

    source_work: Work
    dest_work: Work
    links: tuple[Link, ...]
    unmatched_source: tuple[Anchor, ...]
    unmatched_dest: tuple[Anchor, ...]

    @property
    def source_work_id(self) -> str:
        return self.source_work.work_id

    @property
    def dest_work_id(self) -> str:
        return self.dest_work.work_id


def align_works(source: Work, dest: Work, rules: list[str] | tuple[str, ...] = (),
                max_group: int = DEFAULT_MAX_GROUP) -> Alignment:
    """Minimum-cost monotone leaf alignment under the normalization pipeline."""
    if max_group < 1:
        raise PortingError("max_group must be at least 1")
    src_tokens = [normalize_token(leaf.token, rules) for leaf in source.leaves]
    dst_tokens = [normalize_token(leaf.token, rules) for leaf in dest.leaves]
    m, n = len(src_tokens), len(dst_tokens)

    INF = float("inf")
    cost = [[INF] * (n + 1) for _ in range(m + 1)]
    move: list[list[tuple[str, int, int] | None]] = [
        [None] * (n + 1) for _ in range(m + 1)
    ]
    cost[0][0] = 0.0

    for i in range(m + 1):
        for j in range(n + 1):
            if i == 0 and j == 0:
                continue
            best = INF
            best_move = None
            # candidates in tie-preference order; strict "<" keeps the first
            candidates = []
            if i >= 1 and j >= 1:
                if src_tokens[i - 1] == dst_tokens[j - 1]:
                    candidates.append(("one_one", 1, 1, cost[i - 1][j - 1]))
            for k in range(2, max_group + 1):
                if i >= k and j >= 1 and "".join(src_tokens[i - k:i]) == dst_tokens[j - 1]:
                    candidates.append(("merge", k, 1, cost[i - k][j - 1] + _COST_GROUP))
            for k in range(2, max_group + 1):
                if i >= 1 and j >= k and src_tokens[i - 1] == "".join(dst_tokens[j - k:j]):
                    candidates.append(("split", 1, k, cost[i - 1][j - k] + _COST_GROUP))
            if i >= 1 and j >= 1 and src_tokens[i - 1] != dst_tokens[j - 1]:
                candidates.append(("modified", 1, 1, cost[i - 1][j - 1] + _COST_MODIFIED))
            if i >= 1:
                candidates.append(("gap_source", 1, 0, cost[i - 1][j] + _COST_GAP))
            if j >= 1:
                candidates.append(("gap_dest", 0, 1, cost[i][j - 1] + _COST_GAP))
            for kind, di, dj, total in candidates:
                if total < best:
                    best = total
                    best_move = (kind, di, dj)
            cost[i][j] = best
            move[i][j] = best_move

    src_anchors = [source.anchor_of(leaf) for leaf in source.leaves]
    dst_anchors = [dest.anchor_of(leaf) for leaf in dest.leaves]

    links: list[Link] = []
    unmatched_source: list[Anchor] = []
    unmatched_dest: list[Anchor] = []
    i, j = m, n
    while i > 0 or j > 0:
        kind, di, dj = move[i][j]
        src_group = tuple(src_anchors[i - di:i])
        dst_group = tuple(dst_anchors[j - dj:j])
        if kind == "gap_source":
            unmatched_source.extend(reversed(src_group))
        elif kind == "gap_dest":
            unmatched_dest.extend(reversed(dst_group))
        else:
            links.append(Link(src_group, dst_group, kind))
        i -= di
        j -= dj

    links.reverse()
    unmatched_source.reverse()
    unmatched_dest.reverse()
    return Alignment(source, dest, tuple(links), tuple(unmatched_source),
                     tuple(unmatched_dest))


def alignment_cost(alignment: Alignment) -> int:
    """Total cost of an alignment under the fixed move costs."""
    total = 0
    for link in alignment.links:
        if link.link_kind in ("merge", "split"):
            total += _COST_GROUP
        elif link.link_kind == "modified":
            total += _COST_MODIFIED
    total += _COST_GAP * (len(alignment.unmatched_source) + len(alignment.unmatched_dest))
    return total


@dataclass(frozen=True)
class PortOutcome:
    original: Anchor
    ported: Anchor | None
    status: str  # exact | merged | split | modified | unmatched


@dataclass(frozen=True)
class PortReport:
    outcomes: tuple[PortOutcome, ...]

    def summary(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for outcome in self.outcomes:
            counts[outcome.status] = counts.get(outcome.status, 0) + 1
        return counts

    def to_json(self) -> dict:
        return {
            "summary": self.summary(),
            "outcomes": [
                {
                    "original": str(o.original),
                    "ported": None if o.ported is None else str(o.ported),
                    "status": o.status,
                }
                for o in self.outcomes
            ],
        }


def _smallest_cover(work: Work, lo: int, hi: int) -> TextObject:
    """The deepest object whose span contains [lo, hi]."""
    node = work.root
    while node.children:
        narrower = None
        for child in node.children:
            if child.span[0] <= lo and hi <= child.span[1]:
                narrower = child
                break
        if narrower is None:
            return node
        node = narrower
    return node


def port_annotation(ann: Annotation, alignment: Alignment) -> tuple[Annotation | None, PortReport]:
    """Remap an annotation's targets through an alignment.

    Returns the ported annotation (id left blank for the store to assign)
    plus a per-target report. When every target drops, no annotation is
    produced and the report alone tells the story.
    """
    source = alignment.source_work
    dest = alignment.dest_work

    link_by_source: dict[Anchor, Link] = {}
    for link in alignment.links:
        for anchor in link.source_leaf_anchors:
            link_by_source[anchor] = link
    unmatched = set(alignment.unmatched_source)
    dest_leaf_index = {dest.anchor_of(leaf): pos for pos, leaf in enumerate(dest.leaves)}

    outcomes: list[PortOutcome] = []
    for target in ann.targets:
        if not isinstance(target, Anchor) or target.work_id != alignment.source_work_id:
            raise PortingError(f"target from foreign work: {target}")
        obj = source.resolve(target.path)
        leaf_anchors = [
            source.anchor_of(leaf)
            for leaf in source.leaves[obj.span[0]:obj.span[1] + 1]
        ]
        if any(anchor in unmatched for anchor in leaf_anchors):
            outcomes.append(PortOutcome(target, None, "unmatched"))
            continue
        involved: list[Link] = []
        seen: set[int] = set()
        for anchor in leaf_anchors:
            link = link_by_source[anchor]
            if id(link) not in seen:
                seen.add(id(link))
                involved.append(link)
        dest_positions = [
            dest_leaf_index[a] for link in involved for a in link.dest_leaf_anchors
        ]
        ported_obj = _smallest_cover(dest, min(dest_positions), max(dest_positions))
        kinds = {link.link_kind for link in involved}
        if kinds == {"one_one"}:
            status = "exact"
        elif "modified" in kinds:
            status = "modified"
        elif "merge" in kinds:
            status = "merged"
        else:
            status = "split"
        outcomes.append(PortOutcome(target, dest.anchor_of(ported_obj), status))

    report = PortReport(tuple(outcomes))
    ported_anchors = [o.ported for o in outcomes if o.ported is not None]
    if not ported_anchors:
        return None, report
    unique = dict.fromkeys(ported_anchors)
    ordered = sorted(unique, key=lambda a: dest.doc_key(dest.resolve(a.path)))
    metadata = dict(ann.metadata)
    metadata["ported_from"] = alignment.source_work_id
    ported = Annotation("", ann.kind, ann.body, tuple(ordered), metadata)
    return ported, report
