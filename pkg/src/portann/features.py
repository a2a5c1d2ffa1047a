"""key=value feature assignments attached to text objects.

Feature tables arrive as curated external data: tab-separated UTF-8 text,
one ``anchor<TAB>key<TAB>value`` per line, ``#`` comment lines ignored.
Assignments are indexed both by anchor and by (key, value) so that value
lookup and extension lookup are both cheap. One value per (anchor, key);
loading the same row twice is idempotent, a different value is an error.
"""

from __future__ import annotations

from collections import defaultdict

from .corpus import Anchor, Work, format_anchor, parse_anchor
from .errors import AnchorSyntaxError, FeatureTableError, ResolutionError


class FeatureStore:
    """Bulk-loaded, read-mostly store of feature assignments for any number of works."""

    def __init__(self):
        self._values: dict[Anchor, dict[str, str]] = {}
        self._extension: dict[tuple[str, str, str], set[Anchor]] = defaultdict(set)

    def load_table(self, work: Work, table: str) -> int:
        """Load one feature table against a work.

        Every row's anchor must belong to and resolve in ``work``. Returns the
        number of distinct assignments the table carries (duplicates of an
        identical row count once).
        """
        loaded: set[tuple[Anchor, str]] = set()
        for row_no, line in enumerate(table.splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise FeatureTableError(f"row {row_no}: expected 3 tab-separated fields")
            anchor_text, key, value = fields
            try:
                anchor = parse_anchor(anchor_text.strip())
            except AnchorSyntaxError as exc:
                raise FeatureTableError(f"row {row_no}: {exc}") from None
            if anchor.work_id != work.work_id:
                raise FeatureTableError(
                    f"row {row_no}: anchor belongs to work {anchor.work_id!r}, not {work.work_id!r}"
                )
            try:
                work.resolve(anchor.path)
            except ResolutionError:
                raise FeatureTableError(f"row {row_no}: unresolved anchor {anchor_text!r}") from None
            if not key:
                raise FeatureTableError(f"row {row_no}: empty key")
            existing = self._values.get(anchor, {}).get(key)
            if existing is not None and existing != value:
                raise FeatureTableError(
                    f"row {row_no}: conflicting value for ({format_anchor(anchor)}, {key}): "
                    f"{existing!r} != {value!r}"
                )
            self._values.setdefault(anchor, {})[key] = value
            self._extension[(anchor.work_id, key, value)].add(anchor)
            loaded.add((anchor, key))
        return len(loaded)

    def value(self, anchor: Anchor, key: str) -> str | None:
        """The stored value, or None; absence is not an error."""
        return self._values.get(anchor, {}).get(key)

    def assignments_for(self, anchor: Anchor) -> dict[str, str]:
        return dict(self._values.get(anchor, {}))

    def objects_with(self, work: Work, key: str, value: str) -> list[Anchor]:
        """All anchors in ``work`` carrying key=value, in document order."""
        anchors = self._extension.get((work.work_id, key, value), set())
        return sorted(anchors, key=lambda a: work.doc_key(work.resolve(a.path)))

    def keys_for_work(self, work_id: str) -> list[tuple[str, str]]:
        """All distinct (key, value) combinations assigned within one work."""
        return sorted(
            {(k, v) for (w, k, v), anchors in self._extension.items() if w == work_id and anchors}
        )

    def work_assignments(self, work_id: str) -> list[tuple[Anchor, str, str]]:
        """Every assignment of one work, sorted by (anchor text, key)."""
        rows = []
        for anchor, kv in self._values.items():
            if anchor.work_id != work_id:
                continue
            for key, value in kv.items():
                rows.append((anchor, key, value))
        rows.sort(key=lambda r: (format_anchor(r[0]), r[1]))
        return rows

    def dump_table(self, work_id: str) -> str:
        """Canonical feature-table text for one work (stable row order)."""
        lines = [
            f"{format_anchor(anchor)}\t{key}\t{value}"
            for anchor, key, value in self.work_assignments(work_id)
        ]
        return "\n".join(lines) + ("\n" if lines else "")
