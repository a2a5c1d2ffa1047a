"""A store directory binding corpus, features, and annotations together.

Layout:

    STORE/
      works/{encoded work id}.json     canonical corpus-interchange documents
      features/{encoded work id}.tsv   optional feature tables, merged at load
      annotations.jsonl                one annotation record per line

Every mutating operation writes through to disk immediately, re-serializing
the touched file canonically, so two sessions that perform the same
operations leave byte-identical stores behind.

The timestamp source honours the PORTANN_CLOCK environment variable: when it
holds a fixed ISO-8601 string, all freezes use that moment, which makes
sessions reproducible.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

from .annotations import (
    Annotation,
    AnnotationStore,
    Clock,
    TopicBody,
    utc_clock,
)
from .corpus import (
    Anchor,
    Corpus,
    TextObject,
    Work,
    decode_segment,
    encode_segment,
    parse_anchor,
    work_to_document,
)
from .errors import AnchorSyntaxError, PortannError
from .features import FeatureStore
from .linkeddata import ImportResult, export_triples, import_triples
from .porter import Alignment, PortReport, align_works, port_annotation
from .tql import DEFAULT_LIMIT, QueryResult, parse_query, run_query


def environment_clock() -> Clock:
    """The archive-wide clock: PORTANN_CLOCK pins it, otherwise real UTC."""
    pinned = os.environ.get("PORTANN_CLOCK")
    if pinned:
        return lambda: pinned
    return utc_clock


class Archive:
    """All three stores over one directory, with write-through persistence."""

    def __init__(self, root: str | os.PathLike, clock: Clock | None = None):
        self.root = Path(root)
        self.corpus = Corpus()
        self.features = FeatureStore()
        self.annotations = AnnotationStore(clock=clock or environment_clock())
        self._load()

    # ------------------------------------------------------------------
    # layout

    def _work_path(self, work_id: str) -> Path:
        return self.root / "works" / (encode_segment(work_id) + ".json")

    def _table_path(self, work_id: str) -> Path:
        return self.root / "features" / (encode_segment(work_id) + ".tsv")

    @property
    def _annotations_path(self) -> Path:
        return self.root / "annotations.jsonl"

    def _load(self) -> None:
        works_dir = self.root / "works"
        if works_dir.is_dir():
            for path in sorted(works_dir.glob("*.json")):
                self.corpus.ingest(path.read_text(encoding="utf-8"))
        features_dir = self.root / "features"
        if features_dir.is_dir():
            for path in sorted(features_dir.glob("*.tsv")):
                try:
                    work_id = decode_segment(path.stem)
                    work = self.corpus.get(work_id)
                except PortannError:
                    continue  # table without its work: sources were archived away
                self.features.load_table(work, path.read_text(encoding="utf-8"))
        if self._annotations_path.is_file():
            self.annotations.load(self._annotations_path)

    def _save_work(self, work: Work) -> None:
        path = self._work_path(work.work_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        document = json.dumps(work_to_document(work), indent=2, ensure_ascii=False)
        path.write_text(document + "\n", encoding="utf-8")

    def _save_table(self, work_id: str) -> None:
        path = self._table_path(work_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.features.dump_table(work_id), encoding="utf-8")

    def _save_annotations(self) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        self.annotations.save(self._annotations_path)

    # ------------------------------------------------------------------
    # operations, each persisting what it touched

    def ingest(self, document: str) -> Work:
        work = self.corpus.ingest(document)
        self._save_work(work)
        return work

    def load_feature_table(self, work_id: str, table: str) -> int:
        work = self.corpus.get(work_id)
        count = self.features.load_table(work, table)
        self._save_table(work_id)
        return count

    def run_query(self, work_id: str, text: str,
                  limit: int | None = DEFAULT_LIMIT) -> QueryResult:
        work = self.corpus.get(work_id)
        return run_query(work, self.features, parse_query(text), limit)

    def freeze_query(self, work_id: str, text: str,
                     metadata: dict[str, str] | None = None) -> Annotation:
        work = self.corpus.get(work_id)
        ann = self.annotations.freeze_query(work, self.features, text, metadata)
        self._save_annotations()
        return ann

    def freeze_feature(self, work_id: str, key: str, value: str,
                       metadata: dict[str, str] | None = None) -> Annotation:
        work = self.corpus.get(work_id)
        ann = self.annotations.freeze_feature(work, self.features, key, value, metadata)
        self._save_annotations()
        return ann

    def assign_keyword(self, keyword: str, targets,
                       metadata: dict[str, str] | None = None) -> Annotation:
        ann = self.annotations.assign_keyword(keyword, targets, metadata)
        self._save_annotations()
        return ann

    def assign_topic(self, topic: TopicBody, target,
                     metadata: dict[str, str] | None = None) -> Annotation:
        ann = self.annotations.assign_topic(topic, target, metadata)
        self._save_annotations()
        return ann

    def align(self, source_id: str, dest_id: str,
              rules: tuple[str, ...] = ()) -> Alignment:
        return align_works(self.corpus.get(source_id), self.corpus.get(dest_id), rules)

    def port(self, source_id: str, dest_id: str, rules: tuple[str, ...] = (),
             annotation_ids: list[str] | None = None
             ) -> list[tuple[str, Annotation | None, PortReport]]:
        """Port annotations from one work onto another.

        Without explicit ids, every annotation whose targets all live in the
        source work is ported. Returns (original id, ported or None, report)
        per annotation.
        """
        alignment = self.align(source_id, dest_id, rules)
        if annotation_ids is None:
            pool = [
                ann for ann in self.annotations.all()
                if all(isinstance(t, Anchor) and t.work_id == source_id
                       for t in ann.targets)
            ]
        else:
            pool = [self.annotations.get(i) for i in annotation_ids]
        results = []
        changed = False
        for ann in pool:
            ported, report = port_annotation(ann, alignment)
            if ported is not None:
                ported = self.annotations.register(ported)
                changed = True
            results.append((ann.id, ported, report))
        if changed:
            self._save_annotations()
        return results

    def export(self, base: str) -> str:
        return export_triples(self.annotations.all(), base)

    def import_document(self, document: str, base: str) -> ImportResult:
        result = import_triples(document, base, next_id=self._next_free_id())
        for ann in result.annotations:
            self.annotations.register(ann)
        if result.annotations:
            self._save_annotations()
        return result

    def _next_free_id(self) -> int:
        highest = 0
        for ann in self.annotations.all():
            if ann.id.isdigit():
                highest = max(highest, int(ann.id))
        return highest + 1

    # ------------------------------------------------------------------
    # resolution

    def resolve(self, anchor: Anchor | str) -> tuple[Work, TextObject]:
        if isinstance(anchor, str):
            anchor = parse_anchor(anchor)
        return self.corpus.resolve_anchor(anchor)
