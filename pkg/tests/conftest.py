from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the gen helper module

from portann import Archive, FeatureStore, ingest_work

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"

V1W3 = "W1:book/B/chapter/1/verse/1/word/3"
V2W2 = "W1:book/B/chapter/1/verse/2/word/2"
V2W1 = "W1:book/B/chapter/1/verse/2/word/1"
VERSE1 = "W1:book/B/chapter/1/verse/1"
VERSE2 = "W1:book/B/chapter/1/verse/2"
L1 = "HUG:collection/C/letter/L1"
L2 = "HUG:collection/C/letter/L2"
L3 = "HUG:collection/C/letter/L3"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture
def w1():
    return ingest_work(fixture_text("w1.json"))


@pytest.fixture
def w1d():
    return ingest_work(fixture_text("w1d.json"))


@pytest.fixture
def w1m():
    return ingest_work(fixture_text("w1m.json"))


@pytest.fixture
def hug():
    return ingest_work(fixture_text("hug.json"))


@pytest.fixture
def f1(w1):
    store = FeatureStore()
    store.load_table(w1, fixture_text("f1.tsv"))
    return store


@pytest.fixture
def archive(tmp_path, monkeypatch):
    """An archive over a fresh store with W1+F1+HUG loaded and a fixed clock."""
    monkeypatch.setenv("PORTANN_CLOCK", "2012-10-28T00:00:00Z")
    a = Archive(tmp_path / "store")
    a.ingest(fixture_text("w1.json"))
    a.ingest(fixture_text("hug.json"))
    a.load_feature_table("W1", fixture_text("f1.tsv"))
    return a


def make_fixture_annotations(archive: Archive) -> list:
    """The four-annotation set used by golden and round-trip tests."""
    anns = [
        archive.freeze_query("W1", "[verse [word pos=verb]]",
                             {"author": "eep", "project": "qfa"}),
        archive.freeze_feature("W1", "pos", "verb", {"author": "eep"}),
        archive.assign_keyword("dioptrics", [L1, L3], {"author": "dirk"}),
    ]
    import json

    from portann import TopicBody

    spec = json.loads(fixture_text("topic_t7.json"))
    topic = TopicBody(
        topic_id=spec["topic_id"],
        label=spec["label"],
        words=tuple((w["word"], w["weight"]) for w in spec["words"]),
        confidence=0.82,
    )
    anns.append(archive.assign_topic(topic, L2))
    return anns
