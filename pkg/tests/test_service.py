import json
import threading
import urllib.error
import urllib.parse
import urllib.request

import pytest

from portann.service import handle, serve

from conftest import L1, L2, L3, V1W3, VERSE1, VERSE2, make_fixture_annotations


def get(archive, target):
    return handle(archive, "GET", target)

def post(archive, target, payload):
    return handle(archive, "POST", target,
                  json.dumps(payload).encode("utf-8"))

def quoted(anchor):
    return urllib.parse.quote(anchor, safe="")


class TestWorkRoutes:
    def test_list_works(self, archive):
        status, payload = get(archive, "/works")
        assert status == 200
        assert payload["ok"] is True
        assert payload["data"] == [
            {"work": "HUG", "types": ["collection", "letter", "word"],
             "leaves": 7},
            {"work": "W1", "types": ["book", "chapter", "verse", "word"],
             "leaves": 6},
        ]

    def test_single_work_includes_tree(self, archive):
        status, payload = get(archive, "/works/W1")
        assert status == 200
        tree = payload["data"]["tree"]
        assert tree["anchor"] == "W1:book/B"
        assert tree["span"] == [0, 5]
        verse1 = tree["children"][0]["children"][0]
        assert verse1["anchor"] == VERSE1
        first_word = verse1["children"][0]
        assert first_word["token"] == "In"
        assert "children" not in first_word

    def test_unknown_work_is_404(self, archive):
        status, payload = get(archive, "/works/W9")
        assert status == 404
        assert payload["ok"] is False
        assert payload["error"]["code"] == "unknown_work"

    def test_objects_of_type(self, archive):
        status, payload = get(archive, "/works/W1/objects?type=verse")
        assert status == 200
        assert payload["data"] == [
            {"anchor": VERSE1, "span": [0, 2]},
            {"anchor": VERSE2, "span": [3, 5]},
        ]

    def test_objects_requires_type_param(self, archive):
        status, payload = get(archive, "/works/W1/objects")
        assert status == 400
        assert payload["error"]["code"] == "missing_param"

    def test_objects_unknown_type(self, archive):
        status, payload = get(archive, "/works/W1/objects?type=sentence")
        assert status == 400
        assert payload["error"]["code"] == "unknown_type"

    def test_ingest_document_as_string_or_object(self, archive):
        doc = {"work": "NEW", "types": ["w"],
               "tree": {"type": "w", "key": "1", "text": "solo"}}
        status, payload = post(archive, "/works", {"document": json.dumps(doc)})
        assert status == 200
        assert payload["data"] == {"work": "NEW", "types": ["w"], "leaves": 1}

        doc["work"] = "NEW2"
        status, payload = post(archive, "/works", {"document": doc})
        assert status == 200
        assert payload["data"]["work"] == "NEW2"

    def test_ingest_rejects_bad_documents(self, archive):
        status, payload = post(archive, "/works", {"document": "{]"})
        assert status == 400
        assert payload["error"]["code"] == "bad_document"

    def test_load_feature_table(self, archive):
        status, payload = post(archive, "/works/W1/features",
                               {"table": f"{V1W3}\tmood\tindicative\n"})
        assert status == 200
        assert payload["data"] == {"work": "W1", "count": 1}

    def test_bad_table_is_400(self, archive):
        status, payload = post(archive, "/works/W1/features",
                               {"table": "too\tfew\n"})
        assert status == 400
        assert payload["error"]["code"] == "bad_table"


class TestObjectRoutes:
    def test_object_view(self, archive):
        status, payload = get(archive, f"/objects/{quoted(V1W3)}")
        assert status == 200
        assert payload["data"] == {
            "anchor": V1W3,
            "work": "W1",
            "type": "word",
            "key": "3",
            "span": [2, 2],
            "text": "created",
            "token": "created",
            "children": [],
        }

    def test_inner_object_lists_child_anchors(self, archive):
        status, payload = get(archive, f"/objects/{quoted(VERSE2)}")
        assert payload["data"]["text"] == "earth was void"
        assert payload["data"]["children"] == [
            f"{VERSE2}/word/1", f"{VERSE2}/word/2", f"{VERSE2}/word/3"]

    def test_work_root_anchor(self, archive):
        status, payload = get(archive, f"/objects/{quoted('HUG:')}")
        assert status == 200
        assert payload["data"]["type"] == "collection"

    def test_unresolved_anchor_is_404(self, archive):
        status, payload = get(
            archive, f"/objects/{quoted('W1:book/B/chapter/9')}")
        assert status == 404
        assert payload["error"]["code"] == "unresolved_anchor"

    def test_anchor_syntax_error_is_400(self, archive):
        status, payload = get(archive, f"/objects/{quoted('no-colon')}")
        assert status == 400
        assert payload["error"]["code"] == "anchor_syntax"

    def test_reverse_lookup_scopes(self, archive):
        make_fixture_annotations(archive)
        # the frozen query targets the verb words directly, so it counts
        # as an exact hit alongside the feature annotation
        status, payload = get(
            archive, f"/objects/{quoted(V1W3)}/annotations")
        assert status == 200
        assert [a["id"] for a in payload["data"]] == ["2", "1"]

        status, payload = get(
            archive, f"/objects/{quoted(V1W3)}/annotations?scope=ancestors")
        assert [a["id"] for a in payload["data"]] == ["2", "1"]

        status, payload = get(
            archive, f"/objects/{quoted(VERSE1)}/annotations?scope=descendants")
        assert [a["id"] for a in payload["data"]] == ["2", "1"]

    def test_reverse_lookup_unknown_scope(self, archive):
        status, payload = get(
            archive, f"/objects/{quoted(V1W3)}/annotations?scope=everything")
        assert status == 400
        assert payload["error"]["code"] == "invalid"

    def test_reverse_lookup_resolves_the_anchor_first(self, archive):
        status, payload = get(
            archive, f"/objects/{quoted('W1:book/B/chapter/9')}/annotations")
        assert status == 404


class TestAnnotationRoutes:
    def test_listing_and_filters(self, archive):
        make_fixture_annotations(archive)
        status, payload = get(archive, "/annotations")
        assert [a["id"] for a in payload["data"]] == ["1", "2", "3", "4"]

        _, payload = get(archive, "/annotations?kind=keyword")
        assert [a["id"] for a in payload["data"]] == ["3"]

        _, payload = get(archive, "/annotations?q=pos%3Dverb")
        assert [a["id"] for a in payload["data"]] == ["1", "2"]

        _, payload = get(archive, "/annotations?work=HUG")
        assert [a["id"] for a in payload["data"]] == ["3", "4"]

        _, payload = get(archive,
                         "/annotations?meta.author=eep&meta.project=qfa")
        assert [a["id"] for a in payload["data"]] == ["1"]

    def test_listing_pagination(self, archive):
        make_fixture_annotations(archive)
        _, payload = get(archive, "/annotations?offset=1&limit=2")
        assert [a["id"] for a in payload["data"]] == ["2", "3"]

    def test_single_annotation_record_shape(self, archive):
        make_fixture_annotations(archive)
        status, payload = get(archive, "/annotations/2")
        assert status == 200
        assert payload["data"] == {
            "id": "2",
            "kind": "feature",
            "body": {"key": "pos", "value": "verb"},
            "targets": [V1W3, "W1:book/B/chapter/1/verse/2/word/2"],
            "metadata": {"author": "eep"},
        }

    def test_unknown_annotation_is_404(self, archive):
        status, payload = get(archive, "/annotations/99")
        assert status == 404
        assert payload["error"]["code"] == "unknown_annotation"

    def test_freeze_query_route(self, archive):
        status, payload = post(archive, "/annotations/freeze-query",
                               {"work": "W1", "text": "[word pos=verb]",
                                "metadata": {"author": "eep"}})
        assert status == 200
        record = payload["data"]
        assert record["kind"] == "query"
        assert record["body"] == {"language": "tql", "text": "[word pos=verb]",
                                  "result_count": 2}
        assert record["metadata"] == {"author": "eep",
                                      "last_run": "2012-10-28T00:00:00Z"}

    def test_freeze_feature_empty_result_is_409(self, archive):
        status, payload = post(archive, "/annotations/freeze-feature",
                               {"work": "W1", "key": "pos", "value": "x"})
        assert status == 409
        assert payload["error"]["code"] == "empty_result"
        assert payload["error"]["message"] == "empty result; nothing to freeze"

    def test_keyword_route_validates_targets(self, archive):
        status, payload = post(archive, "/annotations/keyword",
                               {"keyword": "k", "targets": L1})
        assert status == 400
        assert payload["error"]["message"] == "targets must be a list"

    def test_topic_route(self, archive):
        topic = {"topic_id": "T7", "label": "optics",
                 "words": [{"word": "lens", "weight": 1.0}],
                 "confidence": 0.5}
        status, payload = post(archive, "/annotations/topic",
                               {"topic": topic, "target": L2})
        assert status == 200
        assert payload["data"]["body"]["topic_id"] == "T7"

    def test_topic_route_rejects_bad_payloads(self, archive):
        status, payload = post(archive, "/annotations/topic",
                               {"topic": {"label": "x"}, "target": L2})
        assert status == 400
        assert payload["error"]["code"] == "bad_param"

    def test_invalid_weights_are_400(self, archive):
        topic = {"topic_id": "T", "label": "x",
                 "words": [{"word": "a", "weight": 0.7}], "confidence": 0.5}
        status, payload = post(archive, "/annotations/topic",
                               {"topic": topic, "target": L2})
        assert status == 400
        assert "sum to 1" in payload["error"]["message"]


class TestQueryRoute:
    def test_match_shape(self, archive):
        status, payload = post(archive, "/query",
                               {"work": "W1", "text": "[verse [word pos=verb]]"})
        assert status == 200
        assert payload["data"]["count"] == 2
        assert payload["data"]["truncated"] is False
        first = payload["data"]["matches"][0]
        assert first == {"bindings": [
            {"block": [], "anchor": VERSE1},
            {"block": [0], "anchor": V1W3},
        ]}

    def test_limit_field(self, archive):
        status, payload = post(archive, "/query",
                               {"work": "W1", "text": "[word]", "limit": 2})
        assert payload["data"]["truncated"] is True
        assert payload["data"]["count"] == 2

    def test_limit_must_be_integer(self, archive):
        status, payload = post(archive, "/query",
                               {"work": "W1", "text": "[word]", "limit": "2"})
        assert status == 400
        assert payload["error"]["code"] == "bad_param"

    def test_syntax_errors_are_400_with_position(self, archive):
        status, payload = post(archive, "/query",
                               {"work": "W1", "text": "[verse [word]"})
        assert status == 400
        assert payload["error"]["code"] == "query_syntax"
        assert "1:14" in payload["error"]["message"]

    def test_unknown_work_is_404(self, archive):
        status, payload = post(archive, "/query",
                               {"work": "W9", "text": "[word]"})
        assert status == 404


class TestPortAndInterchange:
    def test_port_route(self, archive):
        archive.ingest((archive.root / "works" / "W1.json").read_text(
            encoding="utf-8").replace('"W1"', '"W1c"'))
        archive.freeze_feature("W1", "pos", "verb")
        status, payload = post(archive, "/port",
                               {"source": "W1", "dest": "W1c"})
        assert status == 200
        entry = payload["data"][0]
        assert entry["original"] == "1"
        assert entry["ported"]["id"] == "2"
        assert entry["report"]["summary"] == {"exact": 2}

    def test_port_unknown_rule_is_400(self, archive):
        archive.freeze_feature("W1", "pos", "verb")
        status, payload = post(archive, "/port",
                               {"source": "W1", "dest": "W1",
                                "rules": ["stemming"]})
        assert status == 400
        assert payload["error"]["code"] == "porting_error"

    def test_export_and_import_routes(self, archive):
        make_fixture_annotations(archive)
        status, payload = get(archive, "/export?base=http%3A%2F%2Fex.org%2F")
        assert status == 200
        document = payload["data"]["document"]
        assert document.startswith("<http://ex.org/annotation/1>")

        status, payload = post(archive, "/import",
                               {"document": document, "base": "http://ex.org/"})
        assert status == 200
        assert payload["data"]["id_map"] == {"1": "5", "2": "6",
                                             "3": "7", "4": "8"}
        assert payload["data"]["opaque_targets"] == []

    def test_export_requires_base(self, archive):
        status, payload = get(archive, "/export")
        assert status == 400
        assert payload["error"]["code"] == "missing_param"

    def test_malformed_base_is_400(self, archive):
        status, payload = get(archive, "/export?base=ex.org")
        assert status == 400
        assert payload["error"]["code"] == "bad_triples"


class TestProtocol:
    def test_unknown_routes_are_404(self, archive):
        status, payload = get(archive, "/nope")
        assert status == 404
        assert payload["error"]["code"] == "unknown_route"
        status, payload = post(archive, "/works/W1/nope", {})
        assert status == 404

    def test_unknown_method_is_404(self, archive):
        status, payload = handle(archive, "DELETE", "/works/W1")
        assert status == 404

    def test_malformed_body_is_400(self, archive):
        status, payload = handle(archive, "POST", "/query", b"{nope")
        assert status == 400
        assert payload["error"]["code"] == "malformed_body"
        status, payload = handle(archive, "POST", "/query", b'["list"]')
        assert status == 400

    def test_missing_fields_are_reported(self, archive):
        status, payload = post(archive, "/query", {"work": "W1"})
        assert status == 400
        assert payload["error"]["code"] == "missing_field"
        assert "'text'" in payload["error"]["message"]

    def test_reads_do_not_mutate_the_store(self, archive):
        make_fixture_annotations(archive)
        files = {
            p: p.read_bytes() for p in archive.root.rglob("*") if p.is_file()
        }
        get(archive, "/works/W1")
        get(archive, "/annotations")
        get(archive, f"/objects/{quoted(V1W3)}/annotations?scope=all")
        post(archive, "/query", {"work": "W1", "text": "[word]"})
        assert files == {
            p: p.read_bytes() for p in archive.root.rglob("*") if p.is_file()
        }


class TestHttpServer:
    @pytest.fixture
    def server(self, archive, tmp_path):
        static = tmp_path / "ui"
        static.mkdir()
        static.joinpath("index.html").write_text(
            "<!doctype html><title>reader</title>", encoding="utf-8")
        static.joinpath("app.js").write_text("console.log(1)",
                                             encoding="utf-8")
        srv = serve(archive, 0, static_dir=str(static))
        thread = threading.Thread(target=srv.serve_forever, daemon=True)
        thread.start()
        yield f"http://127.0.0.1:{srv.server_address[1]}"
        srv.shutdown()
        srv.server_close()

    def test_get_round_trip(self, server):
        with urllib.request.urlopen(f"{server}/works") as response:
            assert response.status == 200
            assert response.headers["Access-Control-Allow-Origin"] == "*"
            payload = json.loads(response.read())
        assert [w["work"] for w in payload["data"]] == ["HUG", "W1"]

    def test_post_round_trip(self, server):
        request = urllib.request.Request(
            f"{server}/query",
            data=json.dumps({"work": "W1", "text": "[word pos=verb]"}).encode(),
            headers={"Content-Type": "application/json"},
        )
        with urllib.request.urlopen(request) as response:
            payload = json.loads(response.read())
        assert payload["data"]["count"] == 2

    def test_error_statuses_reach_the_client(self, server):
        with pytest.raises(urllib.error.HTTPError) as exc:
            urllib.request.urlopen(f"{server}/works/W9")
        assert exc.value.code == 404
        assert json.loads(exc.value.read())["error"]["code"] == "unknown_work"

    def test_percent_encoded_anchors_in_paths(self, server):
        target = urllib.parse.quote(V1W3, safe="")
        with urllib.request.urlopen(f"{server}/objects/{target}") as response:
            payload = json.loads(response.read())
        assert payload["data"]["token"] == "created"

    def test_static_files_served_next_to_the_api(self, server):
        with urllib.request.urlopen(f"{server}/") as response:
            assert b"reader" in response.read()
            assert response.headers["Content-Type"].startswith("text/html")
        with urllib.request.urlopen(f"{server}/app.js") as response:
            assert response.headers["Content-Type"].startswith(
                ("text/javascript", "application/javascript"))

    def test_api_heads_win_over_static(self, server):
        with urllib.request.urlopen(f"{server}/works") as response:
            assert json.loads(response.read())["ok"] is True

    def test_missing_static_file_is_404(self, server):
        with pytest.raises(urllib.error.HTTPError) as exc:
            urllib.request.urlopen(f"{server}/missing.css")
        assert exc.value.code == 404

    def test_path_traversal_is_blocked(self, server):
        with pytest.raises(urllib.error.HTTPError) as exc:
            urllib.request.urlopen(
                f"{server}/{urllib.parse.quote('../annotations.jsonl')}")
        assert exc.value.code == 404
