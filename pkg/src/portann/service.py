"""Embedded HTTP service over an archive.

Every response is JSON with the shape `{"ok": true, "data": ...}` or
`{"ok": false, "error": {"code": ..., "message": ...}}`. Anchors travel
percent-encoded as single path segments, so the router splits the raw path
on "/" before unquoting each segment; request bodies carry anchors raw.

Routes (all under the archive given at startup):

    GET  /works                          list works
    GET  /works/{w}                      one work, full tree with anchors
    GET  /works/{w}/objects?type=T       anchors and spans of one type
    GET  /objects/{anchor}               one object, resolved
    GET  /objects/{anchor}/annotations?scope=exact|ancestors|descendants|all
    GET  /annotations?kind=&q=&work=&meta.K=&limit=&offset=
    GET  /annotations/{id}
    GET  /export?base=URI
    POST /works                          {document}
    POST /works/{w}/features             {table}
    POST /query                          {work, text, limit?}
    POST /annotations/freeze-query       {work, text, metadata?}
    POST /annotations/freeze-feature     {work, key, value, metadata?}
    POST /annotations/keyword            {keyword, targets, metadata?}
    POST /annotations/topic              {topic, target, metadata?}
    POST /port                           {source, dest, rules?, ids?}
    POST /import                         {document, base}

Read endpoints never mutate state; repeated GETs return identical bytes when
nothing was written in between. A static directory can be mounted for the
reading interface; API prefixes always win over static files.
"""

from __future__ import annotations

import json
import mimetypes
import urllib.parse
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .annotations import TopicBody, annotation_to_json
from .archive import Archive
from .corpus import Anchor, TextObject, Work, parse_anchor
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
from .tql import DEFAULT_LIMIT


class _RouteError(PortannError):
    def __init__(self, status: int, code: str, message: str):
        super().__init__(message)
        self.status = status
        self.code = code


_ERROR_MAP: list[tuple[type, int, str]] = [
    (UnknownWorkError, 404, "unknown_work"),
    (UnresolvedAnchorError, 404, "unresolved_anchor"),
    (UnknownAnnotationError, 404, "unknown_annotation"),
    (ResolutionError, 404, "unresolved_anchor"),
    (EmptyResultError, 409, "empty_result"),
    (QuerySyntaxError, 400, "query_syntax"),
    (QueryError, 400, "query_error"),
    (AnchorSyntaxError, 400, "anchor_syntax"),
    (UnknownTypeError, 400, "unknown_type"),
    (IngestError, 400, "bad_document"),
    (FeatureTableError, 400, "bad_table"),
    (ValidationError, 400, "invalid"),
    (TripleSyntaxError, 400, "bad_triples"),
    (StoreFormatError, 400, "bad_store"),
    (PortingError, 400, "porting_error"),
]


def _error_payload(status: int, code: str, message: str) -> tuple[int, dict]:
    return status, {"ok": False, "error": {"code": code, "message": message}}


def handle(archive: Archive, method: str, target: str,
           body: bytes | None = None) -> tuple[int, dict]:
    """Route one request; returns (status, response object)."""
    path, _, query_string = target.partition("?")
    segments = [urllib.parse.unquote(s) for s in path.split("/") if s]
    params = {
        k: v[-1]
        for k, v in urllib.parse.parse_qs(query_string, keep_blank_values=True).items()
    }
    try:
        data = _dispatch(archive, method, segments, params, body)
        return 200, {"ok": True, "data": data}
    except _RouteError as exc:
        return _error_payload(exc.status, exc.code, str(exc))
    except PortannError as exc:
        for cls, status, code in _ERROR_MAP:
            if isinstance(exc, cls):
                return _error_payload(status, code, str(exc))
        return _error_payload(400, "error", str(exc))


def _dispatch(archive: Archive, method: str, segments: list[str],
              params: dict[str, str], body: bytes | None):
    if method == "GET":
        return _dispatch_get(archive, segments, params)
    if method == "POST":
        return _dispatch_post(archive, segments, _parse_body(body))
    raise _RouteError(404, "unknown_route", f"no such route: {method}")


def _parse_body(body: bytes | None) -> dict:
    if not body:
        return {}
    try:
        obj = json.loads(body.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise _RouteError(400, "malformed_body", f"request body: {exc}") from None
    if not isinstance(obj, dict):
        raise _RouteError(400, "malformed_body", "request body must be an object")
    return obj


def _require(body: dict, name: str):
    if name not in body:
        raise _RouteError(400, "missing_field", f"missing field {name!r}")
    return body[name]


def _page(items: list, params: dict[str, str]) -> list:
    offset = _int_param(params, "offset", 0)
    limit = _int_param(params, "limit", None)
    if offset:
        items = items[offset:]
    if limit is not None:
        items = items[:limit]
    return items


def _int_param(params: dict[str, str], name: str, default):
    if name not in params:
        return default
    try:
        return int(params[name])
    except ValueError:
        raise _RouteError(400, "bad_param", f"{name} must be an integer") from None


def _work_summary(work: Work) -> dict:
    return {
        "work": work.work_id,
        "types": list(work.type_order),
        "leaves": work.leaf_count,
    }


def _tree_node(work: Work, obj: TextObject) -> dict:
    node = {
        "type": obj.object_type,
        "key": obj.key,
        "anchor": str(work.anchor_of(obj)),
        "span": list(obj.span),
    }
    if obj.is_leaf:
        node["token"] = obj.token
    else:
        node["children"] = [_tree_node(work, child) for child in obj.children]
    return node


def _object_view(work: Work, obj: TextObject) -> dict:
    view = {
        "anchor": str(work.anchor_of(obj)),
        "work": work.work_id,
        "type": obj.object_type,
        "key": obj.key,
        "span": list(obj.span),
        "text": work.text_of(obj),
    }
    if obj.is_leaf:
        view["token"] = obj.token
        view["children"] = []
    else:
        view["children"] = [str(work.anchor_of(c)) for c in obj.children]
    return view


def _dispatch_get(archive: Archive, segments: list[str], params: dict[str, str]):
    if segments == ["works"]:
        works = [archive.corpus.get(w) for w in archive.corpus.work_ids()]
        return _page([_work_summary(w) for w in works], params)
    if len(segments) == 2 and segments[0] == "works":
        work = archive.corpus.get(segments[1])
        summary = _work_summary(work)
        summary["tree"] = _tree_node(work, work.root)
        return summary
    if len(segments) == 3 and segments[0] == "works" and segments[2] == "objects":
        work = archive.corpus.get(segments[1])
        object_type = params.get("type")
        if not object_type:
            raise _RouteError(400, "missing_param", "type parameter required")
        rows = [
            {"anchor": str(work.anchor_of(obj)), "span": list(obj.span)}
            for obj in work.objects_of(object_type)
        ]
        return _page(rows, params)
    if len(segments) == 2 and segments[0] == "objects":
        work, obj = archive.resolve(parse_anchor(segments[1]))
        return _object_view(work, obj)
    if len(segments) == 3 and segments[0] == "objects" and segments[2] == "annotations":
        anchor = parse_anchor(segments[1])
        archive.resolve(anchor)  # 404 for anchors that do not exist
        scope = params.get("scope", "exact")
        anns = archive.annotations.annotations_targeting(anchor, scope)
        return _page([annotation_to_json(a) for a in anns], params)
    if segments == ["annotations"]:
        metadata = {
            name[len("meta."):]: value
            for name, value in params.items()
            if name.startswith("meta.")
        }
        anns = archive.annotations.filter(
            kind=params.get("kind"),
            body_substring=params.get("q"),
            work=params.get("work"),
            metadata=metadata or None,
        )
        return _page([annotation_to_json(a) for a in anns], params)
    if len(segments) == 2 and segments[0] == "annotations":
        return annotation_to_json(archive.annotations.get(segments[1]))
    if segments == ["export"]:
        base = params.get("base")
        if not base:
            raise _RouteError(400, "missing_param", "base parameter required")
        return {"document": archive.export(base)}
    raise _RouteError(404, "unknown_route", "no such route: GET /" + "/".join(segments))


def _dispatch_post(archive: Archive, segments: list[str], body: dict):
    if segments == ["works"]:
        document = _require(body, "document")
        if isinstance(document, dict):  # embedded rather than pre-serialized
            document = json.dumps(document)
        work = archive.ingest(str(document))
        return _work_summary(work)
    if len(segments) == 3 and segments[0] == "works" and segments[2] == "features":
        count = archive.load_feature_table(segments[1], str(_require(body, "table")))
        return {"work": segments[1], "count": count}
    if segments == ["query"]:
        work_id = str(_require(body, "work"))
        text = str(_require(body, "text"))
        limit = body.get("limit", DEFAULT_LIMIT)
        if not isinstance(limit, int):
            raise _RouteError(400, "bad_param", "limit must be an integer")
        result = archive.run_query(work_id, text, limit)
        return {
            "count": len(result.matches),
            "truncated": result.truncated,
            "matches": [
                {
                    "bindings": [
                        {"block": list(path), "anchor": str(anchor)}
                        for path, anchor in match.bindings
                    ]
                }
                for match in result.matches
            ],
        }
    if segments == ["annotations", "freeze-query"]:
        ann = archive.freeze_query(
            str(_require(body, "work")), str(_require(body, "text")),
            _metadata(body),
        )
        return annotation_to_json(ann)
    if segments == ["annotations", "freeze-feature"]:
        ann = archive.freeze_feature(
            str(_require(body, "work")), str(_require(body, "key")),
            str(_require(body, "value")), _metadata(body),
        )
        return annotation_to_json(ann)
    if segments == ["annotations", "keyword"]:
        targets = _require(body, "targets")
        if not isinstance(targets, list):
            raise _RouteError(400, "bad_param", "targets must be a list")
        ann = archive.assign_keyword(
            str(_require(body, "keyword")), [str(t) for t in targets],
            _metadata(body),
        )
        return annotation_to_json(ann)
    if segments == ["annotations", "topic"]:
        topic = _require(body, "topic")
        if not isinstance(topic, dict):
            raise _RouteError(400, "bad_param", "topic must be an object")
        try:
            topic_body = TopicBody(
                topic_id=str(topic["topic_id"]),
                label=str(topic["label"]),
                words=tuple((str(w["word"]), float(w["weight"]))
                            for w in topic["words"]),
                confidence=float(topic["confidence"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise _RouteError(400, "bad_param", f"topic: {exc}") from None
        ann = archive.assign_topic(topic_body, str(_require(body, "target")),
                                   _metadata(body))
        return annotation_to_json(ann)
    if segments == ["port"]:
        rules = body.get("rules", [])
        ids = body.get("ids")
        results = archive.port(
            str(_require(body, "source")), str(_require(body, "dest")),
            tuple(str(r) for r in rules),
            None if ids is None else [str(i) for i in ids],
        )
        return [
            {
                "original": original,
                "ported": None if ann is None else annotation_to_json(ann),
                "report": report.to_json(),
            }
            for original, ann, report in results
        ]
    if segments == ["import"]:
        result = archive.import_document(
            str(_require(body, "document")), str(_require(body, "base")))
        return {
            "annotations": [annotation_to_json(a) for a in result.annotations],
            "id_map": result.id_map,
            "opaque_targets": list(result.opaque_targets),
        }
    raise _RouteError(404, "unknown_route", "no such route: POST /" + "/".join(segments))


def _metadata(body: dict) -> dict[str, str]:
    raw = body.get("metadata") or {}
    if not isinstance(raw, dict):
        raise _RouteError(400, "bad_param", "metadata must be an object")
    return {str(k): str(v) for k, v in raw.items()}


_API_HEADS = {"works", "objects", "annotations", "query", "port", "import", "export"}


class ApiHandler(BaseHTTPRequestHandler):
    server_version = "portann"

    def log_message(self, format, *args):  # quiet by default
        pass

    def do_GET(self):
        head = self.path.lstrip("/").split("/", 1)[0].split("?", 1)[0]
        if head not in _API_HEADS and self.server.static_dir is not None:
            self._serve_static()
            return
        self._serve_api("GET")

    def do_POST(self):
        self._serve_api("POST")

    def _serve_api(self, method: str) -> None:
        length = int(self.headers.get("Content-Length") or 0)
        body = self.rfile.read(length) if length else None
        status, payload = handle(self.server.archive, method, self.path, body)
        raw = json.dumps(payload, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(raw)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(raw)

    def _serve_static(self) -> None:
        root = Path(self.server.static_dir).resolve()
        relative = urllib.parse.unquote(self.path.partition("?")[0]).lstrip("/")
        candidate = (root / relative).resolve() if relative else root / "index.html"
        if candidate.is_dir():
            candidate = candidate / "index.html"
        if not str(candidate).startswith(str(root)) or not candidate.is_file():
            _, payload = _error_payload(404, "not_found", "no such file")
            raw = json.dumps(payload).encode()
            self.send_response(404)
            self.send_header("Content-Type", "application/json; charset=utf-8")
            self.send_header("Content-Length", str(len(raw)))
            self.end_headers()
            self.wfile.write(raw)
            return
        raw = candidate.read_bytes()
        content_type = mimetypes.guess_type(str(candidate))[0] or "application/octet-stream"
        self.send_response(200)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(raw)))
        self.end_headers()
        self.wfile.write(raw)


class ApiServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], archive: Archive,
                 static_dir: str | None = None):
        super().__init__(address, ApiHandler)
        self.archive = archive
        self.static_dir = static_dir


def serve(archive: Archive, port: int, host: str = "127.0.0.1",
          static_dir: str | None = None) -> ApiServer:
    """Create a threaded server; caller runs serve_forever (or uses a thread)."""
    return ApiServer((host, port), archive, static_dir)
