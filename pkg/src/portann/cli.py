"""Command-line front end over an archive directory.

Every core operation is reachable by exactly one subcommand; all subcommands
take ``--store DIR`` (default: the current directory). Success prints data on
stdout and exits 0; operation failures print on stderr and exit 1; a bad
command line exits 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .annotations import TopicBody
from .archive import Archive
from .errors import PortannError
from .service import serve
from .tql import DEFAULT_LIMIT


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="portann",
        description="Portable annotations over hierarchical text corpora.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--store", default=".", help="store directory (default: .)")
        return cmd

    cmd = add("ingest", "load a corpus-interchange document into the store")
    cmd.add_argument("file")

    cmd = add("features", "load a feature table for a work")
    cmd.add_argument("work")
    cmd.add_argument("file")

    cmd = add("query", "run a query against a work")
    cmd.add_argument("work")
    cmd.add_argument("tql")
    cmd.add_argument("--limit", type=int, default=DEFAULT_LIMIT)

    cmd = add("freeze-query", "run a query and freeze its results")
    cmd.add_argument("work")
    cmd.add_argument("tql")
    cmd.add_argument("--meta", action="append", default=[], metavar="K=V")

    cmd = add("freeze-feature", "freeze the extension of a feature value")
    cmd.add_argument("work")
    cmd.add_argument("key")
    cmd.add_argument("value")
    cmd.add_argument("--meta", action="append", default=[], metavar="K=V")

    cmd = add("keyword", "attach a keyword to one or more anchors")
    cmd.add_argument("text")
    cmd.add_argument("--target", action="append", required=True, dest="targets",
                     metavar="ANCHOR")
    cmd.add_argument("--meta", action="append", default=[], metavar="K=V")

    cmd = add("topic", "assign a topic (from a JSON file) to an anchor")
    cmd.add_argument("file")
    cmd.add_argument("--target", required=True, metavar="ANCHOR")
    cmd.add_argument("--confidence", type=float, required=True)

    cmd = add("port", "port annotations from one work onto another")
    cmd.add_argument("source")
    cmd.add_argument("dest")
    cmd.add_argument("--norm", action="append", default=[], dest="rules",
                     metavar="RULE")
    cmd.add_argument("--id", action="append", dest="ids", metavar="ID")

    cmd = add("export", "export all annotations as triples")
    cmd.add_argument("--base", required=True)
    cmd.add_argument("-o", "--output", metavar="FILE")

    cmd = add("import", "import annotations from a triple document")
    cmd.add_argument("file")
    cmd.add_argument("--base", required=True)

    cmd = add("serve", "serve the HTTP interface over the store")
    cmd.add_argument("--port", type=int, required=True)
    cmd.add_argument("--host", default="127.0.0.1")
    cmd.add_argument("--ui", metavar="DIR", help="also serve a static reading UI")

    return parser


def _parse_meta(pairs: list[str]) -> dict[str, str]:
    metadata = {}
    for pair in pairs:
        name, sep, value = pair.partition("=")
        if not sep or not name:
            raise PortannError(f"bad --meta argument (expected K=V): {pair!r}")
        metadata[name] = value
    return metadata


def _print_annotation(ann) -> None:
    print(ann.id)
    for target in ann.targets:
        print(str(target))


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args)
    except PortannError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _run(args: argparse.Namespace) -> int:
    archive = Archive(args.store)

    if args.command == "ingest":
        work = archive.ingest(Path(args.file).read_text(encoding="utf-8"))
        print(f"{work.work_id}: {work.leaf_count} leaves")
    elif args.command == "features":
        count = archive.load_feature_table(
            args.work, Path(args.file).read_text(encoding="utf-8"))
        print(f"{args.work}: {count} assignments")
    elif args.command == "query":
        result = archive.run_query(args.work, args.tql, args.limit)
        for match in result.matches:
            print(" ".join(str(anchor) for _, anchor in match.bindings))
        if result.truncated:
            print("note: result truncated at limit", file=sys.stderr)
    elif args.command == "freeze-query":
        _print_annotation(
            archive.freeze_query(args.work, args.tql, _parse_meta(args.meta)))
    elif args.command == "freeze-feature":
        _print_annotation(
            archive.freeze_feature(args.work, args.key, args.value,
                                   _parse_meta(args.meta)))
    elif args.command == "keyword":
        _print_annotation(
            archive.assign_keyword(args.text, args.targets, _parse_meta(args.meta)))
    elif args.command == "topic":
        spec = json.loads(Path(args.file).read_text(encoding="utf-8"))
        try:
            topic = TopicBody(
                topic_id=str(spec["topic_id"]),
                label=str(spec["label"]),
                words=tuple((str(w["word"]), float(w["weight"]))
                            for w in spec["words"]),
                confidence=args.confidence,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise PortannError(f"bad topic file: {exc}") from None
        _print_annotation(archive.assign_topic(topic, args.target))
    elif args.command == "port":
        results = archive.port(args.source, args.dest, tuple(args.rules), args.ids)
        for original, ported, report in results:
            new_id = ported.id if ported is not None else "dropped"
            counts = " ".join(
                f"{status}={n}" for status, n in sorted(report.summary().items()))
            print(f"{original} -> {new_id} ({counts})")
            for outcome in report.outcomes:
                landed = str(outcome.ported) if outcome.ported is not None else "-"
                print(f"  {outcome.status} {outcome.original} -> {landed}")
    elif args.command == "export":
        document = archive.export(args.base)
        if args.output:
            Path(args.output).write_text(document, encoding="utf-8")
        else:
            sys.stdout.write(document)
    elif args.command == "import":
        result = archive.import_document(
            Path(args.file).read_text(encoding="utf-8"), args.base)
        print(f"imported {len(result.annotations)} annotations")
        for old, new in result.id_map.items():
            print(f"{old} -> {new}")
        for uri in result.opaque_targets:
            print(f"opaque target: {uri}")
    elif args.command == "serve":
        server = serve(archive, args.port, args.host, args.ui)
        host, port = server.server_address[:2]
        print(f"serving on http://{host}:{port}")
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
        finally:
            server.server_close()
    return 0


def console_main() -> None:
    sys.exit(main())
