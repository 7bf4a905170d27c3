"""Command-line pipeline: extract, build, query, export-dot, serve.

Exit codes: 0 on success, 1 for usage errors, 2 when extraction errors are
present (including NoSourcesFound and unreadable or unparsable inputs).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from tracegraph import knowledge, model_xml, service
from tracegraph.dot_export import export_dot
from tracegraph.knowledge import KnowledgeBase
from tracegraph.populate import NoSourcesFound, extract_project, populate
from tracegraph.query import SelectionQuery, compute_visibility

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EXTRACTION = 2


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> _ArgumentParser:
    parser = _ArgumentParser(prog="tracegraph", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p_extract = sub.add_parser("extract", help="parse a C# source tree into a code-model XML file")
    p_extract.add_argument("srcdir", help="directory scanned recursively for *.cs files")
    p_extract.add_argument("-o", "--output", required=True, help="output .codemodel.xml path")

    p_build = sub.add_parser("build", help="populate a knowledge base from a code-model XML file")
    p_build.add_argument("model", help="input .codemodel.xml path")
    p_build.add_argument("-o", "--output", required=True, help="output .tracekb.json path")

    p_query = sub.add_parser("query", help="run a checkbox visibility query against a knowledge base")
    p_query.add_argument("kb", help="input .tracekb.json path")
    p_query.add_argument(
        "--check",
        action="append",
        default=[],
        metavar="TYPE:NAME",
        help="check an object (type name or id, then display or qualified name); repeatable",
    )
    p_query.add_argument("--columns", help="comma-separated displayed type names or ids (default: all)")
    p_query.add_argument("--links", help="comma-separated enabled link type names or ids (default: all)")

    p_dot = sub.add_parser("export-dot", help="render the knowledge base as a Graphviz DOT file")
    p_dot.add_argument("kb", help="input .tracekb.json path")
    p_dot.add_argument("-o", "--output", help="output .dot path (default: stdout)")

    p_serve = sub.add_parser("serve", help="serve a knowledge base over HTTP")
    p_serve.add_argument("kb", help="input .tracekb.json path")
    p_serve.add_argument("--bind", default="127.0.0.1:8077", metavar="HOST:PORT")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "extract":
            return _cmd_extract(args)
        if args.command == "build":
            return _cmd_build(args)
        if args.command == "query":
            return _cmd_query(args)
        if args.command == "export-dot":
            return _cmd_export_dot(args)
        return _cmd_serve(args)
    except _UsageError as exc:
        print(f"tracegraph: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


class _UsageError(Exception):
    pass


def _load_kb(path_text: str) -> KnowledgeBase:
    path = Path(path_text)
    if not path.is_file():
        raise _UsageError(f"no such file: {path}")
    try:
        return knowledge.load(path.read_bytes())
    except (knowledge.FormatError, knowledge.VersionMismatch) as exc:
        raise _UsageError(f"cannot load {path}: {exc}") from exc


def _cmd_extract(args) -> int:
    try:
        model, _kb, report = extract_project(args.srcdir)
    except NoSourcesFound as exc:
        print(f"tracegraph: error: NoSourcesFound: {exc}", file=sys.stderr)
        return EXIT_EXTRACTION
    Path(args.output).write_text(model_xml.emit_xml(model), encoding="utf-8")
    for diag in report.diagnostics:
        print(f"tracegraph: diagnostic: {diag}", file=sys.stderr)
    for entry in model.unresolved_report:
        print(f"tracegraph: diagnostic: {entry.pos}: skipped {entry.name!r}", file=sys.stderr)
    print(f"wrote {args.output} ({report.source_files} source files)")
    if report.diagnostics or model.unresolved_report:
        return EXIT_EXTRACTION
    return EXIT_OK


def _cmd_build(args) -> int:
    path = Path(args.model)
    if not path.is_file():
        raise _UsageError(f"no such file: {path}")
    try:
        model = model_xml.parse_xml(path.read_text(encoding="utf-8"))
    except (model_xml.SchemaViolation, model_xml.VersionMismatch) as exc:
        print(f"tracegraph: error: {exc}", file=sys.stderr)
        return EXIT_EXTRACTION
    kb = KnowledgeBase()
    report = populate(model, kb)
    Path(args.output).write_bytes(knowledge.save(kb))
    sys.stdout.write(report.render_table())
    print(f"wrote {args.output}")
    return EXIT_OK


def _resolve_type(kb: KnowledgeBase, label: str):
    for t in kb.knowledge_types:
        if t.id == label or t.name == label:
            return t
    raise _UsageError(f"unknown knowledge type {label!r}")


def _resolve_link_type(kb: KnowledgeBase, label: str):
    for t in kb.link_types:
        if t.id == label or t.name == label:
            return t
    raise _UsageError(f"unknown link type {label!r}")


def _cmd_query(args) -> int:
    kb = _load_kb(args.kb)
    if args.columns:
        displayed = [_resolve_type(kb, part).id for part in args.columns.split(",") if part]
    else:
        displayed = [t.id for t in kb.knowledge_types]
    if args.links:
        enabled = {_resolve_link_type(kb, part).id for part in args.links.split(",") if part}
    else:
        enabled = {t.id for t in kb.link_types}
    checked: dict[str, set[str]] = {}
    for spec_text in args.check:
        type_label, sep, name = spec_text.partition(":")
        if not sep or not name:
            raise _UsageError(f"--check expects TYPE:NAME, got {spec_text!r}")
        ktype = _resolve_type(kb, type_label)
        matches = [
            o
            for o in kb.objects.values()
            if o.type_id == ktype.id and (o.qualified_name == name or o.display_name == name)
        ]
        if not matches:
            raise _UsageError(f"no {ktype.name} object named {name!r}")
        if ktype.id not in displayed:
            raise _UsageError(f"checked type {ktype.name!r} is not among the displayed columns")
        checked.setdefault(ktype.id, set()).update(o.id for o in matches)
    result = compute_visibility(
        kb, SelectionQuery(displayed_type_ids=displayed, checked=checked, enabled_link_type_ids=enabled)
    )
    for type_id in displayed:
        ktype = kb.type_by_id(type_id)
        visible = result.visible[type_id]
        rows = sorted(
            (kb.objects[i] for i in visible), key=lambda o: (o.qualified_name, o.id)
        )
        print(f"== {ktype.name} ({len(rows)} visible)")
        for obj in rows:
            mark = "x" if obj.id in checked.get(type_id, set()) else " "
            print(f"  [{mark}] {obj.qualified_name}")
    return EXIT_OK


def _cmd_export_dot(args) -> int:
    kb = _load_kb(args.kb)
    text = export_dot(kb)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_serve(args) -> int:
    path = Path(args.kb)
    if not path.is_file():
        raise _UsageError(f"no such file: {path}")
    bind = os.environ.get("TRACEGRAPH_BIND") or args.bind
    service.serve(path, bind)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
