"""Command line interface.

Exit codes: 0 success, 1 domain error (printed to stderr), 2 usage error
(argparse). All subcommands operate on the project in --project (default:
current directory) and call the same Session operations as the HTTP
service.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import TaxoscopeError
from .ontology import load_taxonomy, pun
from .project import ProjectError, Session
from .rdf import Iri
from .turtle import parse_turtle, serialize_turtle


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="taxoscope",
        description="Ontology-driven literature screening and classification.")
    parser.add_argument("--project", default=".", help="project directory (default: .)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="import bibliographic records into the corpus")
    p.add_argument("--format", required=True, choices=("bibtex", "csv", "jsonl"))
    p.add_argument("--columns", default=None,
                   help="csv column map, e.g. title=Document Title,abstract=Abstract")
    p.add_argument("files", nargs="+")

    p = sub.add_parser("screen", help="run the prescreen over the corpus")
    p.add_argument("--st-ontology", default=None, help="software-testing ontology (.ttl)")
    p.add_argument("--ai-ontology", default=None, help="AI-type ontology (.ttl)")

    p = sub.add_parser("discover", help="mine new-term / synonym candidates")
    p.add_argument("--min-papers", type=int, default=None)
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("decide", help="record an include/exclude decision")
    p.add_argument("paper_id")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--include", action="store_true")
    group.add_argument("--exclude", metavar="REASON",
                       help="META_RESEARCH, SYSTEM_UNDER_TEST_NOT_METHOD, ST_FOR_AI, "
                            "POSTER_OR_TUTORIAL, NOT_AVAILABLE, NOT_PEER_REVIEWED, OTHER")
    p.add_argument("--note", default=None, help="free-text note (required for OTHER)")
    p.add_argument("--override", action="store_true",
                   help="allow deciding a plain candidate (EXCLUDE only)")

    p = sub.add_parser("classify", help="record a five-dimension classification")
    p.add_argument("paper_id")
    p.add_argument("--purpose", action="append", required=True)
    p.add_argument("--target", action="append", required=True)
    p.add_argument("--ai-type", action="append", required=True)
    p.add_argument("--level", required=True)
    p.add_argument("--topic", action="append", default=[])

    p = sub.add_parser("pun", help="pun an ontology's classes to individuals")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", dest="outfile", required=True)

    p = sub.add_parser("query", help="run a SELECT query over the knowledge base")
    p.add_argument("--file", required=True, help=".rq query file")
    p.add_argument("--csv", action="store_true", help="CSV instead of one value per line")
    p.add_argument("--json", action="store_true", help="JSON table output")

    p = sub.add_parser("report", help="render a report")
    p.add_argument("kind", choices=("funnel", "coverage", "annex"))

    p = sub.add_parser("serve", help="start the local review service")
    p.add_argument("--port", type=int, default=None)

    return parser


def _parse_columns(spec: str) -> dict:
    mapping = {}
    for part in spec.split(","):
        if "=" not in part:
            raise ProjectError(f"bad --columns entry {part!r}; expected field=Column")
        field, column = part.split("=", 1)
        mapping[field.strip()] = column.strip()
    return mapping


def _cmd_ingest(session: Session, args) -> int:
    column_map = _parse_columns(args.columns) if args.columns else None
    corpus = session.ingest(args.files, args.format, column_map)
    print(f"corpus: {len(corpus)} records ({len(corpus.merge_log)} merged)")
    return 0


def _cmd_screen(session: Session, args) -> int:
    from .screening import funnel_counts

    state = session.screen(args.st_ontology, args.ai_ontology)
    stats = funnel_counts(state)
    print(f"screened {stats.total} papers "
          f"(ontology version {state.ontology_version}): "
          f"{stats.candidates} candidates, {stats.ai_candidates} AI-candidates")
    return 0


def _cmd_discover(session: Session, args) -> int:
    candidates = session.discover(args.min_papers)
    if args.json:
        print(json.dumps([{
            "surface_form": c.surface_form, "kind": c.kind.value,
            "frequency": c.frequency,
            "nearest_concept": c.nearest_concept.value if c.nearest_concept else None,
            "similarity": float(c.similarity) if c.similarity is not None else None,
            "example_paper_ids": list(c.example_paper_ids),
        } for c in candidates], indent=2))
        return 0
    if not candidates:
        print("no candidates above the threshold")
        return 0
    for i, c in enumerate(candidates):
        nearest = (f" nearest={c.nearest_concept.value.rsplit('#', 1)[-1]}"
                   f" sim={c.similarity}" if c.nearest_concept else "")
        print(f"[{i}] {c.surface_form!r} kind={c.kind.value} papers={c.frequency}{nearest}")
    return 0


def _cmd_decide(session: Session, args) -> int:
    verdict = "INCLUDE" if args.include else "EXCLUDE"
    session.decide(args.paper_id, verdict, args.exclude, args.note, args.override)
    print(f"{args.paper_id}: {verdict}" + (f" ({args.exclude})" if args.exclude else ""))
    return 0


def _cmd_classify(session: Session, args) -> int:
    record = session.classify(args.paper_id, args.topic, args.purpose, args.target,
                              args.ai_type, args.level)
    print(f"{args.paper_id}: classified at level {record.level} "
          f"({len(record.targets)} targets)")
    return 0


def _cmd_pun(session: Session, args) -> int:
    graph = parse_turtle(Path(args.infile).read_text(encoding="utf-8"))
    punned = pun(load_taxonomy(graph))
    Path(args.outfile).write_text(serialize_turtle(punned), encoding="utf-8")
    print(f"punned {args.infile} -> {args.outfile} ({len(punned)} triples)")
    return 0


def _cmd_query(session: Session, args) -> int:
    table = session.query(Path(args.file).read_text(encoding="utf-8"))
    if args.json:
        print(json.dumps(table.to_json_obj(), indent=2))
    elif args.csv:
        sys.stdout.write(table.to_csv())
    else:
        for row in table.rows:
            print("\t".join(t.value if isinstance(t, Iri) else t.lexical for t in row))
    return 0


def _cmd_report(session: Session, args) -> int:
    session.reports_dir.mkdir(parents=True, exist_ok=True)
    if args.kind == "funnel":
        from .reports import funnel_to_csv, funnel_to_json_obj
        from .screening import funnel_counts

        doc = session.funnel_report()
        text = doc.to_markdown()
        (session.reports_dir / "funnel.md").write_text(text, encoding="utf-8")
        state = session.state()
        stats = funnel_counts(state)
        (session.reports_dir / "funnel.csv").write_text(
            funnel_to_csv(stats), encoding="utf-8")
        (session.reports_dir / "funnel.json").write_text(
            json.dumps(funnel_to_json_obj(stats, state, state.ontology_version),
                       indent=1, sort_keys=True) + "\n", encoding="utf-8")
        print(text, end="")
    elif args.kind == "coverage":
        doc = session.coverage_report()
        text = doc.to_markdown()
        (session.reports_dir / "coverage.md").write_text(text, encoding="utf-8")
        print(text, end="")
    else:
        paths = session.annex()
        for name in sorted(paths):
            print(f"{name}: {paths[name]}")
    return 0


def _cmd_serve(session: Session, args) -> int:
    import uvicorn

    from .service import create_app

    port = args.port if args.port is not None else session.config.port
    app = create_app(session)
    print(f"taxoscope review service on http://127.0.0.1:{port}")
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "screen": _cmd_screen,
    "discover": _cmd_discover,
    "decide": _cmd_decide,
    "classify": _cmd_classify,
    "pun": _cmd_pun,
    "query": _cmd_query,
    "report": _cmd_report,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    session = Session(args.project)
    try:
        return _COMMANDS[args.command](session, args)
    except TaxoscopeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
