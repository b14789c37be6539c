"""Command-line driver: ``raqlet compile|analyze|eval|diff``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

from .analysis import analyze_program, check_stratification
from .backends import emit_souffle, emit_sql, emit_sql_ddl
from .cypher import normalize_query, parse_cypher
from .diagnostics import Diagnostic, has_errors
from .dlir import parse_dlir, program_to_json, render_dlir, translate_pgir_to_dlir
from .dlir.ir import Program
from .errors import BackendIncompatible, RaqletError
from .evaluator import EvalStats, evaluate, format_output, load_facts_csv, query_output, sort_key
from .optimizer import parse_pipeline
from .pgir import PgirQuery, lower_to_pgir, pgir_to_json
from .schema import DlSchema, derive_dl_schema, parse_pg_schema

EXIT_OK, EXIT_COMPILE_ERROR, EXIT_BACKEND = 0, 1, 2


class _UsageError(Exception):
    pass


@dataclass
class Compiled:
    program: Program
    dl_schema: DlSchema | None
    pgir: PgirQuery | None
    diagnostics: list[Diagnostic]


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise _UsageError(f"no such file: {path}")
    return p.read_text(encoding="utf-8")


def build_program(schema_path: str | None, query_path: str, opt: str = "none") -> Compiled:
    """Front end plus optimizer: a ``.dl`` query is read as DLIR, anything else as Cypher."""
    d = None
    pg = None
    if schema_path is not None:
        pg = parse_pg_schema(_read(schema_path))
        d = derive_dl_schema(pg)
    text = _read(query_path)
    pgir = None
    if query_path.endswith(".dl"):
        prog = parse_dlir(text, d)
    else:
        if pg is None:
            raise _UsageError("--schema is required for a Cypher query")
        pgir = lower_to_pgir(normalize_query(parse_cypher(text)), pg)
        prog = translate_pgir_to_dlir(pgir, d)
    strat = check_stratification(prog)
    if isinstance(strat, Diagnostic):
        return Compiled(prog, d, pgir, [strat])
    try:
        pipeline = parse_pipeline(opt)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None
    prog, diags = pipeline.run(prog, d)
    return Compiled(prog, d, pgir, diags)


def _report(diags, err: TextIO, min_severity: str = "warning") -> None:
    rank = {"info": 0, "warning": 1, "error": 2}
    for diag in diags:
        if rank[diag.severity] >= rank[min_severity]:
            print(diag.format(), file=err)


def _write(text: str, path: str | None, out: TextIO) -> None:
    if path is None:
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_compile(args, out: TextIO, err: TextIO) -> int:
    c = build_program(args.schema, args.query, args.opt)
    _report(c.diagnostics, err)
    if has_errors(c.diagnostics):
        return EXIT_COMPILE_ERROR
    if args.emit == "pgir":
        if c.pgir is None:
            raise _UsageError("--emit pgir needs a Cypher query")
        _write(pgir_to_json(c.pgir) + "\n", args.output, out)
        return EXIT_OK
    if args.emit == "dlir":
        _write(program_to_json(c.program) + "\n", args.output, out)
        return EXIT_OK
    _report(analyze_program(c.program).diagnostics, err)
    if args.target == "souffle":
        text = emit_souffle(c.program, c.dl_schema, args.fact_delim)
    elif args.target == "sql":
        text = emit_sql(c.program, c.dl_schema, args.dialect)
        if args.ddl is not None:
            source = c.dl_schema if c.dl_schema is not None else c.program
            Path(args.ddl).write_text(emit_sql_ddl(source, args.dialect), encoding="utf-8")
    elif args.target == "dlir":
        text = render_dlir(c.program)
    else:
        if c.pgir is None:
            raise _UsageError("--target pgir needs a Cypher query")
        text = pgir_to_json(c.pgir) + "\n"
    _write(text, args.output, out)
    return EXIT_OK


def cmd_analyze(args, out: TextIO, err: TextIO) -> int:
    c = build_program(args.schema, args.query, "none")
    report = analyze_program(c.program)
    if args.json:
        doc = {
            "summary": report.summary_lines(),
            "diagnostics": [x.to_dict() for x in report.diagnostics],
        }
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        for line in report.summary_lines():
            print(line, file=out)
        for diag in report.diagnostics:
            print(diag.format(), file=out)
    return EXIT_COMPILE_ERROR if has_errors(report.diagnostics) else EXIT_OK


def _run(c: Compiled, facts: str, delim: str) -> tuple[dict, EvalStats]:
    if not Path(facts).is_dir():
        raise _UsageError(f"no such facts directory: {facts}")
    db = load_facts_csv(facts, c.program, delim)
    result, stats = evaluate(c.program, db)
    return query_output(c.program, result), stats


def _stats_line(label: str, stats: EvalStats) -> str:
    return f"{label}derived_tuples={stats.derived_tuple_count} iterations={','.join(map(str, stats.iterations))}"


def cmd_eval(args, out: TextIO, err: TextIO) -> int:
    c = build_program(args.schema, args.query, args.opt)
    _report(c.diagnostics, err)
    if has_errors(c.diagnostics):
        return EXIT_COMPILE_ERROR
    outputs, stats = _run(c, args.facts, args.fact_delim)
    out.write(format_output(outputs))
    if args.stats:
        print(_stats_line("# ", stats), file=err)
    return EXIT_OK


def cmd_diff(args, out: TextIO, err: TextIO) -> int:
    if len(args.opt) != 2:
        raise _UsageError("diff needs exactly two --opt pipelines")
    results = []
    for spec in args.opt:
        c = build_program(args.schema, args.query, spec)
        _report(c.diagnostics, err)
        if has_errors(c.diagnostics):
            return EXIT_COMPILE_ERROR
        results.append(_run(c, args.facts, args.fact_delim))
    (a, sa), (b, sb) = results
    if args.stats:
        print(_stats_line(f"# {args.opt[0]}: ", sa), file=err)
        print(_stats_line(f"# {args.opt[1]}: ", sb), file=err)
    if a == b:
        print("equal", file=out)
        return EXIT_OK
    for pred in sorted(set(a) | set(b)):
        left, right = set(a.get(pred, [])), set(b.get(pred, []))
        for label, rows in ((f"only with --opt {args.opt[0]}", left - right), (f"only with --opt {args.opt[1]}", right - left)):
            lines = format_output({pred: sorted(rows, key=sort_key)})
            if rows:
                print(f"{label}:", file=out)
                out.write("".join("  " + line + "\n" for line in lines.splitlines()))
    return EXIT_COMPILE_ERROR


def _delimiter(value: str) -> str:
    value = {"\\t": "\t", "tab": "\t", "comma": ","}.get(value, value)
    if len(value) != 1:
        raise argparse.ArgumentTypeError("fact delimiter must be a single character")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="raqlet", description="Compile property-graph queries to Datalog and SQL.")
    sub = parser.add_subparsers(dest="command", required=True)

    def inputs(p, schema_required=False):
        p.add_argument("--schema", required=schema_required, help="PG-Schema file (.pgs)")
        p.add_argument("--query", required=True, help="Cypher query (.cql) or DLIR program (.dl)")

    def facts(p):
        p.add_argument("--facts", required=True, help="directory of <EDB>.facts files")
        p.add_argument("--fact-delim", type=_delimiter, default="\t", help="fact file delimiter (default tab)")

    p = sub.add_parser("compile", help="compile a query to a backend")
    inputs(p)
    p.add_argument("--target", choices=["souffle", "sql", "dlir", "pgir"], default="souffle")
    p.add_argument("--dialect", choices=["duckdb", "postgres"], default="duckdb")
    p.add_argument("--opt", default="none", help="none, default, full or a comma-separated pass list")
    p.add_argument("--emit", choices=["pgir", "dlir"], help="dump an intermediate representation as JSON")
    p.add_argument("--fact-delim", type=_delimiter, default="\t", help="delimiter named in Souffle .input directives")
    p.add_argument("--output", "-o", help="write the result here instead of stdout")
    p.add_argument("--ddl", help="with --target sql, also write CREATE TABLE statements here")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("analyze", help="report recursion, stratification and termination")
    inputs(p)
    p.add_argument("--json", action="store_true", help="emit the report as JSON")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("eval", help="evaluate with the reference evaluator")
    inputs(p)
    facts(p)
    p.add_argument("--opt", default="none")
    p.add_argument("--stats", action="store_true", help="print evaluation statistics to stderr")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("diff", help="compare the outputs of two optimization pipelines")
    inputs(p)
    facts(p)
    p.add_argument("--opt", action="append", default=[], help="pipeline (give exactly twice)")
    p.add_argument("--stats", action="store_true")
    p.set_defaults(fn=cmd_diff)
    return parser


def main(argv: list[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args, out, err)
    except BackendIncompatible as exc:
        _report(exc.diagnostics, err, "error")
        print(f"error: {exc.code}: {exc}", file=err)
        return EXIT_BACKEND
    except RaqletError as exc:
        print(f"error: {exc.code}: {exc}", file=err)
        return EXIT_COMPILE_ERROR
    except (_UsageError, OSError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_COMPILE_ERROR


if __name__ == "__main__":
    sys.exit(main())
