"""Souffle Datalog emission."""

from __future__ import annotations

import re

from ..analysis import check_backend_compat
from ..diagnostics import has_errors
from ..dlir.ir import Aggregate, Arith, Atom, Comparison, Const, Negation, PredicateDecl, Program, add_schema_decls, rule_vars
from ..dlir.text import render_dlir
from ..errors import BackendIncompatible, UnsupportedConstruct
from ..schema import DlSchema

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def _ident(name: str, what: str) -> None:
    if not _IDENT.match(name):
        raise UnsupportedConstruct(f"{what} {name!r} is not a valid Souffle identifier")


def _check_spellable(prog: Program) -> None:
    for d in prog.decls:
        _ident(d.name, "predicate")
        for c, _ in d.columns:
            _ident(c, "column")
    for rule in prog.rules:
        for v in rule_vars(rule):
            _ident(v, "variable")
        for text in _symbols(rule):
            if "\n" in text or "\r" in text:
                raise UnsupportedConstruct(f"symbol constant {text!r} contains a line break")


def _symbols(rule):
    def terms(lit):
        if isinstance(lit, Atom):
            yield from lit.terms
        elif isinstance(lit, Negation):
            yield from lit.atom.terms
        elif isinstance(lit, (Comparison, Arith)):
            yield lit.lhs
            yield lit.rhs
        elif isinstance(lit, Aggregate):
            if lit.target is not None:
                yield lit.target
            for b in lit.body:
                yield from terms(b)

    for lit in (rule.head, *rule.body):
        for t in terms(lit):
            if isinstance(t, Const) and isinstance(t.value, str):
                yield t.value


def emit_souffle(prog: Program, d: DlSchema | None = None, fact_delim: str = "\t") -> str:
    """Souffle program text; EDBs read ``<EDB>.facts`` files."""
    diags = check_backend_compat(prog, "souffle")
    if has_errors(diags):
        raise BackendIncompatible("program cannot run on Souffle", diags)
    prog = add_schema_decls(prog, d)
    _check_spellable(prog)

    def directive(decl: PredicateDecl) -> str:
        if fact_delim == "\t":
            return f".input {decl.name}"
        delim = fact_delim.replace("\\", "\\\\").replace('"', '\\"')
        return f'.input {decl.name}(IO=file, filename="{decl.name}.facts", delimiter="{delim}")'

    return render_dlir(prog, directive)
