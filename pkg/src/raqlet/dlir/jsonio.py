"""JSON dump of DLIR programs (``--emit dlir``)."""

from __future__ import annotations

import json

from .ir import Aggregate, Arith, Atom, Comparison, Const, Negation, Program, Term, Var


def _term(t: Term | None):
    if t is None:
        return None
    if isinstance(t, Var):
        return {"var": t.name}
    if isinstance(t, Const):
        return {"const": t.value}
    return {"wildcard": True}


def _atom(a: Atom) -> dict:
    return {"pred": a.pred, "terms": [_term(t) for t in a.terms]}


def _literal(lit) -> dict:
    if isinstance(lit, Atom):
        return {"kind": "atom", **_atom(lit)}
    if isinstance(lit, Negation):
        return {"kind": "negation", **_atom(lit.atom)}
    if isinstance(lit, Comparison):
        return {"kind": "comparison", "op": lit.op, "lhs": _term(lit.lhs), "rhs": _term(lit.rhs)}
    if isinstance(lit, Arith):
        return {"kind": "arith", "target": _term(lit.target), "op": lit.op, "lhs": _term(lit.lhs), "rhs": _term(lit.rhs)}
    if isinstance(lit, Aggregate):
        return {
            "kind": "aggregate",
            "result": _term(lit.result),
            "func": lit.func,
            "target": _term(lit.target),
            "body": [_literal(b) for b in lit.body],
        }
    raise TypeError(lit)


def program_to_dict(prog: Program) -> dict:
    return {
        "decls": [
            {
                "name": d.name,
                "kind": d.kind,
                "columns": [{"name": c, "type": t} for c, t in d.columns],
                "origin": None if d.origin is None else {"kind": d.origin.kind, "type_name": d.origin.type_name},
            }
            for d in prog.decls
        ],
        "rules": [{"head": _atom(r.head), "body": [_literal(b) for b in r.body]} for r in prog.rules],
        "outputs": list(prog.outputs),
    }


def program_to_json(prog: Program) -> str:
    return json.dumps(program_to_dict(prog), indent=2)
