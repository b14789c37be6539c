"""Deletion of rules that can never fire."""

from __future__ import annotations

from ..dlir.ir import Atom, Comparison, Const, Program, Rule, Var
from ..schema import DlSchema


def _node_preds(prog: Program, d: DlSchema | None) -> set[str]:
    out = {decl.name for decl in prog.decls if decl.is_node}
    if d is not None:
        out |= {name for name in d.node_edb_names() if prog.is_edb(name)}
    return out


def unsatisfiable(rule: Rule, node_preds: set[str]) -> bool:
    labels: dict[str, set[str]] = {}
    for lit in rule.body:
        if isinstance(lit, Atom) and lit.pred in node_preds and lit.terms and isinstance(lit.terms[0], Var):
            labels.setdefault(lit.terms[0].name, set()).add(lit.pred)
    # node ids of different labels live in disjoint key spaces
    if any(len(s) > 1 for s in labels.values()):
        return True
    consts: dict[str, set] = {}
    for lit in rule.body:
        if not isinstance(lit, Comparison) or lit.op != "=":
            continue
        l, r = lit.lhs, lit.rhs
        if isinstance(l, Const) and isinstance(r, Const):
            if l != r:
                return True
        elif isinstance(l, Var) and isinstance(r, Const):
            consts.setdefault(l.name, set()).add(r)
        elif isinstance(r, Var) and isinstance(l, Const):
            consts.setdefault(r.name, set()).add(l)
    return any(len(s) > 1 for s in consts.values())


def prune_unsatisfiable_joins(prog: Program, d: DlSchema | None = None) -> Program:
    nodes = _node_preds(prog, d)
    return prog.with_rules(r for r in prog.rules if not unsatisfiable(r, nodes))
