"""Dead-rule elimination: keep only what the outputs depend on."""

from __future__ import annotations

from dataclasses import replace

from ..dlir.depgraph import build_dependency_graph
from ..dlir.ir import Program


def live_predicates(prog: Program) -> set[str]:
    graph = build_dependency_graph(prog)
    preds: dict[str, list[str]] = {}
    for e in graph.edges:
        preds.setdefault(e.target, []).append(e.source)
    seen = set(prog.outputs)
    todo = list(prog.outputs)
    while todo:
        p = todo.pop()
        for q in preds.get(p, ()):
            if q not in seen:
                seen.add(q)
                todo.append(q)
    return seen


def eliminate_dead_rules(prog: Program) -> Program:
    live = live_predicates(prog)
    rules = tuple(r for r in prog.rules if r.head.pred in live)
    decls = tuple(d for d in prog.decls if d.kind == "EDB" or d.name in live)
    return replace(prog, decls=decls, rules=rules)
