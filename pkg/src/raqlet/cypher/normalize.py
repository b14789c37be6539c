from __future__ import annotations

from dataclasses import replace

from .ast import (
    Comparison,
    CypherQuery,
    EdgePatternAst,
    Expr,
    MatchClause,
    NodePatternAst,
    PatternAst,
    PropertyAccess,
    ReturnClause,
    WhereClause,
    conjoin,
    conjuncts,
    pattern_variables,
)


def normalize_query(q: CypherQuery) -> CypherQuery:
    """Name anonymous patterns and move inline property maps into WHERE.

    Fresh names ``x1, x2, ...`` are handed out in textual order, skipping any
    name the query already uses. Extracted conditions precede the query's own
    WHERE conjuncts.
    """
    taken = set(pattern_variables(q)) | {item.alias for item in q.returns.items}
    counter = 0

    def fresh() -> str:
        nonlocal counter
        while True:
            counter += 1
            name = f"x{counter}"
            if name not in taken:
                taken.add(name)
                return name

    conditions: list[Expr] = []
    matches: list[MatchClause] = []
    for m in q.matches:
        patterns = []
        for p in m.patterns:
            elements: list[NodePatternAst | EdgePatternAst] = []
            for el in p.elements:
                var = el.variable if el.variable is not None else fresh()
                if isinstance(el, NodePatternAst):
                    for key, lit in el.property_map:
                        conditions.append(Comparison("=", PropertyAccess(var, key, lit.span), lit))
                    el = replace(el, variable=var, property_map=())
                else:
                    el = replace(el, variable=var)
                elements.append(el)
            patterns.append(PatternAst(tuple(elements)))
        matches.append(MatchClause(tuple(patterns)))

    if q.where is not None:
        conditions.extend(conjuncts(q.where.predicate))
    clauses: list = list(matches)
    if conditions:
        clauses.append(WhereClause(conjoin(conditions)))
    ret: ReturnClause = q.returns
    clauses.append(ret)
    return CypherQuery(tuple(clauses))
