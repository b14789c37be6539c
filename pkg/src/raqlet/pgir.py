"""PGIR: the clause-level property-graph IR, lowered from normalized Cypher."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal as _Lit, Union

from .cypher.ast import (
    AggregateCall,
    Comparison,
    CypherQuery,
    EdgePatternAst,
    Literal,
    NodePatternAst,
    Operand,
    PropertyAccess,
    ReturnItem,
    StarLength,
    VariableRef,
    conjuncts,
)
from .diagnostics import Diagnostic, Span, error
from .errors import ERROR_BY_CODE, InvariantViolation
from .schema import EdgeType, NodeType, PropertyGraphSchema


@dataclass(frozen=True)
class PgirNodePattern:
    node_label: str
    node_var: str
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PgirEdgePattern:
    edge_label: str
    edge_var: str
    source: PgirNodePattern
    target: PgirNodePattern
    length: StarLength | None = None
    direction: _Lit["directed-forward", "directed-backward"] = "directed-forward"
    span: Span | None = field(default=None, compare=False, repr=False)


Pattern = Union[PgirEdgePattern, PgirNodePattern]


@dataclass(frozen=True)
class Match:
    patterns: tuple[Pattern, ...]


@dataclass(frozen=True)
class Where:
    conjuncts: tuple[Comparison, ...]


@dataclass(frozen=True)
class Return:
    items: tuple[ReturnItem, ...]
    distinct: bool = True


PgirClause = Union[Match, Where, Return]


@dataclass(frozen=True)
class PgirQuery:
    clauses: tuple[PgirClause, ...]
    binding_order: tuple[tuple[str, ...], ...]

    def variables(self) -> set[str]:
        out: set[str] = set()
        for c in self.clauses:
            if isinstance(c, Match):
                for p in c.patterns:
                    out.update(pattern_vars(p))
        return out


def pattern_vars(p: Pattern) -> list[str]:
    if isinstance(p, PgirNodePattern):
        return [p.node_var]
    return [p.source.node_var, p.edge_var, p.target.node_var]


def lower_to_pgir(q: CypherQuery, schema: PropertyGraphSchema) -> PgirQuery:
    """Lower a *normalized* query; the result is validated against ``schema``."""
    clauses: list[PgirClause] = []
    orders: list[tuple[str, ...]] = []
    bound: list[str] = []
    for m in q.matches:
        patterns: list[Pattern] = []
        for chain in m.patterns:
            nodes = chain.nodes
            for el in chain.elements:
                if el.variable is None:
                    raise InvariantViolation("lower_to_pgir needs a normalized query (anonymous pattern found)")
                if isinstance(el, NodePatternAst) and el.property_map:
                    raise InvariantViolation("lower_to_pgir needs a normalized query (property map found)")
            if not chain.edges:
                n = nodes[0]
                patterns.append(PgirNodePattern(n.label, n.variable, n.span))
            for i, e in enumerate(chain.edges):
                patterns.append(_edge(e, nodes[i], nodes[i + 1]))
        for p in patterns:
            for v in pattern_vars(p):
                if v not in bound:
                    bound.append(v)
        clauses.append(Match(tuple(patterns)))
        orders.append(tuple(bound))
    if q.where is not None:
        clauses.append(Where(tuple(conjuncts(q.where.predicate))))
        orders.append(tuple(bound))
    ret = q.returns
    clauses.append(Return(ret.items, ret.distinct))
    orders.append(tuple(i.alias for i in ret.items))
    pgir = PgirQuery(tuple(clauses), tuple(orders))

    for diag in validate_pgir(pgir, schema):
        if diag.severity == "error":
            exc = ERROR_BY_CODE.get(diag.code, InvariantViolation)
            span = diag.span
            raise exc(diag.message, line=span.line if span else None, column=span.column if span else None)
    return pgir


def _edge(e: EdgePatternAst, left: NodePatternAst, right: NodePatternAst) -> PgirEdgePattern:
    src, tgt = (left, right) if e.direction == "right" else (right, left)
    return PgirEdgePattern(
        e.label,
        e.variable,
        PgirNodePattern(src.label, src.variable, src.span),
        PgirNodePattern(tgt.label, tgt.variable, tgt.span),
        e.length,
        "directed-forward",
        e.span,
    )


# variable -> what it is bound to during validation
_Binding = Union[NodeType, tuple[EdgeType, StarLength | None]]


def validate_pgir(p: PgirQuery, schema: PropertyGraphSchema) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    kinds = [type(c).__name__ for c in p.clauses]
    n_match, n_where = kinds.count("Match"), kinds.count("Where")
    expected = ["Match"] * n_match + ["Where"] * n_where + ["Return"]
    if kinds != expected or n_match == 0:
        diags.append(error("INVARIANT_VIOLATION", f"clauses must be MATCH+, WHERE*, RETURN; got {kinds}"))
        return diags

    env: dict[str, _Binding] = {}

    def bind(var: str, value: _Binding, span: Span | None) -> None:
        prev = env.get(var)
        if prev is None:
            env[var] = value
        elif prev != value:
            diags.append(error("TYPE_MISMATCH", f"variable {var} is bound to incompatible patterns", var, span))

    for clause in p.clauses:
        if isinstance(clause, Match):
            for pat in clause.patterns:
                ends = [pat] if isinstance(pat, PgirNodePattern) else [pat.source, pat.target]
                resolved: dict[str, NodeType] = {}
                for n in ends:
                    nt = schema.node(n.node_label)
                    if nt is None:
                        diags.append(error("UNKNOWN_LABEL", f"unknown node label {n.node_label}", n.node_label, n.span))
                    else:
                        resolved[n.node_var] = nt
                        bind(n.node_var, nt, n.span)
                if isinstance(pat, PgirEdgePattern):
                    _check_edge(pat, schema, resolved, bind, diags)
        elif isinstance(clause, Where):
            for c in clause.conjuncts:
                if not isinstance(c, Comparison):
                    diags.append(error("UNSUPPORTED_FEATURE", f"WHERE conjunct {c} is not a comparison"))
                    continue
                _check_comparison(c, env, diags)
        else:
            aliases: set[str] = set()
            for item in clause.items:
                if item.alias in aliases:
                    diags.append(error("DUPLICATE_ALIAS", f"duplicate RETURN alias {item.alias}", item.alias, item.span))
                aliases.add(item.alias)
                _type_of(item.expr, env, diags, allow_agg=True)
    return diags


def _check_edge(pat: PgirEdgePattern, schema, resolved, bind, diags) -> None:
    if not schema.edges_with_label(pat.edge_label):
        diags.append(error("UNKNOWN_LABEL", f"unknown edge label {pat.edge_label}", pat.edge_label, pat.span))
        return
    if pat.source.node_var not in resolved or pat.target.node_var not in resolved:
        return
    et = schema.edge(pat.edge_label, pat.source.node_label, pat.target.node_label)
    if et is None:
        diags.append(
            error(
                "UNKNOWN_LABEL",
                f"no edge type {pat.edge_label} from {pat.source.node_label} to {pat.target.node_label}",
                pat.edge_label,
                pat.span,
            )
        )
        return
    length = pat.length
    if length is not None:
        if length.min < 1 or (length.max is None and length.min > 1) or (length.max is not None and length.min > length.max):
            diags.append(error("UNSUPPORTED_STAR_BOUNDS", f"unsupported star bounds {length}", pat.edge_var, pat.span))
        if et.source_label != et.target_label:
            diags.append(
                error(
                    "TYPE_MISMATCH",
                    f"variable-length edge {pat.edge_label} needs the same source and target label",
                    pat.edge_var,
                    pat.span,
                )
            )
    bind(pat.edge_var, (et, length), pat.span)


def _type_of(expr: Operand, env: dict[str, _Binding], diags: list[Diagnostic], allow_agg: bool = False) -> str | None:
    if isinstance(expr, Literal):
        return "STRING" if isinstance(expr.value, str) else "INT"
    if isinstance(expr, AggregateCall):
        if not allow_agg:
            diags.append(error("UNSUPPORTED_FEATURE", "aggregates are only allowed in RETURN", span=expr.span))
            return None
        arg = _type_of(expr.arg, env, diags)
        if expr.func in ("count",):
            return "INT"
        if expr.func == "sum" and arg == "STRING":
            diags.append(error("TYPE_MISMATCH", f"sum over STRING property {expr.arg}", str(expr.arg), expr.span))
            return None
        return arg
    var = expr.var
    binding = env.get(var)
    if binding is None:
        diags.append(error("UNBOUND_VARIABLE", f"variable {var} is not bound by a MATCH", var, expr.span))
        return None
    if isinstance(binding, tuple):
        et, length = binding
        if length is not None:
            diags.append(
                error("UNSUPPORTED_FEATURE", f"variable-length edge variable {var} cannot be referenced", var, expr.span)
            )
            return None
        owner, label = et, et.label
    else:
        owner, label = binding, binding.label
    if isinstance(expr, VariableRef):
        prop_name = "id"
    else:
        prop_name = expr.prop
    prop = owner.property(prop_name)
    if prop is None:
        code = "UNKNOWN_PROPERTY" if isinstance(expr, PropertyAccess) else "UNSUPPORTED_FEATURE"
        diags.append(error(code, f"{label} has no property {prop_name}", f"{var}.{prop_name}", expr.span))
        return None
    if isinstance(owner, EdgeType) and owner.property("id") is None:
        diags.append(
            error(
                "UNSUPPORTED_FEATURE",
                f"edge type {owner.type_name} has no id property, so {var} cannot be referenced",
                var,
                expr.span,
            )
        )
        return None
    return prop.type


def _check_comparison(c: Comparison, env, diags) -> None:
    lt = _type_of(c.left, env, diags)
    rt = _type_of(c.right, env, diags)
    if lt is not None and rt is not None and lt != rt:
        diags.append(error("TYPE_MISMATCH", f"cannot compare {lt} with {rt} in {c}", str(c)))


def _expr_json(e) -> dict:
    if isinstance(e, PropertyAccess):
        return {"kind": "property", "var": e.var, "prop": e.prop}
    if isinstance(e, VariableRef):
        return {"kind": "variable", "var": e.var}
    if isinstance(e, Literal):
        return {"kind": "literal", "value": e.value}
    if isinstance(e, AggregateCall):
        return {"kind": "aggregate", "func": e.func, "arg": _expr_json(e.arg)}
    if isinstance(e, Comparison):
        return {"kind": "comparison", "op": e.op, "left": _expr_json(e.left), "right": _expr_json(e.right)}
    raise TypeError(e)


def _pattern_json(p: Pattern) -> dict:
    if isinstance(p, PgirNodePattern):
        return {"kind": "node", "node_label": p.node_label, "node_var": p.node_var}
    length = None if p.length is None else {"min": p.length.min, "max": p.length.max}
    return {
        "kind": "edge",
        "edge_label": p.edge_label,
        "edge_var": p.edge_var,
        "direction": p.direction,
        "source": _pattern_json(p.source),
        "target": _pattern_json(p.target),
        "length": length,
    }


def pgir_to_json(p: PgirQuery) -> str:
    clauses = []
    for c, order in zip(p.clauses, p.binding_order):
        if isinstance(c, Match):
            d = {"clause": "Match", "patterns": [_pattern_json(x) for x in c.patterns]}
        elif isinstance(c, Where):
            d = {"clause": "Where", "predicate": [_expr_json(x) for x in c.conjuncts]}
        else:
            d = {
                "clause": "Return",
                "distinct": c.distinct,
                "items": [{"expr": _expr_json(i.expr), "alias": i.alias} for i in c.items],
            }
        d["binding_order"] = list(order)
        clauses.append(d)
    return json.dumps({"clauses": clauses}, indent=2)
