"""Syntax tree for the supported Cypher subset."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal as _Lit, Union

from ..diagnostics import Span

CompareOp = _Lit["=", "<>", "<", "<=", ">", ">="]
AggFunc = _Lit["count", "sum", "min", "max"]


@dataclass(frozen=True)
class PropertyAccess:
    var: str
    prop: str
    span: Span | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return f"{self.var}.{self.prop}"


@dataclass(frozen=True)
class VariableRef:
    var: str
    span: Span | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return self.var


@dataclass(frozen=True)
class Literal:
    value: int | str
    span: Span | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        if isinstance(self.value, str):
            return "'" + self.value.replace("\\", "\\\\").replace("'", "\\'") + "'"
        return str(self.value)


@dataclass(frozen=True)
class Comparison:
    op: CompareOp
    left: "Operand"
    right: "Operand"

    def __str__(self) -> str:
        return f"{self.left} {self.op} {self.right}"


@dataclass(frozen=True)
class And:
    operands: tuple["Expr", ...]

    def __str__(self) -> str:
        return " AND ".join(str(o) for o in self.operands)


@dataclass(frozen=True)
class AggregateCall:
    func: AggFunc
    arg: PropertyAccess
    span: Span | None = field(default=None, compare=False, repr=False)

    def __str__(self) -> str:
        return f"{self.func}({self.arg})"


Operand = Union[PropertyAccess, VariableRef, Literal, AggregateCall]
Expr = Union[Comparison, And, PropertyAccess, VariableRef, Literal, AggregateCall]


@dataclass(frozen=True)
class StarLength:
    min: int
    max: int | None  # None means unbounded

    def __str__(self) -> str:
        return f"*{self.min}..{'' if self.max is None else self.max}"


@dataclass(frozen=True)
class NodePatternAst:
    variable: str | None
    label: str
    property_map: tuple[tuple[str, Literal], ...] = ()
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class EdgePatternAst:
    variable: str | None
    label: str
    direction: _Lit["left", "right"]
    length: StarLength | None = None  # None is a single hop
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PatternAst:
    """Alternating node/edge chain, always starting and ending with a node."""

    elements: tuple[NodePatternAst | EdgePatternAst, ...]

    @property
    def nodes(self) -> tuple[NodePatternAst, ...]:
        return self.elements[0::2]

    @property
    def edges(self) -> tuple[EdgePatternAst, ...]:
        return self.elements[1::2]


@dataclass(frozen=True)
class MatchClause:
    patterns: tuple[PatternAst, ...]


@dataclass(frozen=True)
class WhereClause:
    predicate: Expr


@dataclass(frozen=True)
class ReturnItem:
    expr: Operand
    alias: str
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ReturnClause:
    items: tuple[ReturnItem, ...]
    distinct: bool = True


Clause = Union[MatchClause, WhereClause, ReturnClause]


@dataclass(frozen=True)
class CypherQuery:
    clauses: tuple[Clause, ...]

    @property
    def matches(self) -> list[MatchClause]:
        return [c for c in self.clauses if isinstance(c, MatchClause)]

    @property
    def where(self) -> WhereClause | None:
        return next((c for c in self.clauses if isinstance(c, WhereClause)), None)

    @property
    def returns(self) -> ReturnClause:
        return self.clauses[-1]


def conjuncts(expr: Expr) -> list[Expr]:
    if isinstance(expr, And):
        out: list[Expr] = []
        for o in expr.operands:
            out.extend(conjuncts(o))
        return out
    return [expr]


def conjoin(items: list[Expr]) -> Expr:
    return items[0] if len(items) == 1 else And(tuple(items))


def pattern_variables(q: CypherQuery) -> list[str]:
    """Pattern variables in textual order, without duplicates."""
    seen: dict[str, None] = {}
    for m in q.matches:
        for p in m.patterns:
            for el in p.elements:
                if el.variable is not None:
                    seen.setdefault(el.variable)
    return list(seen)
