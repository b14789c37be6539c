"""DLIR core: typed Datalog with negation, arithmetic and aggregation."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, Literal as _Lit, Union

from ..schema import ColumnType, DlSchema, EdbOrigin

CompareOp = _Lit["=", "!=", "<", "<=", ">", ">="]
ArithOp = _Lit["+", "-", "*"]
AggFunc = _Lit["count", "sum", "min", "max"]
Kind = _Lit["EDB", "IDB"]

NEGATE_OP: dict[str, str] = {"=": "!=", "!=": "=", "<": ">=", "<=": ">", ">": "<=", ">=": "<"}
FLIP_OP: dict[str, str] = {"=": "=", "!=": "!=", "<": ">", "<=": ">=", ">": "<", ">=": "<="}


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Wildcard:
    def __str__(self) -> str:
        return "_"


WILDCARD = Wildcard()


@dataclass(frozen=True)
class Const:
    value: int | str

    def __str__(self) -> str:
        if isinstance(self.value, str):
            return '"' + self.value.replace("\\", "\\\\").replace('"', '\\"') + '"'
        return str(self.value)


Term = Union[Var, Wildcard, Const]


@dataclass(frozen=True)
class Atom:
    pred: str
    terms: tuple[Term, ...]

    def __str__(self) -> str:
        return f"{self.pred}({', '.join(str(t) for t in self.terms)})"

    @property
    def arity(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class Negation:
    atom: Atom

    def __str__(self) -> str:
        return f"!{self.atom}"


@dataclass(frozen=True)
class Comparison:
    lhs: Term
    op: CompareOp
    rhs: Term

    def __str__(self) -> str:
        return f"{self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class Arith:
    """``target = lhs op rhs``."""

    target: Var
    lhs: Term
    op: ArithOp
    rhs: Term

    def __str__(self) -> str:
        return f"{self.target} = {self.lhs} {self.op} {self.rhs}"


@dataclass(frozen=True)
class Aggregate:
    """``result = func target : { body }``; ``target`` is None for count."""

    result: Var
    func: AggFunc
    target: Term | None
    body: tuple[Atom | Comparison, ...]

    def __str__(self) -> str:
        tgt = "" if self.target is None else f" {self.target}"
        inner = ", ".join(str(b) for b in self.body)
        return f"{self.result} = {self.func}{tgt} : {{ {inner} }}"


Literal = Union[Atom, Negation, Comparison, Arith, Aggregate]


@dataclass(frozen=True)
class Rule:
    head: Atom
    body: tuple[Literal, ...] = ()

    def __str__(self) -> str:
        if not self.body:
            return f"{self.head}."
        return f"{self.head} :- {', '.join(str(b) for b in self.body)}."

    def atoms(self) -> Iterator[Atom]:
        """Every atom of the body, including negated and aggregated ones."""
        for lit in self.body:
            yield from literal_atoms(lit)

    def positive_atoms(self) -> list[Atom]:
        return [lit for lit in self.body if isinstance(lit, Atom)]


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    columns: tuple[tuple[str, ColumnType], ...]
    kind: Kind = "IDB"
    origin: EdbOrigin | None = None

    @property
    def arity(self) -> int:
        return len(self.columns)

    @property
    def column_names(self) -> list[str]:
        return [c for c, _ in self.columns]

    @property
    def is_node(self) -> bool:
        return self.kind == "EDB" and self.origin is not None and self.origin.kind == "node"


@dataclass(frozen=True)
class Program:
    decls: tuple[PredicateDecl, ...] = ()
    rules: tuple[Rule, ...] = ()
    outputs: tuple[str, ...] = ()
    _by_name: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        # EDB declarations always precede IDB declarations
        edbs = tuple(d for d in self.decls if d.kind == "EDB")
        idbs = tuple(d for d in self.decls if d.kind != "EDB")
        object.__setattr__(self, "decls", edbs + idbs)
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "_by_name", {d.name: d for d in self.decls})

    def decl(self, name: str) -> PredicateDecl | None:
        return self._by_name.get(name)

    def is_edb(self, name: str) -> bool:
        d = self.decl(name)
        return d is not None and d.kind == "EDB"

    @property
    def edb_decls(self) -> list[PredicateDecl]:
        return [d for d in self.decls if d.kind == "EDB"]

    @property
    def idb_decls(self) -> list[PredicateDecl]:
        return [d for d in self.decls if d.kind == "IDB"]

    def rules_for(self, pred: str) -> list[Rule]:
        return [r for r in self.rules if r.head.pred == pred]

    def with_rules(self, rules: Iterable[Rule]) -> "Program":
        return replace(self, rules=tuple(rules))


def literal_atoms(lit: Literal) -> Iterator[Atom]:
    if isinstance(lit, Atom):
        yield lit
    elif isinstance(lit, Negation):
        yield lit.atom
    elif isinstance(lit, Aggregate):
        for b in lit.body:
            if isinstance(b, Atom):
                yield b


def term_vars(t: Term | None) -> set[str]:
    return {t.name} if isinstance(t, Var) else set()


def literal_vars(lit: Literal) -> set[str]:
    if isinstance(lit, Atom):
        return {t.name for t in lit.terms if isinstance(t, Var)}
    if isinstance(lit, Negation):
        return literal_vars(lit.atom)
    if isinstance(lit, Comparison):
        return term_vars(lit.lhs) | term_vars(lit.rhs)
    if isinstance(lit, Arith):
        return {lit.target.name} | term_vars(lit.lhs) | term_vars(lit.rhs)
    if isinstance(lit, Aggregate):
        out = {lit.result.name} | term_vars(lit.target)
        for b in lit.body:
            out |= literal_vars(b)
        return out
    raise TypeError(lit)


def rule_vars(rule: Rule) -> set[str]:
    out = literal_vars(rule.head)
    for lit in rule.body:
        out |= literal_vars(lit)
    return out


def aggregate_outer_vars(rule: Rule, index: int) -> set[str]:
    """Variables of the aggregate at ``rule.body[index]`` shared with the rest of the body (grouping keys)."""
    agg = rule.body[index]
    inner: set[str] = set()
    for b in agg.body:
        inner |= literal_vars(b)
    inner |= term_vars(agg.target)
    rest: set[str] = set()
    for i, lit in enumerate(rule.body):
        if i != index:
            rest |= literal_vars(lit)
    return inner & rest


def substitute_term(t: Term, sub: dict[str, Term]) -> Term:
    if isinstance(t, Var) and t.name in sub:
        return sub[t.name]
    return t


def substitute(lit: Literal, sub: dict[str, Term]) -> Literal:
    s = lambda t: substitute_term(t, sub)  # noqa: E731
    if isinstance(lit, Atom):
        return Atom(lit.pred, tuple(s(t) for t in lit.terms))
    if isinstance(lit, Negation):
        return Negation(substitute(lit.atom, sub))
    if isinstance(lit, Comparison):
        return Comparison(s(lit.lhs), lit.op, s(lit.rhs))
    if isinstance(lit, Arith):
        target = s(lit.target)
        if not isinstance(target, Var):
            raise ValueError(f"cannot substitute {target} for arithmetic target {lit.target}")
        return Arith(target, s(lit.lhs), lit.op, s(lit.rhs))
    if isinstance(lit, Aggregate):
        result = s(lit.result)
        if not isinstance(result, Var):
            raise ValueError("cannot substitute a non-variable for an aggregate result")
        target = None if lit.target is None else s(lit.target)
        return Aggregate(result, lit.func, target, tuple(substitute(b, sub) for b in lit.body))
    raise TypeError(lit)


def rename_apart(rule: Rule, taken: set[str], keep: set[str] = frozenset()) -> tuple[Rule, dict[str, Term]]:
    """Rename variables of ``rule`` (except ``keep``) so none collide with ``taken``."""
    sub: dict[str, Term] = {}
    used = set(taken)
    for v in sorted(rule_vars(rule)):
        if v in keep:
            continue
        if v in used:
            sub[v] = Var(fresh_name(v, used))
        used.add(sub[v].name if v in sub else v)
    head = substitute(rule.head, sub)
    body = tuple(substitute(b, sub) for b in rule.body)
    return Rule(head, body), sub


def fresh_name(base: str, taken: set[str]) -> str:
    if base not in taken:
        return base
    i = 1
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def edb_decls_from_schema(d: DlSchema) -> list[PredicateDecl]:
    return [PredicateDecl(e.name, e.columns, "EDB", e.origin) for e in d.edbs]


def add_schema_decls(prog: Program, d: DlSchema | None) -> Program:
    """Add EDB declarations from ``d`` that the program does not declare yet, filling in origins."""
    if d is None:
        return prog
    decls = list(prog.decls)
    for i, decl in enumerate(decls):
        e = d.get(decl.name)
        if e is not None and decl.kind == "EDB" and decl.origin is None:
            decls[i] = replace(decl, origin=e.origin)
    known = {x.name for x in decls}
    extra = [x for x in edb_decls_from_schema(d) if x.name not in known]
    return replace(prog, decls=tuple(extra + decls))
