"""Reference evaluator: stratified, semi-naive bottom-up evaluation of DLIR.

Relations are Python sets of tuples whose values are ``int`` (64-bit,
overflow-checked) or ``str``.  Joins run in the order chosen by
:func:`raqlet.dlir.wellformed.schedule`, probing hash indexes that are built on
demand and reused while a relation is unchanged.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .analysis import stratify
from .diagnostics import has_errors
from .dlir.ir import (
    Aggregate,
    Arith,
    Atom,
    Comparison,
    Const,
    Negation,
    Program,
    Rule,
    Term,
    Var,
    Wildcard,
    aggregate_outer_vars,
)
from .dlir.wellformed import check_program, schedule
from .errors import ArithmeticOverflow, ArityMismatch, EvaluationError, FactParseError

Value = int | str
Database = dict[str, set[tuple]]

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1


@dataclass
class EvalStats:
    derived_tuple_count: int = 0
    iterations: list[int] = field(default_factory=list)  # one entry per IDB stratum


def _check_int(v: int) -> int:
    if v < INT_MIN or v > INT_MAX:
        raise ArithmeticOverflow(f"integer overflow: {v} does not fit in 64 bits")
    return v


def _arith(op: str, a: Value, b: Value) -> int:
    if not isinstance(a, int) or not isinstance(b, int):
        raise EvaluationError(f"arithmetic on non-numbers: {a!r} {op} {b!r}")
    if op == "+":
        return _check_int(a + b)
    if op == "-":
        return _check_int(a - b)
    return _check_int(a * b)


def compare(a: Value, op: str, b: Value) -> bool:
    if op == "=":
        return type(a) is type(b) and a == b
    if op == "!=":
        return not (type(a) is type(b) and a == b)
    if type(a) is not type(b):
        raise EvaluationError(f"cannot order {a!r} against {b!r}")
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


class _Relations:
    """Named relations plus cached hash indexes keyed on bound positions."""

    def __init__(self, rels: dict[str, set[tuple]]):
        self.rels = rels
        self.version: dict[str, int] = {k: 0 for k in rels}
        self._indexes: dict[tuple[str, tuple[int, ...]], tuple[int, dict]] = {}

    def get(self, name: str) -> set[tuple]:
        return self.rels.setdefault(name, set())

    def add(self, name: str, tuples: set[tuple]) -> None:
        if tuples:
            self.get(name).update(tuples)
            self.version[name] = self.version.get(name, 0) + 1

    def index(self, name: str, positions: tuple[int, ...]) -> dict:
        ver = self.version.get(name, 0)
        key = (name, positions)
        hit = self._indexes.get(key)
        if hit is not None and hit[0] == ver:
            return hit[1]
        idx: dict[tuple, list[tuple]] = {}
        for t in self.get(name):
            idx.setdefault(tuple(t[p] for p in positions), []).append(t)
        self._indexes[key] = (ver, idx)
        return idx


def _index_of(tuples: set[tuple], positions: tuple[int, ...]) -> dict:
    idx: dict[tuple, list[tuple]] = {}
    for t in tuples:
        idx.setdefault(tuple(t[p] for p in positions), []).append(t)
    return idx


def _value(t: Term, env: Mapping[str, Value]) -> Value:
    return t.value if isinstance(t, Const) else env[t.name]


class _Plan:
    """Per-rule evaluation order and, per atom, the positions bound on entry."""

    def __init__(self, rule: Rule, bound: Iterable[str] = ()):
        self.rule = rule
        order, _, stuck = schedule(rule, set(bound))
        if stuck:
            raise EvaluationError(f"rule has literals that can never be evaluated: {rule}")
        self.order = order
        bound_now = set(bound)
        self.steps: list[tuple[int, object]] = []
        for idx in order:
            lit = rule.body[idx]
            if isinstance(lit, Atom):
                key_pos: list[int] = []
                bind_pos: list[tuple[int, str]] = []
                check_pos: list[tuple[int, str]] = []
                seen_here: set[str] = set()
                for i, t in enumerate(lit.terms):
                    if isinstance(t, Const) or (isinstance(t, Var) and t.name in bound_now):
                        key_pos.append(i)
                    elif isinstance(t, Var):
                        if t.name in seen_here:
                            check_pos.append((i, t.name))
                        else:
                            seen_here.add(t.name)
                            bind_pos.append((i, t.name))
                self.steps.append((idx, (tuple(key_pos), bind_pos, check_pos)))
                bound_now |= seen_here
            else:
                self.steps.append((idx, None))
                if isinstance(lit, Comparison):
                    for side in (lit.lhs, lit.rhs):
                        if isinstance(side, Var):
                            bound_now.add(side.name)
                elif isinstance(lit, Arith):
                    bound_now.add(lit.target.name)
                elif isinstance(lit, Aggregate):
                    bound_now.add(lit.result.name)


class _Engine:
    def __init__(self, prog: Program, rels: _Relations):
        self.prog = prog
        self.rels = rels
        self.plans: dict[Rule, _Plan] = {}
        self.agg_plans: dict[tuple[Rule, int], tuple[_Plan, Aggregate, set[str]]] = {}

    def plan(self, rule: Rule) -> _Plan:
        p = self.plans.get(rule)
        if p is None:
            p = self.plans[rule] = _Plan(rule)
        return p

    def fire(self, rule: Rule, delta_at: int | None = None, delta: set[tuple] | None = None) -> set[tuple]:
        """All head tuples derivable by ``rule``; the atom at ``delta_at`` reads ``delta``."""
        plan = self.plan(rule)
        out: set[tuple] = set()
        head = rule.head.terms
        for env in self._solve(plan, {}, delta_at, delta, rule):
            out.add(tuple(_value(t, env) for t in head))
        return out

    def _solve(self, plan: _Plan, env: dict, delta_at, delta, rule: Rule) -> Iterator[dict]:
        envs = [env]
        for idx, info in plan.steps:
            lit = plan.rule.body[idx]
            nxt: list[dict] = []
            if isinstance(lit, Atom):
                key_pos, bind_pos, check_pos = info
                if idx == delta_at:
                    index = _index_of(delta, key_pos)
                else:
                    index = self.rels.index(lit.pred, key_pos)
                key_terms = [lit.terms[p] for p in key_pos]
                for e in envs:
                    key = tuple(_value(t, e) for t in key_terms)
                    for tup in index.get(key, ()):
                        ne = dict(e)
                        for p, name in bind_pos:
                            ne[name] = tup[p]
                        if all(tup[p] == ne[name] and type(tup[p]) is type(ne[name]) for p, name in check_pos):
                            nxt.append(ne)
            elif isinstance(lit, Negation):
                rel = self.rels.get(lit.atom.pred)
                for e in envs:
                    if tuple(_value(t, e) for t in lit.atom.terms) not in rel:
                        nxt.append(e)
            elif isinstance(lit, Comparison):
                for e in envs:
                    l_bound = not isinstance(lit.lhs, Var) or lit.lhs.name in e
                    r_bound = not isinstance(lit.rhs, Var) or lit.rhs.name in e
                    if l_bound and r_bound:
                        if compare(_value(lit.lhs, e), lit.op, _value(lit.rhs, e)):
                            nxt.append(e)
                    else:  # binding equality
                        ne = dict(e)
                        if l_bound:
                            ne[lit.rhs.name] = _value(lit.lhs, e)
                        else:
                            ne[lit.lhs.name] = _value(lit.rhs, e)
                        nxt.append(ne)
            elif isinstance(lit, Arith):
                for e in envs:
                    v = _arith(lit.op, _value(lit.lhs, e), _value(lit.rhs, e))
                    if lit.target.name in e:
                        if compare(e[lit.target.name], "=", v):
                            nxt.append(e)
                    else:
                        ne = dict(e)
                        ne[lit.target.name] = v
                        nxt.append(ne)
            elif isinstance(lit, Aggregate):
                for e in envs:
                    v = self._aggregate(plan.rule, idx, e)
                    if v is None:
                        continue
                    if lit.result.name in e:
                        if compare(e[lit.result.name], "=", v):
                            nxt.append(e)
                    else:
                        ne = dict(e)
                        ne[lit.result.name] = v
                        nxt.append(ne)
            envs = nxt
            if not envs:
                return iter(())
        return iter(envs)

    def _aggregate(self, rule: Rule, idx: int, env: dict) -> Value | None:
        key = (rule, idx)
        cached = self.agg_plans.get(key)
        if cached is None:
            agg = rule.body[idx]
            # wildcards become fresh local variables so every matching row counts
            counter = 0
            body = []
            for b in agg.body:
                if isinstance(b, Atom):
                    terms = []
                    for t in b.terms:
                        if isinstance(t, Wildcard):
                            counter += 1
                            terms.append(Var(f"$w{counter}"))
                        else:
                            terms.append(t)
                    b = Atom(b.pred, tuple(terms))
                body.append(b)
            sub = Rule(Atom("$agg", ()), tuple(body))
            outer = aggregate_outer_vars(rule, idx)
            cached = (_Plan(sub, outer), agg, outer)
            self.agg_plans[key] = cached
        plan, agg, outer = cached
        outer_env = {k: env[k] for k in outer}
        local_vars: set[str] = set()
        for b in plan.rule.body:
            if isinstance(b, Atom):
                local_vars |= {t.name for t in b.terms if isinstance(t, Var)}
            elif isinstance(b, Comparison):
                local_vars |= {t.name for t in (b.lhs, b.rhs) if isinstance(t, Var)}
        names = sorted(local_vars)
        rows: dict[tuple, dict] = {}
        for sol in self._solve(plan, outer_env, None, None, plan.rule):
            rows.setdefault(tuple((type(sol[n]).__name__, sol[n]) for n in names), sol)
        if agg.func == "count":
            return len(rows)
        values = [_value(agg.target, sol) for sol in rows.values()]
        if agg.func == "sum":
            total = 0
            for v in values:
                total = _arith("+", total, v)
            return total
        if not values:
            return None
        if len({type(v) for v in values}) > 1:
            raise EvaluationError(f"{agg.func} over mixed numbers and symbols")
        return min(values) if agg.func == "min" else max(values)


def _prepare(prog: Program, db: Mapping[str, Iterable[tuple]]) -> dict[str, set[tuple]]:
    diags = check_program(prog)
    if has_errors(diags):
        raise EvaluationError("program is not well-formed: " + "; ".join(d.message for d in diags if d.severity == "error"))
    rels: dict[str, set[tuple]] = {}
    for decl in prog.decls:
        if decl.kind == "EDB":
            tuples = set(db.get(decl.name, ()))
            for t in tuples:
                if len(t) != decl.arity:
                    raise ArityMismatch(f"{decl.name} expects {decl.arity} values, got tuple {t!r}")
            rels[decl.name] = tuples
        else:
            rels[decl.name] = set()
    return rels


def _strata(prog: Program) -> list[list[Rule]]:
    strat = stratify(prog)
    out = []
    for layer in strat.strata[1:]:
        out.append([r for r in prog.rules if r.head.pred in layer])
    return out


def evaluate(prog: Program, db: Mapping[str, Iterable[tuple]], trace: list | None = None) -> tuple[Database, EvalStats]:
    """Semi-naive, stratum-by-stratum least fixpoint.

    ``trace``, if given, receives ``(stratum, iteration, {pred: size})`` after
    every iteration.
    """
    rels = _Relations(_prepare(prog, db))
    engine = _Engine(prog, rels)
    stats = EvalStats()
    for s_idx, rules in enumerate(_strata(prog)):
        layer = {r.head.pred for r in rules}
        delta: dict[str, set[tuple]] = {}
        for rule in rules:
            new = engine.fire(rule) - rels.get(rule.head.pred)
            delta.setdefault(rule.head.pred, set()).update(new)
        for pred, new in delta.items():
            rels.add(pred, new)
        iterations = 1
        if trace is not None:
            trace.append((s_idx, iterations, {p: len(rels.get(p)) for p in layer}))
        recursive = [
            (rule, [i for i, lit in enumerate(rule.body) if isinstance(lit, Atom) and lit.pred in layer]) for rule in rules
        ]
        recursive = [(r, pos) for r, pos in recursive if pos]
        while any(delta.values()) and recursive:
            nxt: dict[str, set[tuple]] = {}
            for rule, positions in recursive:
                for i in positions:
                    d = delta.get(rule.body[i].pred)
                    if not d:
                        continue
                    new = engine.fire(rule, i, d) - rels.get(rule.head.pred)
                    if new:
                        nxt.setdefault(rule.head.pred, set()).update(new)
            for pred, new in nxt.items():
                rels.add(pred, new)
            delta = nxt
            iterations += 1
            if trace is not None:
                trace.append((s_idx, iterations, {p: len(rels.get(p)) for p in layer}))
        stats.iterations.append(iterations)
    result = {name: set(tuples) for name, tuples in rels.rels.items()}
    stats.derived_tuple_count = sum(len(result.get(d.name, ())) for d in prog.idb_decls)
    return result, stats


def evaluate_naive(prog: Program, db: Mapping[str, Iterable[tuple]]) -> Database:
    """Plain naive iteration; a cross-check for :func:`evaluate`."""
    rels = _Relations(_prepare(prog, db))
    engine = _Engine(prog, rels)
    for rules in _strata(prog):
        changed = True
        while changed:
            changed = False
            derived = [(r.head.pred, engine.fire(r)) for r in rules]
            for pred, tuples in derived:
                new = tuples - rels.get(pred)
                if new:
                    rels.add(pred, new)
                    changed = True
    return {name: set(tuples) for name, tuples in rels.rels.items()}


def is_fixpoint(prog: Program, db: Mapping[str, set[tuple]]) -> bool:
    """True if applying every rule once to ``db`` derives nothing new."""
    rels = _Relations({k: set(v) for k, v in db.items()})
    engine = _Engine(prog, rels)
    return all(engine.fire(r) <= rels.get(r.head.pred) for r in prog.rules)


def sort_key(t: tuple) -> tuple:
    return tuple((0, v) if isinstance(v, int) else (1, v) for v in t)


def query_output(prog: Program, db: Mapping[str, set[tuple]]) -> dict[str, list[tuple]]:
    return {o: sorted(db.get(o, ()), key=sort_key) for o in prog.outputs}


def format_output(outputs: Mapping[str, list[tuple]]) -> str:
    lines = []
    for pred, tuples in outputs.items():
        for t in tuples:
            lines.append("\t".join([pred, *(str(v) for v in t)]))
    return "\n".join(lines) + ("\n" if lines else "")


def load_facts_csv(directory: str | os.PathLike, decls: Iterable, delimiter: str = "\t") -> Database:
    """Read ``<EDB>.facts`` for every declaration; a missing file is an empty relation.

    ``decls`` may be a DlSchema, a Program, or any iterable of objects with
    ``name`` and ``columns``.
    """
    if hasattr(decls, "edbs"):
        decls = decls.edbs
    elif isinstance(decls, Program):
        decls = decls.edb_decls
    db: Database = {}
    for decl in decls:
        path = os.path.join(directory, f"{decl.name}.facts")
        tuples: set[tuple] = set()
        if os.path.exists(path):
            with open(path, newline="", encoding="utf-8") as fh:
                reader = csv.reader(fh, delimiter=delimiter, quoting=csv.QUOTE_NONE)
                for row_no, row in enumerate(reader, start=1):
                    if not row or row == [""]:
                        continue
                    if len(row) != len(decl.columns):
                        raise ArityMismatch(
                            f"{path}: row {row_no} has {len(row)} values, {decl.name} expects {len(decl.columns)}",
                            line=row_no,
                        )
                    values: list[Value] = []
                    for col_no, (raw, (cname, ctype)) in enumerate(zip(row, decl.columns), start=1):
                        if ctype == "number":
                            try:
                                values.append(_check_int(int(raw.strip())))
                            except (ValueError, ArithmeticOverflow):
                                raise FactParseError(
                                    f"{path}: row {row_no}, column {col_no} ({cname}): {raw!r} is not a 64-bit integer",
                                    line=row_no,
                                    column=col_no,
                                ) from None
                        else:
                            values.append(raw)
                    tuples.add(tuple(values))
        db[decl.name] = tuples
    return db


__all__ = [
    "Database",
    "EvalStats",
    "compare",
    "evaluate",
    "evaluate_naive",
    "format_output",
    "is_fixpoint",
    "load_facts_csv",
    "query_output",
    "sort_key",
]
