"""SQL emission: one common table expression per IDB predicate."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..analysis import check_backend_compat
from ..diagnostics import error, has_errors
from ..dlir.depgraph import build_dependency_graph
from ..dlir.ir import (
    Aggregate,
    Arith,
    Atom,
    Comparison,
    Const,
    Negation,
    PredicateDecl,
    Program,
    Rule,
    Term,
    Var,
    Wildcard,
    add_schema_decls,
    edb_decls_from_schema,
    literal_vars,
)
from ..dlir.wellformed import schedule
from ..errors import BackendIncompatible, InvariantViolation
from ..schema import DlSchema

# words that cannot appear unquoted as a table or column name in either engine
_RESERVED = frozenset(
    """all and any as asc between by case cast check collate column constraint create cross current_date
    current_time current_timestamp default delete desc distinct drop else end except exists false fetch for
    foreign from full group having in inner insert intersect into is join left like limit natural not null
    offset on or order outer primary references right select table then to true union unique update user
    using values when where window with""".split()
)


@dataclass(frozen=True)
class SqlDialect:
    name: str
    types: dict[str, str] = field(hash=False)
    quote_mixed_case: bool = False  # engines that fold unquoted names to lower case

    def ident(self, name: str) -> str:
        if name.lower() in _RESERVED or (self.quote_mixed_case and name != name.lower()):
            return '"' + name.replace('"', '""') + '"'
        return name

    def type_of(self, column_type: str) -> str:
        return self.types[column_type]


DUCKDB = SqlDialect("duckdb", {"number": "BIGINT", "symbol": "VARCHAR"})
POSTGRES = SqlDialect("postgres", {"number": "BIGINT", "symbol": "VARCHAR"}, quote_mixed_case=True)
DIALECTS = {"duckdb": DUCKDB, "postgres": POSTGRES}


def get_dialect(dialect: str | SqlDialect) -> SqlDialect:
    if isinstance(dialect, SqlDialect):
        return dialect
    try:
        return DIALECTS[dialect]
    except KeyError:
        raise ValueError(f"unknown SQL dialect {dialect!r}; expected one of {', '.join(DIALECTS)}") from None


def sql_literal(value: int | str) -> str:
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return str(value)


_SQL_OP = {"!=": "<>"}


class _RuleEmitter:
    """Translates one rule body into a SELECT over aliased FROM items."""

    def __init__(self, prog: Program, ctes: dict[str, str], dialect: SqlDialect):
        self.prog = prog
        self.ctes = ctes
        self.dialect = dialect
        self.sub_counter = 0

    def table(self, pred: str) -> str:
        return self.ctes[pred] if pred in self.ctes else self.dialect.ident(pred)

    def columns(self, pred: str) -> list[str]:
        return self.prog.decl(pred).column_names

    def expr(self, t: Term, env: dict[str, str]) -> str:
        if isinstance(t, Const):
            return sql_literal(t.value)
        if isinstance(t, Var):
            if t.name not in env:
                raise InvariantViolation(f"variable {t.name} has no SQL column")
            return env[t.name]
        raise InvariantViolation("wildcard used as a value")

    def select(self, rule: Rule, distinct: bool = True) -> list[str]:
        ident = self.dialect.ident
        env: dict[str, str] = {}
        items: list[str] = []
        joins: list[str] = []
        filters: list[str] = []
        counter = 0
        idb_seen: set[str] = set()
        for lit in rule.body:
            if not isinstance(lit, Atom):
                continue
            if lit.pred in self.ctes and lit.pred not in idb_seen:
                idb_seen.add(lit.pred)
                alias = self.ctes[lit.pred]
                items.append(alias)
            else:
                counter += 1
                alias = f"R{counter}"
                items.append(f"{self.table(lit.pred)} AS {alias}")
            for col, t in zip(self.columns(lit.pred), lit.terms):
                ref = f"{alias}.{ident(col)}"
                if isinstance(t, Var):
                    if t.name in env:
                        joins.append(f"({env[t.name]} = {ref})")
                    else:
                        env[t.name] = ref
                elif isinstance(t, Const):
                    joins.append(f"({ref} = {sql_literal(t.value)})")

        order, _, stuck = schedule(rule, set(env))
        if stuck:
            raise InvariantViolation(f"rule cannot be ordered for SQL: {rule}")
        for i in order:
            lit = rule.body[i]
            if isinstance(lit, Atom):
                continue
            if isinstance(lit, Comparison):
                self._comparison(lit, env, filters)
            elif isinstance(lit, Arith):
                value = f"({self.expr(lit.lhs, env)} {lit.op} {self.expr(lit.rhs, env)})"
                self._bind(lit.target, value, env, filters)
            elif isinstance(lit, Negation):
                filters.append(self._not_exists(lit.atom, env))
            elif isinstance(lit, Aggregate):
                value = self._aggregate(lit, env)
                if lit.func in ("min", "max"):
                    filters.append(f"({value} IS NOT NULL)")
                self._bind(lit.result, value, env, filters)

        head_cols = self.columns(rule.head.pred)
        proj = ", ".join(f"{self.expr(t, env)} AS {ident(c)}" for c, t in zip(head_cols, rule.head.terms))
        lines = [f"SELECT {'DISTINCT ' if distinct else ''}{proj}"]
        if items:
            lines.append("FROM " + ", ".join(items))
        conds = filters + joins
        if conds:
            lines.append("WHERE " + " AND ".join(conds))
        return lines

    def _bind(self, var: Var, value: str, env: dict[str, str], filters: list[str]) -> None:
        if var.name in env:
            filters.append(f"({env[var.name]} = {value})")
        else:
            env[var.name] = value

    def _comparison(self, lit: Comparison, env: dict[str, str], out: list[str]) -> None:
        def known(t: Term) -> bool:
            return isinstance(t, Const) or (isinstance(t, Var) and t.name in env)

        if lit.op == "=" and not (known(lit.lhs) and known(lit.rhs)):
            var, other = (lit.rhs, lit.lhs) if known(lit.lhs) else (lit.lhs, lit.rhs)
            env[var.name] = self.expr(other, env)
            return
        op = _SQL_OP.get(lit.op, lit.op)
        out.append(f"({self.expr(lit.lhs, env)} {op} {self.expr(lit.rhs, env)})")

    def _not_exists(self, atom: Atom, env: dict[str, str]) -> str:
        self.sub_counter += 1
        alias = f"N{self.sub_counter}"
        conds = []
        for col, t in zip(self.columns(atom.pred), atom.terms):
            if not isinstance(t, Wildcard):
                conds.append(f"({alias}.{self.dialect.ident(col)} = {self.expr(t, env)})")
        where = f" WHERE {' AND '.join(conds)}" if conds else ""
        return f"NOT EXISTS (SELECT 1 FROM {self.table(atom.pred)} AS {alias}{where})"

    def _aggregate(self, agg: Aggregate, outer: dict[str, str]) -> str:
        """Correlated scalar subquery over the distinct rows matching the aggregate body."""
        self.sub_counter += 1
        k = self.sub_counter
        env = dict(outer)
        cols: list[str] = []
        items: list[str] = []
        conds: list[str] = []
        for j, lit in enumerate(a for a in agg.body if isinstance(a, Atom)):
            alias = f"A{k}_{j + 1}"
            items.append(f"{self.table(lit.pred)} AS {alias}")
            for col, t in zip(self.columns(lit.pred), lit.terms):
                ref = f"{alias}.{self.dialect.ident(col)}"
                if isinstance(t, Var) and t.name in env:
                    conds.append(f"({env[t.name]} = {ref})")
                elif isinstance(t, Const):
                    conds.append(f"({ref} = {sql_literal(t.value)})")
                else:
                    # local variables and wildcards both distinguish rows
                    cols.append(ref)
                    if isinstance(t, Var):
                        env[t.name] = ref
        pending = [b for b in agg.body if isinstance(b, Comparison)]
        while pending:
            for b in pending:
                if literal_vars(b) <= set(env) or (b.op == "=" and len(literal_vars(b) - set(env)) == 1):
                    pending.remove(b)
                    self._comparison(b, env, conds)
                    break
            else:
                raise InvariantViolation(f"aggregate body cannot be ordered: {agg}")
        select = [f"{c} AS c{i + 1}" for i, c in enumerate(cols)]
        if agg.target is not None:
            select.append(f"{self.expr(agg.target, env)} AS t")
        if not select:
            select = ["1 AS c1"]
        inner = f"SELECT DISTINCT {', '.join(select)}"
        if items:
            inner += " FROM " + ", ".join(items)
        if conds:
            inner += " WHERE " + " AND ".join(conds)
        s = f"S{k}"
        func = {
            "count": "COUNT(*)",
            "sum": f"COALESCE(SUM({s}.t), 0)",
            "min": f"MIN({s}.t)",
            "max": f"MAX({s}.t)",
        }[agg.func]
        return f"(SELECT {func} FROM ({inner}) AS {s})"


def _empty_select(decl: PredicateDecl, dialect: SqlDialect) -> list[str]:
    cols = ", ".join(f"CAST(NULL AS {dialect.type_of(t)}) AS {dialect.ident(c)}" for c, t in decl.columns)
    return [f"SELECT {cols}", "WHERE 1 = 0"]


def _needed(prog: Program, output: str) -> set[str]:
    seen = {output}
    todo = [output]
    while todo:
        p = todo.pop()
        for r in prog.rules_for(p):
            for a in r.atoms():
                if a.pred not in seen:
                    seen.add(a.pred)
                    todo.append(a.pred)
    return seen


def _statement(prog: Program, output: str, dialect: SqlDialect) -> str:
    graph = build_dependency_graph(prog)
    needed = _needed(prog, output)
    order = [p for comp in graph.sccs for p in comp if p in needed and not prog.is_edb(p)]
    taken = {d.name.lower() for d in prog.edb_decls}
    ctes: dict[str, str] = {}
    i = 0
    for p in order:
        i += 1
        while f"v{i}" in taken:
            i += 1
        ctes[p] = f"V{i}"

    emitter = _RuleEmitter(prog, ctes, dialect)
    blocks: list[str] = []
    any_recursive = False
    for p in order:
        decl = prog.decl(p)
        if decl is None:
            raise InvariantViolation(f"predicate {p} is not declared")
        rules = prog.rules_for(p)
        base = [r for r in rules if all(a.pred != p for a in r.atoms())]
        step = [r for r in rules if r not in base]
        if step and dialect.name == "postgres" and len(step) > 1:
            diag = error("MULTIPLE_RECURSIVE_ARMS", f"postgres allows one recursive arm; {p} has {len(step)}", p)
            raise BackendIncompatible(diag.message, [diag])
        arms = [emitter.select(r) for r in base] or ([_empty_select(decl, dialect)] if step or not rules else [])
        # UNION already removes duplicates, and some engines reject DISTINCT in the recursive arm
        steps = [emitter.select(r, distinct=False) for r in step]
        if len(steps) > 1:
            # the engine binds `base UNION step`, so several recursive arms form one parenthesized term
            inner = [line for k, arm in enumerate(steps) for line in ([] if k == 0 else ["UNION"]) + [" " + x for x in arm]]
            steps = [["("] + inner + [")"]]
        body = "\n UNION\n".join("\n".join(" " + line for line in arm) for arm in arms + steps)
        name = ctes[p]
        if step:
            any_recursive = True
            name += "(" + ", ".join(dialect.ident(c) for c in decl.column_names) + ")"
        blocks.append(f"{name} AS (\n{body}\n)")
    final = f"SELECT DISTINCT * FROM {ctes[output] if output in ctes else dialect.ident(output)}"
    if not blocks:
        return final
    head = "WITH RECURSIVE " if any_recursive else "WITH "
    return head + ", ".join(blocks) + "\n" + final


def emit_sql(prog: Program, d: DlSchema | None = None, dialect: str | SqlDialect = "duckdb") -> str:
    """SQL text computing each output predicate; one statement per output."""
    dialect = get_dialect(dialect)
    diags = check_backend_compat(prog, "sql")
    if has_errors(diags):
        raise BackendIncompatible("program cannot be expressed in SQL", diags)
    prog = add_schema_decls(prog, d)
    statements = [_statement(prog, out, dialect) for out in prog.outputs]
    if len(statements) == 1:
        return statements[0] + "\n"
    return "".join(s + ";\n" for s in statements)


def emit_sql_ddl(d: DlSchema | Program, dialect: str | SqlDialect = "duckdb") -> str:
    """One CREATE TABLE statement per EDB relation, columns in schema order."""
    dialect = get_dialect(dialect)
    decls = d.edb_decls if isinstance(d, Program) else edb_decls_from_schema(d)
    out = []
    for decl in decls:
        cols = ", ".join(f"{dialect.ident(c)} {dialect.type_of(t)}" for c, t in decl.columns)
        out.append(f"CREATE TABLE {dialect.ident(decl.name)} ({cols});\n")
    return "".join(out)


__all__ = ["DIALECTS", "DUCKDB", "POSTGRES", "SqlDialect", "emit_sql", "emit_sql_ddl", "get_dialect", "sql_literal"]
