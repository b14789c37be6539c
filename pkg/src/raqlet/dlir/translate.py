"""PGIR -> DLIR translation.

Each PGIR clause becomes one rule whose head carries the variables live after
that clause: ``Match1``, ``Match2``, ..., ``Where1``, ``Return``.  Each rule
consumes the previous rule's head atom, so the rules form a chain.  Node and
edge patterns become atoms over the EDBs of the DL-Schema.  Variable-length
edges get a helper recursive predicate ``Star{k}``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..cypher.ast import AggregateCall, Literal as CyLiteral, PropertyAccess, VariableRef
from ..diagnostics import has_errors
from ..errors import InvariantViolation, UnsupportedStarBounds
from ..pgir import Match, PgirEdgePattern, PgirNodePattern, PgirQuery, Return, Where
from ..schema import DlSchema, EdbDecl, upper_snake
from .ir import (
    WILDCARD,
    Aggregate,
    Arith,
    Atom,
    Comparison,
    Const,
    PredicateDecl,
    Program,
    Rule,
    Term,
    Var,
    edb_decls_from_schema,
    fresh_name,
)
from .wellformed import check_program

_OPS = {"=": "=", "<>": "!=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}

# identifiers Souffle reserves; never used as variable or column names
_RESERVED = {
    "count", "sum", "min", "max", "mean", "range", "match", "contains", "cat", "ord", "strlen",
    "substr", "to_number", "to_string", "nil", "true", "false", "as", "band", "bor", "bxor",
    "bnot", "bshl", "bshr", "land", "lor", "lnot", "number", "symbol",
}


@dataclass
class _VarInfo:
    kind: str  # node | edge
    edb: EdbDecl
    star: bool = False
    source: str | None = None
    target: str | None = None


@dataclass
class _RuleCtx:
    """Per-rule bookkeeping for property-access atoms."""

    taken: set[str]
    atoms: dict[str, list[Term]] = field(default_factory=dict)
    extra: list = field(default_factory=list)  # comparisons / bindings, in order


def sanitize(name: str) -> str:
    out = re.sub(r"\W+", "_", name).strip("_") or "col"
    if out[0].isdigit():
        out = "c_" + out
    if out in _RESERVED:
        out += "_"
    return out


def translate_pgir_to_dlir(p: PgirQuery, d: DlSchema) -> Program:
    return _Translator(p, d).run()


class _Translator:
    def __init__(self, p: PgirQuery, d: DlSchema):
        self.p = p
        self.d = d
        self.info: dict[str, _VarInfo] = {}
        self.idb_decls: list[PredicateDecl] = []
        self.rules: list[Rule] = []
        self.star_cache: dict[tuple, PredicateDecl] = {}
        self.names = {e.name for e in d.edbs}
        self.pattern_vars = set(p.variables())
        self.alias_vars = {sanitize(i.alias) for c in p.clauses if isinstance(c, Return) for i in c.items}
        self.global_vars = self.pattern_vars | self.alias_vars

    # naming -------------------------------------------------------------
    def _pred_name(self, base: str) -> str:
        name = fresh_name(base, self.names)
        self.names.add(name)
        return name

    def _add_idb(self, base: str, columns: list[tuple[str, str]]) -> PredicateDecl:
        decl = PredicateDecl(self._pred_name(base), tuple(columns), "IDB")
        self.idb_decls.append(decl)
        return decl

    # driver -------------------------------------------------------------
    def run(self) -> Program:
        prev: Atom | None = None
        live: list[str] = []
        n_match = n_where = 0
        for pos, clause in enumerate(self.p.clauses):
            if isinstance(clause, Match):
                n_match += 1
                prev, live = self._match(clause, n_match, prev, live, self.p.binding_order[pos])
            elif isinstance(clause, Where):
                n_where += 1
                prev = self._where(clause, n_where, prev, live)
            elif isinstance(clause, Return):
                out = self._return(clause, prev, live)
        prog = Program(tuple(edb_decls_from_schema(self.d)) + tuple(self.idb_decls), tuple(self.rules), (out,))
        diags = check_program(prog)
        if has_errors(diags):
            raise InvariantViolation("translation produced an ill-formed program: " + "; ".join(x.message for x in diags))
        return prog

    def _edge_edb(self, pat: PgirEdgePattern) -> EdbDecl:
        name = f"{pat.source.node_label}_{upper_snake(pat.edge_label)}_{pat.target.node_label}"
        edb = self.d.get(name)
        if edb is None or edb.origin.kind != "edge":
            raise InvariantViolation(f"no edge EDB {name}; was the PGIR validated?")
        return edb

    def _node_edb(self, label: str) -> EdbDecl:
        try:
            return self.d.for_node(label)
        except KeyError:
            raise InvariantViolation(f"no node EDB {label}; was the PGIR validated?") from None

    def _materialized(self, var: str) -> bool:
        info = self.info.get(var)
        if info is None:
            return False
        if info.kind == "node":
            return True
        return not info.star and "id" in dict(info.edb.columns)

    # clauses ------------------------------------------------------------
    def _match(self, clause: Match, k: int, prev: Atom | None, live: list[str], order: tuple[str, ...]):
        body: list = [prev] if prev is not None else []
        taken = set(self.global_vars)
        bound = set(live)
        new_nodes: list[str] = []
        filters: list = []

        def see_node(n: PgirNodePattern) -> None:
            if n.node_var not in self.info:
                self.info[n.node_var] = _VarInfo("node", self._node_edb(n.node_label))
            if n.node_var not in bound and n.node_var not in new_nodes:
                new_nodes.append(n.node_var)

        for pat in clause.patterns:
            if isinstance(pat, PgirNodePattern):
                see_node(pat)
                continue
            edb = self._edge_edb(pat)
            see_node(pat.source)
            see_node(pat.target)
            src, tgt = Var(pat.source.node_var), Var(pat.target.node_var)
            if pat.length is None:
                self.info[pat.edge_var] = _VarInfo("edge", edb, False, src.name, tgt.name)
                body.append(self._edge_atom(edb, src, tgt, Var(pat.edge_var)))
                continue
            self.info[pat.edge_var] = _VarInfo("edge", edb, True, src.name, tgt.name)
            star = self._star(edb, pat.length.min, pat.length.max)
            if pat.length.max is None:
                body.append(Atom(star.name, (src, tgt)))
            else:
                depth = Var(fresh_name("d", taken))
                taken.add(depth.name)
                body.append(Atom(star.name, (src, tgt, depth)))
                filters.append(Comparison(depth, ">=", Const(pat.length.min)))
        for v in new_nodes:
            body.append(self._node_atom(self.info[v].edb, {0: Var(v)}))
        body.extend(filters)

        head_vars = [v for v in order if self._materialized(v)]
        decl = self._add_idb(f"Match{k}", [(v, "number") for v in head_vars])
        head = Atom(decl.name, tuple(Var(v) for v in head_vars))
        self.rules.append(Rule(head, tuple(body)))
        return head, head_vars

    def _where(self, clause: Where, k: int, prev: Atom, live: list[str]) -> Atom:
        ctx = _RuleCtx(set(self.global_vars))
        for c in clause.conjuncts:
            lhs = self._operand(c.left, ctx)
            rhs = self._operand(c.right, ctx)
            ctx.extra.append(Comparison(lhs, _OPS[c.op], rhs))
        decl = self._add_idb(f"Where{k}", [(v, "number") for v in live])
        head = Atom(decl.name, prev.terms)
        self.rules.append(Rule(head, (prev, *self._ctx_atoms(ctx), *ctx.extra)))
        return head

    def _return(self, clause: Return, prev: Atom, live: list[str]) -> str:
        ctx = _RuleCtx(set(self.global_vars))
        head_vars: list[str] = []
        columns: list[tuple[str, str]] = []
        aggs: list[tuple[int, AggregateCall, Term | None, str]] = []
        col_names: set[str] = set()
        for item in clause.items:
            col = fresh_name(sanitize(item.alias), col_names)
            col_names.add(col)
            if isinstance(item.expr, AggregateCall):
                # count ranges over matched rows, so only sum/min/max need their argument
                target = None if item.expr.func == "count" else self._operand(item.expr.arg, ctx)
                ty = "number" if item.expr.func in ("count", "sum") else self._operand_type(item.expr.arg)
                aggs.append((len(head_vars), item.expr, target, col))
                head_vars.append("")  # placeholder, filled by the aggregate rule
                columns.append((col, ty))
                continue
            var = self._bind_item(item.expr, sanitize(item.alias), ctx, head_vars)
            head_vars.append(var)
            columns.append((col, self._operand_type(item.expr)))
        body = (prev, *self._ctx_atoms(ctx), *ctx.extra)

        if not aggs:
            decl = self._add_idb("Return", columns)
            self.rules.append(Rule(Atom(decl.name, tuple(Var(v) for v in head_vars)), body))
            return decl.name

        # project every group key, the matched row and every aggregate target
        proj_vars: list[str] = []
        for v in [v for v in head_vars if v] + list(live) + [t.name for _, _, t, _ in aggs if isinstance(t, Var)]:
            if v not in proj_vars:
                proj_vars.append(v)
        types = dict(zip(head_vars, (t for _, t in columns)))
        proj_cols = [(v, types.get(v, self._var_type(v, ctx))) for v in proj_vars]
        proj = self._add_idb("Project", proj_cols)
        self.rules.append(Rule(Atom(proj.name, tuple(Var(v) for v in proj_vars)), body))

        group = [v for v in head_vars if v]
        taken = set(proj_vars) | self.pattern_vars
        outer = Atom(proj.name, tuple(Var(v) if v in group else WILDCARD for v in proj_vars))
        ret_body: list = [outer] if group else []
        final_vars = list(head_vars)
        for pos, call, target, col in aggs:
            result = fresh_name(col, taken)
            taken.add(result)
            final_vars[pos] = result
            inner_target = None
            terms: list[Term] = []
            for v in proj_vars:
                if v in group:
                    terms.append(Var(v))
                elif isinstance(target, Var) and v == target.name and inner_target is None:
                    inner_target = Var(fresh_name(f"{v}_t", taken))
                    taken.add(inner_target.name)
                    terms.append(inner_target)
                else:
                    terms.append(WILDCARD)
            ret_body.append(Aggregate(Var(result), call.func, inner_target, (Atom(proj.name, tuple(terms)),)))
        decl = self._add_idb("Return", columns)
        self.rules.append(Rule(Atom(decl.name, tuple(Var(v) for v in final_vars)), tuple(ret_body)))
        return decl.name

    # items and operands ---------------------------------------------------
    def _bind_item(self, expr, alias: str, ctx: _RuleCtx, head_vars: list[str]) -> str:
        used = set(head_vars)
        # names an alias variable must avoid: pattern variables, generated names, earlier head variables
        blocked = (ctx.taken - self.alias_vars) | self.pattern_vars | used
        if isinstance(expr, CyLiteral):
            var = fresh_name(alias, blocked)
            ctx.taken.add(var)
            ctx.extra.append(Comparison(Var(var), "=", Const(expr.value)))
            return var
        if isinstance(expr, PropertyAccess) and expr.prop != "id" and alias not in blocked:
            info = self.info[expr.var]
            terms = self._atom_for(expr.var, ctx)
            idx = info.edb.column_index(expr.prop)
            if terms[idx] is WILDCARD:
                terms[idx] = Var(alias)
                ctx.taken.add(alias)
                return alias
        term = self._operand(expr, ctx)
        if isinstance(term, Var) and term.name == alias and alias not in used:
            return alias
        var = fresh_name(alias, blocked | ctx.taken - self.alias_vars)
        ctx.taken.add(var)
        ctx.extra.append(Comparison(term, "=", Var(var)))
        return var

    def _operand(self, expr, ctx: _RuleCtx) -> Term:
        if isinstance(expr, CyLiteral):
            return Const(expr.value)
        if isinstance(expr, VariableRef):
            self._atom_for(expr.var, ctx)
            return Var(expr.var)
        if isinstance(expr, PropertyAccess):
            info = self.info[expr.var]
            terms = self._atom_for(expr.var, ctx)
            if expr.prop == "id" and (info.kind == "node" or not info.star):
                if info.kind == "node":
                    return Var(expr.var)
                return terms[info.edb.column_index("id")]
            idx = info.edb.column_index(expr.prop)
            if terms[idx] is WILDCARD:
                name = fresh_name(sanitize(f"{expr.var}_{expr.prop}"), ctx.taken)
                ctx.taken.add(name)
                terms[idx] = Var(name)
            return terms[idx]
        raise InvariantViolation(f"unexpected operand {expr!r}")

    def _atom_for(self, var: str, ctx: _RuleCtx) -> list[Term]:
        if var not in ctx.atoms:
            info = self.info[var]
            terms: list[Term] = [WILDCARD] * info.edb.arity
            if info.kind == "node":
                terms[0] = Var(var)
            else:
                terms[0], terms[1] = Var(info.source), Var(info.target)
                terms[info.edb.column_index("id")] = Var(var)
            ctx.atoms[var] = terms
        return ctx.atoms[var]

    def _ctx_atoms(self, ctx: _RuleCtx) -> list[Atom]:
        return [Atom(self.info[v].edb.name, tuple(ts)) for v, ts in ctx.atoms.items()]

    def _operand_type(self, expr) -> str:
        if isinstance(expr, CyLiteral):
            return "symbol" if isinstance(expr.value, str) else "number"
        if isinstance(expr, VariableRef):
            return "number"
        info = self.info[expr.var]
        return dict(info.edb.columns)[expr.prop]

    def _var_type(self, var: str, ctx: _RuleCtx) -> str:
        for v, terms in ctx.atoms.items():
            for (_, ty), t in zip(self.info[v].edb.columns, terms):
                if t == Var(var):
                    return ty
        for lit in ctx.extra:
            if isinstance(lit, Comparison) and Var(var) in (lit.lhs, lit.rhs):
                other = lit.rhs if lit.lhs == Var(var) else lit.lhs
                if isinstance(other, Const) and isinstance(other.value, str):
                    return "symbol"
        return "number"

    # atoms ----------------------------------------------------------------
    def _edge_atom(self, edb: EdbDecl, src: Term, tgt: Term, evar: Term | None) -> Atom:
        terms: list[Term] = [WILDCARD] * edb.arity
        terms[0], terms[1] = src, tgt
        if evar is not None and "id" in dict(edb.columns):
            terms[edb.column_index("id")] = evar
        return Atom(edb.name, tuple(terms))

    def _node_atom(self, edb: EdbDecl, fixed: dict[int, Term]) -> Atom:
        return Atom(edb.name, tuple(fixed.get(i, WILDCARD) for i in range(edb.arity)))

    def _star(self, edb: EdbDecl, lo: int, hi: int | None) -> PredicateDecl:
        if hi is None and lo > 1:
            raise UnsupportedStarBounds(f"*{lo}.. without an upper bound is not supported")
        if lo < 1 or (hi is not None and lo > hi):
            raise UnsupportedStarBounds(f"unsupported star bounds *{lo}..{hi}")
        key = (edb.name, hi)
        if key in self.star_cache:
            return self.star_cache[key]
        x, y, z = Var("x"), Var("y"), Var("z")
        k = sum(1 for dcl in self.idb_decls if dcl.name.startswith("Star")) + 1
        if hi is None:
            decl = self._add_idb(f"Star{k}", [("x", "number"), ("y", "number")])
            self.rules.append(Rule(Atom(decl.name, (x, y)), (self._edge_atom(edb, x, y, None),)))
            self.rules.append(
                Rule(Atom(decl.name, (x, y)), (Atom(decl.name, (x, z)), self._edge_atom(edb, z, y, None)))
            )
        else:
            dv, d0 = Var("d"), Var("d0")
            decl = self._add_idb(f"Star{k}", [("x", "number"), ("y", "number"), ("d", "number")])
            self.rules.append(
                Rule(Atom(decl.name, (x, y, dv)), (self._edge_atom(edb, x, y, None), Comparison(dv, "=", Const(1))))
            )
            self.rules.append(
                Rule(
                    Atom(decl.name, (x, y, dv)),
                    (
                        Atom(decl.name, (x, z, d0)),
                        self._edge_atom(edb, z, y, None),
                        Arith(dv, d0, "+", Const(1)),
                        Comparison(dv, "<=", Const(hi)),
                    ),
                )
            )
        self.star_cache[key] = decl
        return decl
