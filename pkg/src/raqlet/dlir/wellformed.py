"""Binding analysis and structural checks for DLIR programs."""

from __future__ import annotations

from ..diagnostics import Diagnostic, error
from .ir import (
    Aggregate,
    Arith,
    Atom,
    Comparison,
    Const,
    Literal,
    Negation,
    Program,
    Rule,
    Term,
    Var,
    Wildcard,
    aggregate_outer_vars,
    literal_vars,
)


def _is_bound(t: Term, bound: set[str]) -> bool:
    return isinstance(t, Const) or (isinstance(t, Var) and t.name in bound)


def evaluable(rule: Rule, index: int, bound: set[str]) -> bool:
    lit = rule.body[index]
    if isinstance(lit, Atom):
        return True
    if isinstance(lit, Negation):
        return literal_vars(lit) <= bound
    if isinstance(lit, Comparison):
        lb, rb = _is_bound(lit.lhs, bound), _is_bound(lit.rhs, bound)
        if lb and rb:
            return True
        if lit.op == "=" and (lb or rb):
            other = lit.rhs if lb else lit.lhs
            return isinstance(other, Var)
        return False
    if isinstance(lit, Arith):
        return _is_bound(lit.lhs, bound) and _is_bound(lit.rhs, bound)
    if isinstance(lit, Aggregate):
        return aggregate_outer_vars(rule, index) <= bound
    raise TypeError(lit)


def binds(lit: Literal) -> set[str]:
    """Variables a literal binds once evaluated."""
    if isinstance(lit, (Atom, Comparison)):
        return literal_vars(lit)
    if isinstance(lit, Arith):
        return {lit.target.name}
    if isinstance(lit, Aggregate):
        return {lit.result.name}
    return set()


def schedule(rule: Rule, bound: set[str] | None = None) -> tuple[list[int], set[str], list[int]]:
    """Order body literals for left-to-right evaluation.

    Picks the first evaluable literal in written order each step. Returns the
    evaluation order, the variables bound at the end, and the indices that
    could never be evaluated.
    """
    bound = set(bound or ())
    pending = list(range(len(rule.body)))
    order: list[int] = []
    progress = True
    while pending and progress:
        progress = False
        for pos, idx in enumerate(pending):
            if evaluable(rule, idx, bound):
                order.append(idx)
                bound |= binds(rule.body[idx])
                del pending[pos]
                progress = True
                break
    return order, bound, pending


def check_rule(rule: Rule, prog: Program) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    locus = rule.head.pred
    head_decl = prog.decl(rule.head.pred)
    if head_decl is not None and head_decl.kind == "EDB":
        diags.append(error("RULE_FOR_EDB", f"rule defines EDB predicate {rule.head.pred}", locus))
    for t in rule.head.terms:
        if isinstance(t, Wildcard):
            diags.append(error("WILDCARD_MISPLACED", f"wildcard in head of {rule}", locus))

    atoms: list[tuple[Atom, str]] = [(rule.head, "head")]
    for lit in rule.body:
        if isinstance(lit, Atom):
            atoms.append((lit, "positive"))
        elif isinstance(lit, Negation):
            atoms.append((lit.atom, "negated"))
        elif isinstance(lit, Aggregate):
            for b in lit.body:
                if isinstance(b, Atom):
                    atoms.append((b, "aggregate"))
                elif not isinstance(b, Comparison):
                    diags.append(error("INVALID_AGGREGATE", f"aggregate bodies hold atoms and comparisons only: {lit}", locus))
            if lit.func != "count" and lit.target is None:
                diags.append(error("INVALID_AGGREGATE", f"{lit.func} needs a target term", locus))
            inner = set().union(*(literal_vars(b) for b in lit.body)) if lit.body else set()
            if isinstance(lit.target, Var) and lit.target.name not in inner:
                diags.append(error("INVALID_AGGREGATE", f"aggregate target {lit.target} does not occur in its body", locus))
            if lit.result.name in inner:
                diags.append(error("INVALID_AGGREGATE", f"aggregate result {lit.result} occurs in its own body", locus))
        if isinstance(lit, (Comparison, Arith)):
            terms = [lit.lhs, lit.rhs] + ([lit.target] if isinstance(lit, Arith) else [])
            if any(isinstance(t, Wildcard) for t in terms):
                diags.append(error("WILDCARD_MISPLACED", f"wildcard in {lit}", locus))

    for atom, role in atoms:
        decl = prog.decl(atom.pred)
        if decl is None:
            diags.append(error("UNDECLARED_PREDICATE", f"predicate {atom.pred} is not declared", atom.pred))
        elif decl.arity != atom.arity:
            diags.append(
                error("ARITY_MISMATCH", f"{atom.pred} has arity {decl.arity} but is used with {atom.arity}", atom.pred)
            )
        if role == "negated" and any(isinstance(t, Wildcard) for t in atom.terms):
            diags.append(error("WILDCARD_MISPLACED", f"wildcard in negated atom {atom}", locus))

    _, bound, stuck = schedule(rule)
    for idx in stuck:
        diags.append(error("UNSAFE_VARIABLE", f"literal {rule.body[idx]} uses unbound variables in {rule}", locus))
    missing = literal_vars(rule.head) - bound
    if missing:
        diags.append(
            error("RANGE_RESTRICTION", f"head variables {sorted(missing)} are not bound in {rule}", locus)
        )
    return diags


def check_program(prog: Program) -> list[Diagnostic]:
    diags: list[Diagnostic] = []
    seen: set[str] = set()
    for d in prog.decls:
        if d.name in seen:
            diags.append(error("DUPLICATE_DECL", f"predicate {d.name} declared twice", d.name))
        seen.add(d.name)
        cols = d.column_names
        if len(set(cols)) != len(cols):
            diags.append(error("DUPLICATE_COLUMN", f"predicate {d.name} repeats a column name", d.name))
    for rule in prog.rules:
        diags.extend(check_rule(rule, prog))
    for out in prog.outputs:
        decl = prog.decl(out)
        if decl is None or decl.kind != "IDB":
            diags.append(error("UNKNOWN_OUTPUT", f"output {out} is not a declared IDB", out))
    if len(set(prog.outputs)) != len(prog.outputs):
        diags.append(error("UNKNOWN_OUTPUT", "an output is listed twice"))
    return diags
