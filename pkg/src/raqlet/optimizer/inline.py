"""Inlining of single-rule, non-recursive IDB predicates."""

from __future__ import annotations

from ..analysis import classify_recursion
from ..dlir.ir import Aggregate, Atom, Comparison, Const, Negation, Program, Rule, Term, Var, Wildcard, rename_apart, rule_vars, substitute


def _inlinable(prog: Program) -> dict[str, Rule]:
    report = classify_recursion(prog)
    recursive = {p for r in report.recursive for p in r.predicates}
    out: dict[str, Rule] = {}
    for decl in prog.idb_decls:
        rules = prog.rules_for(decl.name)
        if len(rules) != 1 or decl.name in recursive:
            continue
        rule = rules[0]
        if any(isinstance(lit, (Negation, Aggregate)) for lit in rule.body):
            continue
        out[decl.name] = rule
    return out


def unfold(host: Rule, index: int, callee: Rule) -> Rule | None:
    """Replace ``host.body[index]`` by the body of ``callee``; None if the two heads cannot unify."""
    call = host.body[index]
    callee, _ = rename_apart(callee, rule_vars(host))
    sub: dict[str, Term] = {}
    extra: list[Comparison] = []
    for formal, actual in zip(callee.head.terms, call.terms):
        if isinstance(formal, Var):
            if formal.name in sub:
                if not isinstance(actual, Wildcard):
                    extra.append(Comparison(sub[formal.name], "=", actual))
            elif isinstance(actual, Var):
                sub[formal.name] = actual
            elif isinstance(actual, Const):
                sub[formal.name] = formal
                extra.append(Comparison(formal, "=", actual))
            else:
                sub[formal.name] = formal  # wildcard actual: the renamed variable stays local
        elif isinstance(formal, Const):
            if isinstance(actual, Var):
                extra.append(Comparison(actual, "=", formal))
            elif isinstance(actual, Const) and actual != formal:
                return None
    # substitution only ever maps variables to variables
    body = [substitute(lit, sub) for lit in callee.body] + [substitute(c, sub) for c in extra]
    return Rule(host.head, host.body[:index] + tuple(body) + host.body[index + 1 :])


def inline_rules(prog: Program) -> Program:
    defs = _inlinable(prog)
    rules: list[Rule] = []
    for rule in prog.rules:
        current: Rule | None = rule
        while current is not None:
            idx = next(
                (i for i, lit in enumerate(current.body) if isinstance(lit, Atom) and lit.pred in defs),
                None,
            )
            if idx is None:
                break
            current = unfold(current, idx, defs[current.body[idx].pred])
        if current is not None:
            rules.append(current)
    return prog.with_rules(rules)
