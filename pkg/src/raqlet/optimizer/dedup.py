"""Self-join elimination inside rule bodies."""

from __future__ import annotations

from ..dlir.ir import Atom, Program, Rule, Term, Var, Wildcard


def _merge(a: Atom, b: Atom) -> Atom | None:
    terms: list[Term] = []
    for x, y in zip(a.terms, b.terms):
        if x == y or isinstance(y, Wildcard):
            terms.append(x)
        elif isinstance(x, Wildcard):
            terms.append(y)
        else:
            return None
    return Atom(a.pred, tuple(terms))


def _dedup_rule(rule: Rule, prog: Program) -> Rule:
    body = list(rule.body)
    changed = True
    while changed:
        changed = False
        for i in range(len(body)):
            a = body[i]
            if not isinstance(a, Atom):
                continue
            for j in range(i + 1, len(body)):
                b = body[j]
                if not isinstance(b, Atom) or b.pred != a.pred:
                    continue
                if a == b:
                    merged = a
                else:
                    decl = prog.decl(a.pred)
                    # node ids are keys: two rows with the same id are the same row
                    keyed = decl is not None and decl.is_node and isinstance(a.terms[0], Var) and a.terms[0] == b.terms[0]
                    merged = _merge(a, b) if keyed else None
                if merged is not None:
                    body[i] = merged
                    del body[j]
                    changed = True
                    break
            if changed:
                break
    return Rule(rule.head, tuple(body))


def deduplicate_atoms(prog: Program) -> Program:
    return prog.with_rules(_dedup_rule(r, prog) for r in prog.rules)
