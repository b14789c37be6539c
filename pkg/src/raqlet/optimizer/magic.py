"""Magic-set rewriting with left-to-right sideways information passing.

Predicates reachable from the output are adorned with a b/f string per
argument.  An all-free adornment keeps the original predicate name, so the
output predicate is never renamed.  Every adorned rule with a bound argument
is guarded by its magic predicate, and magic rules propagate bindings to the
IDB atoms of the body.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from ..analysis import check_stratification, classify_recursion
from ..diagnostics import Diagnostic, has_errors, info
from ..dlir.depgraph import build_dependency_graph
from ..dlir.ir import (
    Aggregate,
    Arith,
    Atom,
    Comparison,
    Const,
    Literal,
    Negation,
    PredicateDecl,
    Program,
    Rule,
    Var,
    fresh_name,
    literal_vars,
)
from ..dlir.wellformed import check_program


@dataclass(frozen=True)
class MagicResult:
    program: Program
    applied: bool
    diagnostics: tuple[Diagnostic, ...]


def _is_const_eq(lit: Literal) -> bool:
    return (
        isinstance(lit, Comparison)
        and lit.op == "="
        and (
            (isinstance(lit.lhs, Var) and isinstance(lit.rhs, Const))
            or (isinstance(lit.rhs, Var) and isinstance(lit.lhs, Const))
        )
    )


def hoist_constants(rule: Rule) -> Rule:
    """Move ``v = c`` literals to the front so they bind before any scan."""
    first = [lit for lit in rule.body if _is_const_eq(lit)]
    rest = [lit for lit in rule.body if not _is_const_eq(lit)]
    return Rule(rule.head, tuple(first + rest))


def _has_constants(rule: Rule) -> bool:
    if any(_is_const_eq(lit) for lit in rule.body):
        return True
    return any(isinstance(t, Const) for a in rule.positive_atoms() for t in a.terms)


def _not_applicable(prog: Program, why: str) -> MagicResult:
    return MagicResult(prog, False, (info("MAGIC_NOT_APPLICABLE", f"magic sets not applied: {why}"),))


def _bound(t, bound: set[str]) -> bool:
    return isinstance(t, Const) or (isinstance(t, Var) and t.name in bound)


def _step(lit: Literal, bound: set[str]) -> bool:
    """Advance the left-to-right binding state; True if the literal was evaluable at this point."""
    if isinstance(lit, Atom):
        bound |= literal_vars(lit)
        return True
    if isinstance(lit, Comparison):
        lb, rb = _bound(lit.lhs, bound), _bound(lit.rhs, bound)
        if lb and rb:
            return True
        if lit.op == "=" and (lb or rb):
            other = lit.rhs if lb else lit.lhs
            if isinstance(other, Var):
                bound.add(other.name)
                return True
        return False
    if isinstance(lit, Arith):
        if _bound(lit.lhs, bound) and _bound(lit.rhs, bound):
            bound.add(lit.target.name)
            return True
        return False
    if isinstance(lit, Aggregate):
        bound.add(lit.result.name)
        return False
    return False


def apply_magic_sets(prog: Program) -> MagicResult:
    if len(prog.outputs) != 1:
        return _not_applicable(prog, "needs exactly one output predicate")
    graph = build_dependency_graph(prog)
    if isinstance(check_stratification(prog, graph), Diagnostic):
        return _not_applicable(prog, "program is not stratified")
    if any(not r.linear for r in classify_recursion(prog, graph).recursive):
        return _not_applicable(prog, "recursion is not linear")
    if any(d.name.startswith("magic_") for d in prog.decls):
        return _not_applicable(prog, "program already carries magic predicates")

    out = prog.outputs[0]
    reach = {out}
    todo = [out]
    while todo:
        p = todo.pop()
        for r in prog.rules_for(p):
            for a in r.atoms():
                if a.pred not in reach:
                    reach.add(a.pred)
                    todo.append(a.pred)
    if not any(_has_constants(r) for r in prog.rules if r.head.pred in reach):
        return _not_applicable(prog, "no constant reaches the output's rules")

    rules = {p: [hoist_constants(r) for r in prog.rules_for(p)] for p in reach if not prog.is_edb(p)}
    names = {d.name for d in prog.decls}
    adorned_name: dict[tuple[str, str], str] = {}
    magic_name: dict[tuple[str, str], str] = {}

    def adorn(pred: str, ad: str) -> str:
        key = (pred, ad)
        if key not in adorned_name:
            if "b" not in ad:
                adorned_name[key] = pred
            else:
                adorned_name[key] = fresh_name(f"{pred}_{ad}", names)
                names.add(adorned_name[key])
                magic_name[key] = fresh_name(f"magic_{pred}_{ad}", names)
                names.add(magic_name[key])
            queue.append(key)
        return adorned_name[key]

    queue: deque[tuple[str, str]] = deque()
    done: set[tuple[str, str]] = set()
    order: list[tuple[str, str]] = []
    adorn(out, "f" * prog.decl(out).arity)
    new_rules: list[Rule] = []
    while queue:
        key = queue.popleft()
        if key in done:
            continue
        done.add(key)
        order.append(key)
        pred, ad = key
        for rule in rules.get(pred, []):
            new_rules.extend(_rewrite(rule, ad, key, prog, adorn, magic_name))

    if not magic_name:
        hoisted = prog.with_rules(hoist_constants(r) for r in prog.rules)
        return MagicResult(
            hoisted,
            True,
            (info("MAGIC_NO_BINDINGS", "no bound argument reaches an IDB atom; only constant filters were hoisted"),),
        )

    decls = list(prog.edb_decls)
    for key in order:
        pred, ad = key
        if prog.is_edb(pred):
            continue
        orig = prog.decl(pred)
        decls.append(PredicateDecl(adorned_name[key], orig.columns, "IDB"))
        if key in magic_name:
            cols = tuple(c for c, a in zip(orig.columns, ad) if a == "b")
            decls.append(PredicateDecl(magic_name[key], cols, "IDB"))
    # a rule whose head also occurs in its body can never derive anything new
    kept: list[Rule] = []
    for r in new_rules:
        if r.head not in r.body and r not in kept:
            kept.append(r)
    result = Program(tuple(decls), tuple(kept), prog.outputs)

    diags = check_program(result)
    if has_errors(diags):
        return _not_applicable(prog, "rewritten program is ill-formed: " + diags[0].message)
    if isinstance(check_stratification(result), Diagnostic):
        return _not_applicable(prog, "rewriting would break stratification")
    return MagicResult(result, True, (info("MAGIC_APPLIED", f"magic sets applied for {len(magic_name)} adornment(s)"),))


def _rewrite(rule: Rule, ad: str, key, prog: Program, adorn, magic_name) -> list[Rule]:
    head = rule.head
    pred, _ = key
    bound: set[str] = set()
    for t, a in zip(head.terms, ad):
        if a == "b" and isinstance(t, Var):
            bound.add(t.name)
    guard = None
    if key in magic_name:
        guard = Atom(magic_name[key], tuple(t for t, a in zip(head.terms, ad) if a == "b"))
    prefix: list[Literal] = [guard] if guard is not None else []
    body: list[Literal] = list(prefix)
    out: list[Rule] = []
    for lit in rule.body:
        if isinstance(lit, Atom) and not prog.is_edb(lit.pred):
            beta = "".join("b" if _bound(t, bound) else "f" for t in lit.terms)
            new_pred = adorn(lit.pred, beta)
            new_atom = Atom(new_pred, lit.terms)
            if (lit.pred, beta) in magic_name:
                mhead = Atom(magic_name[(lit.pred, beta)], tuple(t for t, a in zip(lit.terms, beta) if a == "b"))
                out.append(Rule(mhead, tuple(prefix)))
            body.append(new_atom)
            prefix.append(new_atom)
            _step(lit, bound)
            continue
        if isinstance(lit, (Negation, Aggregate)):
            for a in (lit.atom,) if isinstance(lit, Negation) else [b for b in lit.body if isinstance(b, Atom)]:
                if not prog.is_edb(a.pred):
                    adorn(a.pred, "f" * a.arity)
            body.append(lit)
            _step(lit, bound)
            continue
        body.append(lit)
        if _step(lit, bound):
            prefix.append(lit)
    out.append(Rule(Atom(adorn(pred, ad), head.terms), tuple(body)))
    return out


__all__ = ["MagicResult", "apply_magic_sets", "hoist_constants"]
