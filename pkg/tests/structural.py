"""Comparison helpers for golden files."""

from __future__ import annotations

import itertools
import re

from raqlet.dlir.ir import Arith, Atom, Comparison, Negation, Program, Rule, Var, substitute

_TOKEN = re.compile(r'"(?:[^"\\]|\\.)*"|\'(?:[^\'\\]|\\.)*\'|:-|<=|>=|!=|<>|[A-Za-z_][A-Za-z0-9_]*|\d+|\S')


def tokens(text: str) -> list[str]:
    """Token sequence ignoring whitespace and ``//`` comments."""
    text = re.sub(r"//[^\n]*", "", text)
    return _TOKEN.findall(text)


def without_edb_lines(text: str, edb_names) -> str:
    """Drop ``.decl``/``.input`` lines of the given EDB relations."""
    keep = []
    for line in text.splitlines():
        parts = line.split()
        if len(parts) >= 2 and parts[0] in (".decl", ".input") and parts[1].split("(")[0] in edb_names:
            continue
        keep.append(line)
    return "\n".join(keep)


def canonical_rule(rule: Rule) -> str:
    """Smallest rendering over all body orders, with variables renamed by first occurrence."""
    best = None
    for perm in itertools.permutations(rule.body):
        names: dict[str, str] = {}
        for lit in (rule.head, *perm):
            for v in _ordered_vars(lit):
                names.setdefault(v, f"V{len(names)}")
        sub = {k: Var(v) for k, v in names.items()}
        text = str(Rule(substitute(rule.head, sub), tuple(substitute(b, sub) for b in perm)))
        best = text if best is None or text < best else best
    return best


def _ordered_vars(lit) -> list[str]:
    if isinstance(lit, Atom):
        terms = list(lit.terms)
    elif isinstance(lit, Negation):
        terms = list(lit.atom.terms)
    elif isinstance(lit, Comparison):
        terms = [lit.lhs, lit.rhs]
    elif isinstance(lit, Arith):
        terms = [lit.target, lit.lhs, lit.rhs]
    else:
        out = [lit.result.name] + ([lit.target.name] if isinstance(lit.target, Var) else [])
        for b in lit.body:
            out += _ordered_vars(b)
        return out
    return [t.name for t in terms if isinstance(t, Var)]


def canonical_program(prog: Program) -> tuple:
    idb = tuple((d.name, d.columns) for d in prog.idb_decls)
    return idb, tuple(canonical_rule(r) for r in prog.rules), prog.outputs
