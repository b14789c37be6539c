"""Static analyses over DLIR programs."""

from __future__ import annotations

from dataclasses import dataclass, field

from .diagnostics import Diagnostic, error, info, warning
from .dlir.depgraph import PredicateDependencyGraph, build_dependency_graph
from .dlir.ir import Aggregate, Arith, Comparison, Const, Negation, Program, Rule, Var


@dataclass(frozen=True)
class Stratification:
    strata: tuple[frozenset[str], ...]
    assignment: dict[str, int] = field(hash=False)

    def is_valid_for(self, graph: PredicateDependencyGraph) -> bool:
        for e in graph.edges:
            s, t = self.assignment[e.source], self.assignment[e.target]
            if e.tag == "positive" and s > t:
                return False
            if e.tag != "positive" and s >= t:
                return False
        return True


@dataclass(frozen=True)
class SccRecord:
    predicates: tuple[str, ...]
    recursive: bool
    linear: bool | None  # None for non-recursive components
    mutual: bool


@dataclass(frozen=True)
class RecursionReport:
    records: tuple[SccRecord, ...]

    def record_for(self, pred: str) -> SccRecord:
        return next(r for r in self.records if pred in r.predicates)

    @property
    def recursive(self) -> list[SccRecord]:
        return [r for r in self.records if r.recursive]


def _graph(prog: Program, graph: PredicateDependencyGraph | None) -> PredicateDependencyGraph:
    return graph if graph is not None else build_dependency_graph(prog)


def check_stratification(prog: Program, graph: PredicateDependencyGraph | None = None) -> Stratification | Diagnostic:
    """Stratification induced by the SCC order, or an UNSTRATIFIED diagnostic."""
    graph = _graph(prog, graph)
    for comp in graph.sccs:
        members = set(comp)
        bad = [e for e in graph.edges if e.tag != "positive" and e.source in members and e.target in members]
        if bad:
            cycle = ", ".join(sorted(members))
            kinds = sorted({e.tag for e in bad})
            return error(
                "UNSTRATIFIED",
                f"{' and '.join(kinds)} dependency inside the recursive cycle {{{cycle}}}",
                comp[0],
            )
    edbs = frozenset(d.name for d in prog.edb_decls)
    strata: list[frozenset[str]] = [edbs]
    for comp in graph.sccs:
        if not set(comp) <= edbs:
            strata.append(frozenset(comp) - edbs)
    assignment = {p: i for i, s in enumerate(strata) for p in s}
    return Stratification(tuple(strata), assignment)


def stratify(prog: Program, graph: PredicateDependencyGraph | None = None) -> Stratification:
    from .errors import UnstratifiedProgram

    result = check_stratification(prog, graph)
    if isinstance(result, Diagnostic):
        raise UnstratifiedProgram(result.message)
    return result


def _in_scc_atoms(rule: Rule, members: set[str]) -> int:
    return sum(1 for a in rule.atoms() if a.pred in members)


def classify_recursion(prog: Program, graph: PredicateDependencyGraph | None = None) -> RecursionReport:
    graph = _graph(prog, graph)
    records = []
    for comp in graph.sccs:
        members = set(comp)
        recursive = len(comp) >= 2 or graph.has_self_edge(comp[0])
        linear = None
        if recursive:
            linear = all(_in_scc_atoms(r, members) <= 1 for r in prog.rules if r.head.pred in members)
        records.append(SccRecord(tuple(comp), recursive, linear, len(comp) >= 2))
    return RecursionReport(tuple(records))


def _recursive_rules(prog: Program, report: RecursionReport):
    for rec in report.recursive:
        members = set(rec.predicates)
        for rule in prog.rules:
            if rule.head.pred in members and _in_scc_atoms(rule, members) > 0:
                yield rec, rule


def _direction(lit: Arith, tainted: dict[str, str]) -> str | None:
    """Which way a computed value can run away: up, down, both, or None for a constant."""
    lhs, rhs = lit.lhs, lit.rhs
    if isinstance(lhs, Const) and isinstance(rhs, Const):
        return None
    if lit.op == "*" or (isinstance(lhs, Var) and isinstance(rhs, Var)):
        return "both"
    if lit.op == "+":
        var, step = (lhs, rhs.value) if isinstance(rhs, Const) else (rhs, lhs.value)
    elif isinstance(rhs, Const):
        var, step = lhs, -rhs.value
    else:
        return "both"  # c - v flips direction each step
    if not isinstance(step, int):
        return "both"
    here = "up" if step >= 0 else "down"
    prior = tainted.get(var.name)
    return here if prior in (None, here) else "both"


def _bounds(rule: Rule, var: str, tainted: dict[str, str]) -> set[str]:
    """Bounds a comparison places on ``var``: subset of {upper, lower}."""
    out: set[str] = set()
    for lit in rule.body:
        if not isinstance(lit, Comparison):
            continue
        for mine, other, op in ((lit.lhs, lit.rhs, lit.op), (lit.rhs, lit.lhs, _flip(lit.op))):
            if mine != Var(var):
                continue
            if isinstance(other, Var) and other.name in tainted:
                continue
            if op in ("<", "<="):
                out.add("upper")
            elif op in (">", ">="):
                out.add("lower")
            elif op == "=":
                out |= {"upper", "lower"}
    return out


def _flip(op: str) -> str:
    return {"<": ">", "<=": ">=", ">": "<", ">=": "<="}.get(op, op)


def check_termination(prog: Program, graph: PredicateDependencyGraph | None = None) -> list[Diagnostic]:
    report = classify_recursion(prog, _graph(prog, graph))
    diags: list[Diagnostic] = []
    for rec, rule in _recursive_rules(prog, report):
        tainted: dict[str, str] = {}
        changed = True
        while changed:
            changed = False
            for lit in rule.body:
                if isinstance(lit, Arith):
                    d = _direction(lit, tainted)
                    if d is not None and tainted.get(lit.target.name) != d:
                        tainted[lit.target.name] = d
                        changed = True
                elif isinstance(lit, Comparison) and lit.op == "=":
                    for a, b in ((lit.lhs, lit.rhs), (lit.rhs, lit.lhs)):
                        if isinstance(a, Var) and isinstance(b, Var) and b.name in tainted and a.name not in tainted:
                            tainted[a.name] = tainted[b.name]
                            changed = True
        head_vars = {t.name for t in rule.head.terms if isinstance(t, Var)}
        for var in sorted(head_vars & set(tainted)):
            need = {"up": {"upper"}, "down": {"lower"}, "both": {"upper", "lower"}}[tainted[var]]
            if not need <= _bounds(rule, var, tainted):
                diags.append(
                    warning(
                        "MAY_DIVERGE",
                        f"recursive rule computes {var} by arithmetic without a bound; it may not terminate: {rule}",
                        rule.head.pred,
                    )
                )
                break
    if not diags:
        diags.append(info("TERMINATES", "no unbounded arithmetic in recursive rules"))
    return diags


def check_backend_compat(prog: Program, backend: str, graph: PredicateDependencyGraph | None = None) -> list[Diagnostic]:
    if backend not in ("souffle", "sql"):
        raise ValueError(f"unknown backend {backend}")
    graph = _graph(prog, graph)
    diags: list[Diagnostic] = []
    strat = check_stratification(prog, graph)
    if isinstance(strat, Diagnostic):
        diags.append(strat)
    if backend == "souffle":
        return diags
    report = classify_recursion(prog, graph)
    for rec in report.recursive:
        names = ", ".join(rec.predicates)
        if rec.mutual:
            diags.append(error("MUTUAL_RECURSION", f"SQL cannot express mutual recursion between {names}", rec.predicates[0]))
        if not rec.linear:
            diags.append(error("NONLINEAR_RECURSION", f"SQL supports only linear recursion; {names} is non-linear", rec.predicates[0]))
    flagged: set[tuple[str, str]] = set()
    for _, rule in _recursive_rules(prog, report):
        for lit in rule.body:
            code = {Negation: "RECURSIVE_NEGATION", Aggregate: "RECURSIVE_AGGREGATE"}.get(type(lit))
            if code and (code, rule.head.pred) not in flagged:
                flagged.add((code, rule.head.pred))
                what = "negation" if code == "RECURSIVE_NEGATION" else "aggregation"
                diags.append(error(code, f"SQL does not allow {what} inside the recursive definition of {rule.head.pred}", rule.head.pred))
    return diags


@dataclass(frozen=True)
class AnalysisReport:
    stratification: Stratification | None
    recursion: RecursionReport
    diagnostics: tuple[Diagnostic, ...]

    def summary_lines(self) -> list[str]:
        lines = []
        rec = self.recursion.recursive
        if not rec:
            lines.append("recursion: non-recursive")
        for r in rec:
            kind = ["recursive", "linear" if r.linear else "nonlinear"]
            if r.mutual:
                kind.append("mutual")
            lines.append(f"recursion: {{{', '.join(r.predicates)}}} {', '.join(kind)}")
        if self.stratification is None:
            lines.append("stratification: unstratified")
        else:
            lines.append(f"stratification: stratified ({len(self.stratification.strata)} strata)")
        return lines


def analyze_program(prog: Program) -> AnalysisReport:
    """Run every analysis; diagnostics cover stratification, termination and both backends."""
    graph = build_dependency_graph(prog)
    strat = check_stratification(prog, graph)
    diags: list[Diagnostic] = []
    if isinstance(strat, Diagnostic):
        diags.append(strat)
        strat = None
    diags.extend(check_termination(prog, graph))
    for d in check_backend_compat(prog, "sql", graph):
        if d.code != "UNSTRATIFIED":
            diags.append(Diagnostic("warning", d.code, f"sql backend: {d.message}", d.locus))
    return AnalysisReport(strat, classify_recursion(prog, graph), tuple(diags))


__all__ = [
    "AnalysisReport",
    "RecursionReport",
    "SccRecord",
    "Stratification",
    "analyze_program",
    "check_backend_compat",
    "check_stratification",
    "check_termination",
    "classify_recursion",
    "stratify",
]
