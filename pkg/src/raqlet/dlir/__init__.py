from .depgraph import DepEdge, PredicateDependencyGraph, build_dependency_graph
from .ir import (
    WILDCARD,
    Aggregate,
    Arith,
    Atom,
    Comparison,
    Const,
    Negation,
    PredicateDecl,
    Program,
    Rule,
    Var,
    Wildcard,
)
from .jsonio import program_to_json
from .text import parse_dlir, render_dlir
from .translate import translate_pgir_to_dlir
from .wellformed import check_program, schedule

__all__ = [
    "WILDCARD",
    "Aggregate",
    "Arith",
    "Atom",
    "Comparison",
    "Const",
    "DepEdge",
    "Negation",
    "PredicateDecl",
    "PredicateDependencyGraph",
    "Program",
    "Rule",
    "Var",
    "Wildcard",
    "build_dependency_graph",
    "check_program",
    "parse_dlir",
    "program_to_json",
    "render_dlir",
    "schedule",
    "translate_pgir_to_dlir",
]
