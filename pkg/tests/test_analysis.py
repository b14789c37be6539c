from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from gen import brute_force_cycles, random_program
from programs import BOUNDED_NAT, DOUBLED_TC, EVEN_ODD, LINEAR_TC, NAT, WIN_MOVE
from raqlet.analysis import (
    Stratification,
    analyze_program,
    check_backend_compat,
    check_stratification,
    check_termination,
    classify_recursion,
    stratify,
)
from raqlet.cypher import normalize_query, parse_cypher
from raqlet.diagnostics import Diagnostic
from raqlet.dlir import build_dependency_graph, parse_dlir, translate_pgir_to_dlir
from raqlet.errors import UnstratifiedProgram
from raqlet.pgir import lower_to_pgir
from raqlet.schema import derive_dl_schema


def codes(diags):
    return [d.code for d in diags if d.severity == "error"]


def test_fig3d_strata(golden, fig_dl):
    prog = parse_dlir((golden / "fig3d.dl").read_text(), fig_dl)
    s = check_stratification(prog)
    assert isinstance(s, Stratification)
    assert s.strata[0] == {"Person", "City", "Person_IS_LOCATED_IN_City"}
    assert [set(x) for x in s.strata[1:]] == [{"Match1"}, {"Where1"}, {"Return"}]
    assert check_termination(prog)[0].code == "TERMINATES"
    assert codes(check_backend_compat(prog, "sql")) == []


def test_negation_self_cycle():
    d = check_stratification(parse_dlir(".decl e(x: number)\n.input e\np(x) :- e(x), !p(x).\n"))
    assert isinstance(d, Diagnostic) and d.code == "UNSTRATIFIED" and "p" in d.message


def test_win_move_unstratified():
    prog = parse_dlir(WIN_MOVE)
    d = check_stratification(prog)
    assert isinstance(d, Diagnostic) and d.code == "UNSTRATIFIED" and d.locus == "win"
    with pytest.raises(UnstratifiedProgram):
        stratify(prog)
    assert codes(check_backend_compat(prog, "souffle")) == ["UNSTRATIFIED"]


def test_aggregate_in_cycle_unstratified():
    prog = parse_dlir(".decl e(x: number)\n.input e\np(x) :- e(x).\np(c) :- e(x), c = count : { p(x) }.\n")
    assert isinstance(check_stratification(prog), Diagnostic)


def test_linear_tc():
    rec = classify_recursion(parse_dlir(LINEAR_TC)).record_for("tc")
    assert (rec.recursive, rec.linear, rec.mutual) == (True, True, False)


def test_doubled_tc():
    rec = classify_recursion(parse_dlir(DOUBLED_TC)).record_for("tc")
    assert (rec.recursive, rec.linear, rec.mutual) == (True, False, False)


def test_even_odd():
    report = classify_recursion(parse_dlir(EVEN_ODD))
    rec = report.record_for("even")
    assert set(rec.predicates) == {"even", "odd"} and rec.mutual and rec.recursive
    assert report.record_for("zero").recursive is False and report.record_for("zero").linear is None


def test_termination():
    assert [d.code for d in check_termination(parse_dlir(NAT))] == ["MAY_DIVERGE"]
    assert [d.code for d in check_termination(parse_dlir(BOUNDED_NAT))] == ["TERMINATES"]
    lower_only = NAT.replace("x = y + 1.", "x = y + 1, x >= 0.")
    assert [d.code for d in check_termination(parse_dlir(lower_only))] == ["MAY_DIVERGE"]
    down = NAT.replace("x = y + 1.", "x = y - 1, x >= -5.")
    assert [d.code for d in check_termination(parse_dlir(down))] == ["TERMINATES"]


def test_bounded_star_terminates(knows_schema):
    q = normalize_query(parse_cypher("MATCH (a:Person)-[:KNOWS*1..3]->(b:Person) RETURN DISTINCT b.id AS x"))
    prog = translate_pgir_to_dlir(lower_to_pgir(q, knows_schema), derive_dl_schema(knows_schema))
    assert [d.code for d in check_termination(prog)] == ["TERMINATES"]


def test_backend_compat():
    assert codes(check_backend_compat(parse_dlir(DOUBLED_TC), "sql")) == ["NONLINEAR_RECURSION"]
    assert codes(check_backend_compat(parse_dlir(LINEAR_TC), "sql")) == []
    assert codes(check_backend_compat(parse_dlir(EVEN_ODD), "souffle")) == []
    assert codes(check_backend_compat(parse_dlir(EVEN_ODD), "sql")) == ["MUTUAL_RECURSION"]
    neg = LINEAR_TC.replace("tc(x, y) :- tc(x, z), e(z, y).", "tc(x, y) :- tc(x, z), e(z, y), !e(y, x).")
    assert codes(check_backend_compat(parse_dlir(neg), "sql")) == ["RECURSIVE_NEGATION"]
    with pytest.raises(ValueError):
        check_backend_compat(parse_dlir(LINEAR_TC), "neo4j")


def test_analyze_program_summary():
    report = analyze_program(parse_dlir(DOUBLED_TC))
    assert report.summary_lines() == ["recursion: {tc} recursive, nonlinear", "stratification: stratified (2 strata)"]
    assert [(d.severity, d.code) for d in report.diagnostics] == [("info", "TERMINATES"), ("warning", "NONLINEAR_RECURSION")]


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10**6))
def test_properties_on_random_programs(seed):
    prog = random_program(random.Random(seed))
    graph = build_dependency_graph(prog)
    strat = check_stratification(prog, graph)
    assert isinstance(strat, Stratification)  # the generator only builds stratified programs
    assert strat.is_valid_for(graph)
    assert codes(check_backend_compat(prog, "souffle")) == []
    cycles = brute_force_cycles(prog)
    for rec in classify_recursion(prog, graph).records:
        p = rec.predicates[0]
        assert rec.recursive == bool(cycles[p])
        assert rec.mutual == (len(rec.predicates) >= 2)


def test_invalid_stratification_detected():
    prog = parse_dlir(LINEAR_TC)
    graph = build_dependency_graph(prog)
    good = check_stratification(prog, graph)
    swapped = Stratification(good.strata, {"e": 1, "tc": 0})
    assert good.is_valid_for(graph) and not swapped.is_valid_for(graph)


@st.composite
def cyclic_programs(draw):
    """Positive programs whose IDBs may reference each other arbitrarily."""
    n = draw(st.integers(1, 5))
    names = [f"q{i}" for i in range(n)]
    lines = [".decl e(x: number)", ".input e"]
    for p in names:
        lines.append(f"{p}(x) :- e(x).")
        for _ in range(draw(st.integers(0, 2))):
            body = draw(st.lists(st.sampled_from(names), min_size=1, max_size=3))
            lines.append(f"{p}(x) :- " + ", ".join(f"{b}(x)" for b in body) + ".")
    return parse_dlir("\n".join(lines) + "\n")


@settings(max_examples=150, deadline=None)
@given(cyclic_programs())
def test_classification_matches_brute_force(prog):
    cycles = brute_force_cycles(prog)
    for rec in classify_recursion(prog).records:
        p = rec.predicates[0]
        members = cycles[p] | {p}
        assert set(rec.predicates) == members
        assert rec.recursive == bool(cycles[p])
        assert rec.mutual == (len(members) >= 2)
        if rec.recursive:
            in_scc = [sum(a.pred in members for a in r.atoms()) for r in prog.rules if r.head.pred in members]
            assert rec.linear == all(k <= 1 for k in in_scc)
