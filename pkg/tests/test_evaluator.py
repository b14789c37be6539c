from __future__ import annotations

import random
from collections import defaultdict

import pytest
from hypothesis import given, settings, strategies as st

from gen import bfs_reachability, random_case, random_graph
from programs import EVEN_ODD, LINEAR_TC, NAT
from raqlet.dlir import parse_dlir
from raqlet.errors import ArithmeticOverflow, ArityMismatch, EvaluationError, FactParseError
from raqlet.evaluator import (
    compare,
    evaluate,
    evaluate_naive,
    format_output,
    is_fixpoint,
    load_facts_csv,
    query_output,
)


def test_compare_semantics():
    assert compare(1, "<", 2) and compare("a", "<", "b") and compare(3, "!=", 4)
    assert not compare(1, "=", "1") and compare(1, "!=", "1")
    with pytest.raises(EvaluationError):
        compare(1, "<", "a")


def test_tc_matches_bfs():
    rng = random.Random(7)
    prog = parse_dlir(LINEAR_TC)
    for _ in range(20):
        nodes, edges = random_graph(rng, 30)
        db, _ = evaluate(prog, {"e": edges})
        assert db["tc"] == bfs_reachability(nodes, edges)


def test_even_odd():
    prog = parse_dlir(EVEN_ODD)
    db, _ = evaluate(prog, {"zero": {(0,)}, "succ": {(i, i + 1) for i in range(9)}})
    assert db["even"] == {(i,) for i in range(0, 10, 2)}
    assert db["odd"] == {(i,) for i in range(1, 10, 2)}


def test_stratified_negation():
    prog = parse_dlir(
        LINEAR_TC + ".decl node(x: number)\n.input node\n.decl unreached(x: number)\n"
        "unreached(y) :- node(y), !tc(1, y).\n.output unreached\n"
    )
    db, _ = evaluate(prog, {"e": {(1, 2), (2, 3), (4, 5)}, "node": {(i,) for i in range(1, 6)}})
    assert db["unreached"] == {(1,), (4,), (5,)}


AGG = """
.decl r(k: number, v: number)
.input r
.decl keys(k: number)
.input keys
.decl c(k: number, n: number)
c(k, n) :- keys(k), n = count : { r(k, _) }.
.decl s(k: number, n: number)
s(k, n) :- keys(k), n = sum v : { r(k, v) }.
.decl lo(k: number, n: number)
lo(k, n) :- keys(k), n = min v : { r(k, v) }.
.decl hi(k: number, n: number)
hi(k, n) :- keys(k), n = max v : { r(k, v) }.
.decl total(n: number)
total(n) :- n = sum v : { r(_, v) }.
.output c
"""


@settings(max_examples=60, deadline=None)
@given(st.sets(st.tuples(st.integers(0, 4), st.integers(-5, 5)), max_size=15), st.sets(st.integers(0, 5), max_size=5))
def test_aggregates_match_python(rows, keys):
    prog = parse_dlir(AGG)
    db, _ = evaluate(prog, {"r": rows, "keys": {(k,) for k in keys}})
    groups = defaultdict(list)
    for k, v in rows:
        groups[k].append(v)
    assert db["c"] == {(k, len(groups[k])) for k in keys}
    assert db["s"] == {(k, sum(groups[k])) for k in keys}
    assert db["lo"] == {(k, min(groups[k])) for k in keys if groups[k]}
    assert db["hi"] == {(k, max(groups[k])) for k in keys if groups[k]}
    # sum over distinct (k, v) rows: the wildcard counts as a distinguishing column
    assert db["total"] == {(sum(v for _, v in rows),)}


def test_arithmetic_and_overflow():
    prog = parse_dlir(".decl e(x: number)\n.input e\n.decl p(y: number)\np(y) :- e(x), y = x * 3.\n.output p\n")
    db, _ = evaluate(prog, {"e": {(2,), (-4,)}})
    assert db["p"] == {(6,), (-12,)}
    with pytest.raises(ArithmeticOverflow):
        evaluate(prog, {"e": {(2**62,)}})


def test_diverging_program_overflows_instead_of_hanging():
    prog = parse_dlir(NAT.replace("y + 1", "y * 2").replace("nat(x) :- zero(x).", "nat(x) :- zero(x).\nnat(1) :- zero(_)."))
    with pytest.raises(ArithmeticOverflow):
        evaluate(prog, {"zero": {(0,)}})


def test_stats_are_deterministic():
    prog = parse_dlir(LINEAR_TC)
    db = {"e": {(i, i + 1) for i in range(10)}}
    _, s1 = evaluate(prog, db)
    _, s2 = evaluate(prog, db)
    assert s1 == s2 and s1.derived_tuple_count == 55 and len(s1.iterations) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_naive_equals_semi_naive(seed):
    prog, db = random_case(seed)
    semi, _ = evaluate(prog, db)
    assert evaluate_naive(prog, db) == semi
    assert is_fixpoint(prog, semi)


def test_is_fixpoint_detects_missing_tuples():
    prog = parse_dlir(LINEAR_TC)
    db, _ = evaluate(prog, {"e": {(1, 2), (2, 3)}})
    assert is_fixpoint(prog, db)
    db["tc"] = db["tc"] - {(1, 3)}
    assert not is_fixpoint(prog, db)


def test_format_output_sorted():
    prog = parse_dlir(".decl e(x: number, y: symbol)\n.input e\n.output e\n")
    out = query_output(prog, {"e": {(10, "b"), (2, "a"), (2, "B")}})
    assert format_output(out) == "e\t2\tB\ne\t2\ta\ne\t10\tb\n"
    assert format_output({"e": []}) == ""


def test_load_facts(tmp_path, fig_dl):
    (tmp_path / "Person.facts").write_text("42\tAlice\t1.2.3.4\n\n7\tBob\tx\n")
    (tmp_path / "City.facts").write_text("7\tParis\n")
    db = load_facts_csv(tmp_path, fig_dl)
    (tmp_path / "City.facts").write_text("7,Paris\n")
    assert db["Person"] == {(42, "Alice", "1.2.3.4"), (7, "Bob", "x")}
    assert db["Person_IS_LOCATED_IN_City"] == set()
    with pytest.raises(ArityMismatch):
        load_facts_csv(tmp_path, [d for d in fig_dl.edbs if d.name == "City"])
    assert load_facts_csv(tmp_path, [d for d in fig_dl.edbs if d.name == "City"], ",")["City"] == {(7, "Paris")}
    (tmp_path / "Person.facts").write_text("42\tAlice\tx\nforty\tBob\ty\n")
    with pytest.raises(FactParseError) as info:
        load_facts_csv(tmp_path, fig_dl)
    assert (info.value.line, info.value.column) == (2, 1)
