from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from raqlet.cypher import normalize_query, parse_cypher
from raqlet.cypher.ast import Comparison, Literal, PropertyAccess, ReturnItem
from raqlet.errors import TypeMismatch, UnboundVariable, UnknownLabel, UnknownProperty
from raqlet.pgir import (
    Match,
    PgirEdgePattern,
    PgirNodePattern,
    PgirQuery,
    Return,
    Where,
    lower_to_pgir,
    pgir_to_json,
    validate_pgir,
)


def lower(text, schema):
    return lower_to_pgir(normalize_query(parse_cypher(text)), schema)


def test_fig3b(golden, fig_schema):
    p = lower((golden / "fig3a.cql").read_text(), fig_schema)
    assert p.clauses == (
        Match((PgirEdgePattern("IS_LOCATED_IN", "x1", PgirNodePattern("Person", "n"), PgirNodePattern("City", "p")),)),
        Where((Comparison("=", PropertyAccess("n", "id"), Literal(42)),)),
        Return((ReturnItem(PropertyAccess("n", "firstName"), "firstName"), ReturnItem(PropertyAccess("p", "id"), "cityId"))),
    )
    assert p.binding_order == (("n", "x1", "p"), ("n", "x1", "p"), ("firstName", "cityId"))
    assert validate_pgir(p, fig_schema) == []


def test_single_node(fig_schema):
    p = lower("MATCH (n:Person) RETURN DISTINCT n.id AS i", fig_schema)
    assert p.clauses[0] == Match((PgirNodePattern("Person", "n"),))
    assert isinstance(p.clauses[1], Return) and len(p.clauses) == 2


def test_backward_edge_canonicalized(fig_schema):
    fwd = lower("MATCH (n:Person)-[e:IS_LOCATED_IN]->(c:City) RETURN DISTINCT c.id AS k", fig_schema)
    bwd = lower("MATCH (c:City)<-[e:IS_LOCATED_IN]-(n:Person) RETURN DISTINCT c.id AS k", fig_schema)
    assert fwd.clauses[0].patterns[0] == bwd.clauses[0].patterns[0]
    assert bwd.clauses[0].patterns[0].source == PgirNodePattern("Person", "n")


@pytest.mark.parametrize(
    "text, exc",
    [
        ("MATCH (n:Ghost) RETURN DISTINCT n.id AS i", UnknownLabel),
        ("MATCH (n:Person)-[:KNOWS]->(c:City) RETURN DISTINCT n.id AS i", UnknownLabel),
        ("MATCH (n:City)-[:IS_LOCATED_IN]->(c:Person) RETURN DISTINCT n.id AS i", UnknownLabel),
        ("MATCH (n:Person) RETURN DISTINCT n.age AS i", UnknownProperty),
        ("MATCH (n:Person) WHERE n.id = 'x' RETURN DISTINCT n.id AS i", TypeMismatch),
        ("MATCH (n:Person) RETURN DISTINCT m.id AS i", UnboundVariable),
    ],
)
def test_lowering_errors(text, exc, fig_schema):
    with pytest.raises(exc):
        lower(text, fig_schema)


def test_validate_reports_diagnostics(fig_schema):
    ghost = PgirQuery((Match((PgirNodePattern("Ghost", "g"),)), Return(())), (("g",), ()))
    (d,) = validate_pgir(ghost, fig_schema)
    assert (d.severity, d.code) == ("error", "UNKNOWN_LABEL") and "Ghost" in d.message
    unbound = PgirQuery(
        (Match((PgirNodePattern("Person", "n"),)), Return((ReturnItem(PropertyAccess("m", "id"), "i"),))),
        (("n",), ("i",)),
    )
    assert [d.code for d in validate_pgir(unbound, fig_schema)] == ["UNBOUND_VARIABLE"]
    bad_order = PgirQuery((Return(()), Match((PgirNodePattern("Person", "n"),))), ((), ("n",)))
    assert validate_pgir(bad_order, fig_schema)[0].code == "INVARIANT_VIOLATION"


def test_duplicate_alias(fig_schema):
    from raqlet.errors import DuplicateAlias

    with pytest.raises(DuplicateAlias):
        lower("MATCH (n:Person) RETURN DISTINCT n.id AS i, n.firstName AS i", fig_schema)


def test_json_dump(golden, fig_schema):
    doc = json.loads(pgir_to_json(lower((golden / "fig3a.cql").read_text(), fig_schema)))
    assert [c["clause"] for c in doc["clauses"]] == ["Match", "Where", "Return"]
    edge = doc["clauses"][0]["patterns"][0]
    assert (edge["edge_label"], edge["edge_var"], edge["source"]["node_var"]) == ("IS_LOCATED_IN", "x1", "n")


@st.composite
def chain_queries(draw):
    n = draw(st.integers(1, 4))
    parts = []
    user = []
    for i in range(n):
        named = draw(st.booleans())
        if named:
            user.append(f"v{i}")
        parts.append(f"({'v%d' % i if named else ''}:Person)")
        if i + 1 < n:
            arrow = draw(st.sampled_from(["-[:KNOWS]->", "<-[:KNOWS]-"]))
            parts.append(arrow)
    ret = f"{user[0]}.id" if user else "1"
    return "MATCH " + "".join(parts) + f" RETURN DISTINCT {ret} AS out", user


@given(chain_queries())
def test_lowering_preserves_variables(knows_schema, case):
    text, user = case
    q = normalize_query(parse_cypher(text))
    p = lower_to_pgir(q, knows_schema)
    generated = {el.variable for m in q.matches for pat in m.patterns for el in pat.elements}
    assert p.variables() == generated and set(user) <= generated
    assert validate_pgir(p, knows_schema) == []
    assert lower_to_pgir(q, knows_schema) == p
