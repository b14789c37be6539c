from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from raqlet.cypher import normalize_query, parse_cypher
from raqlet.cypher.ast import (
    AggregateCall,
    Comparison,
    EdgePatternAst,
    Literal,
    NodePatternAst,
    PropertyAccess,
    StarLength,
    WhereClause,
    conjuncts,
)
from raqlet.errors import RaqletSyntaxError, UnsupportedFeature, UnsupportedStarBounds


def test_parse_fig3a(golden):
    q = parse_cypher((golden / "fig3a.cql").read_text())
    (m,) = q.matches
    (chain,) = m.patterns
    assert len(chain.nodes) == 2 and len(chain.edges) == 1
    assert chain.nodes[0] == NodePatternAst("n", "Person", (("id", Literal(42)),))
    assert chain.edges[0] == EdgePatternAst(None, "IS_LOCATED_IN", "right")
    assert q.where is None
    assert q.returns.distinct
    assert [(str(i.expr), i.alias) for i in q.returns.items] == [("n.firstName", "firstName"), ("p.id", "cityId")]


def test_minimal_query():
    q = parse_cypher("MATCH (n:Person) RETURN DISTINCT n.id AS i")
    (chain,) = q.matches[0].patterns
    assert chain.edges == () and len(chain.nodes) == 1
    assert len(q.returns.items) == 1


@pytest.mark.parametrize(
    "length, expected",
    [("*1..3", StarLength(1, 3)), ("*", StarLength(1, None)), ("*..4", StarLength(1, 4)), ("*2", StarLength(2, 2)), ("*1..", StarLength(1, None))],
)
def test_star_lengths(length, expected):
    q = parse_cypher(f"MATCH (a:Person)-[:KNOWS{length}]->(b:Person) RETURN DISTINCT b.id AS x")
    assert q.matches[0].patterns[0].edges[0].length == expected


def test_default_alias_is_expression_text():
    q = parse_cypher("MATCH (n:Person) RETURN DISTINCT n.id")
    assert q.returns.items[0].alias == "n.id"


def test_left_edge_and_aggregate():
    q = parse_cypher("MATCH (c:City)<-[e:IS_LOCATED_IN]-(n:Person) RETURN DISTINCT c.id AS c, count(n.id) AS k")
    assert q.matches[0].patterns[0].edges[0].direction == "left"
    assert q.returns.items[1].expr == AggregateCall("count", PropertyAccess("n", "id"))


def test_string_escapes():
    q = parse_cypher(r"MATCH (n:Person) WHERE n.name = 'O\'Ne\\il' RETURN DISTINCT n.id AS i")
    assert q.where.predicate.right == Literal("O'Ne\\il")


@pytest.mark.parametrize(
    "text, word",
    [
        ("MATCH (n:Person) RETURN DISTINCT n.id AS i ORDER BY i", "ORDER"),
        ("MATCH (n:Person) RETURN DISTINCT n.id AS i LIMIT 3", "LIMIT"),
        ("OPTIONAL MATCH (n:Person) RETURN DISTINCT n.id AS i", "OPTIONAL"),
        ("MATCH (n:Person) RETURN n.id AS i", "DISTINCT"),
        ("MATCH (a:Person)-[:KNOWS]-(b:Person) RETURN DISTINCT a.id AS x", "undirected"),
        ("MATCH (n) RETURN DISTINCT n.id AS i", "label"),
        ("MATCH (n:Person) WHERE n.id = 1 OR n.id = 2 RETURN DISTINCT n.id AS i", "OR"),
    ],
)
def test_unsupported_features(text, word):
    with pytest.raises(UnsupportedFeature, match=word):
        parse_cypher(text)


def test_star_bounds_rejected():
    with pytest.raises(UnsupportedStarBounds):
        parse_cypher("MATCH (a:Person)-[:KNOWS*3..]->(b:Person) RETURN DISTINCT a.id AS x")
    with pytest.raises((UnsupportedStarBounds, RaqletSyntaxError)):
        parse_cypher("MATCH (a:Person)-[:KNOWS*3..2]->(b:Person) RETURN DISTINCT a.id AS x")


def test_syntax_error_position():
    with pytest.raises(RaqletSyntaxError) as info:
        parse_cypher("MATCH (n:Person)\nRETURN DISTINCT n.")
    assert info.value.line == 2


def test_normalize_fig3a(golden):
    q = normalize_query(parse_cypher((golden / "fig3a.cql").read_text()))
    chain = q.matches[0].patterns[0]
    assert chain.edges[0].variable == "x1"
    assert all(n.property_map == () for n in chain.nodes)
    assert q.where == WhereClause(Comparison("=", PropertyAccess("n", "id"), Literal(42)))


def test_normalize_identity():
    q = parse_cypher("MATCH (a:Person)-[e:KNOWS]->(b:Person) WHERE a.id < 3 RETURN DISTINCT b.id AS x")
    assert normalize_query(q) == q


def test_normalize_fresh_names_in_textual_order():
    q = normalize_query(parse_cypher("MATCH (:Person {id:1})-[:KNOWS]->(:Person {id:2}) RETURN DISTINCT 1 AS one"))
    chain = q.matches[0].patterns[0]
    assert [el.variable for el in chain.elements] == ["x1", "x2", "x3"]
    assert [str(c) for c in conjuncts(q.where.predicate)] == ["x1.id = 1", "x3.id = 2"]


def test_fresh_names_skip_user_variables():
    q = normalize_query(parse_cypher("MATCH (x1:Person)-[:KNOWS]->(x2:Person) RETURN DISTINCT x1.id AS a"))
    assert q.matches[0].patterns[0].edges[0].variable == "x3"


def test_extracted_conditions_precede_where():
    q = normalize_query(parse_cypher("MATCH (n:Person {id: 7}) WHERE n.name = 'a' RETURN DISTINCT n.id AS i"))
    assert [str(c) for c in conjuncts(q.where.predicate)] == ["n.id = 7", "n.name = 'a'"]


_props = st.lists(st.tuples(st.sampled_from(["id", "name"]), st.one_of(st.integers(0, 99), st.text("ab", max_size=3))), max_size=2, unique_by=lambda t: t[0])


@st.composite
def queries(draw):
    """Cypher text over the Person/KNOWS schema with optional names and inline maps."""
    n = draw(st.integers(1, 3))
    parts = []
    names = []
    for i in range(n):
        var = draw(st.sampled_from(["", f"v{i}", f"x{i + 1}"]))
        names.append(var)
        props = draw(_props)
        pm = ""
        if props:
            items = ", ".join(f"{k}: {v if isinstance(v, int) else repr(v)}" for k, v in props)
            pm = " {" + items + "}"
        parts.append(f"({var}:Person{pm})")
        if i + 1 < n:
            evar = draw(st.sampled_from(["", f"e{i}"]))
            parts.append(f"-[{evar}:KNOWS]->")
    where = " WHERE v0.id > 1" if names[0] == "v0" and draw(st.booleans()) else ""
    return f"MATCH {''.join(parts)}{where} RETURN DISTINCT 1 AS one"


@given(queries())
def test_normalize_idempotent_and_complete(text):
    q = normalize_query(parse_cypher(text))
    assert normalize_query(q) == q
    for m in q.matches:
        for p in m.patterns:
            for el in p.elements:
                assert el.variable is not None
                if isinstance(el, NodePatternAst):
                    assert el.property_map == ()
