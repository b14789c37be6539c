from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from raqlet.errors import DuplicateType, NameCollision, RaqletSyntaxError, SchemaError, UnknownLabel
from raqlet.schema import (
    EdgeType,
    NodeType,
    Property,
    PropertyGraphSchema,
    derive_dl_schema,
    format_pg_schema,
    parse_pg_schema,
    upper_snake,
)


def test_parse_fig2a(fig_schema):
    assert [n.label for n in fig_schema.node_types] == ["Person", "City"]
    assert [p.name for p in fig_schema.node_types[0].properties] == ["id", "firstName", "locationIP"]
    (e,) = fig_schema.edge_types
    assert (e.type_name, e.label, e.source_label, e.target_label) == ("locationType", "isLocatedIn", "Person", "City")
    assert e.properties == (Property("id", "INT"),)


def test_empty_graph():
    s = parse_pg_schema("CREATE GRAPH { }")
    assert s.node_types == () and s.edge_types == ()
    assert derive_dl_schema(s).edbs == ()


def test_missing_endpoint_names_type(golden):
    text = (golden / "fig2a.pgs").read_text()
    text = "\n".join(line for line in text.splitlines() if "cityType:City" not in line)
    with pytest.raises(UnknownLabel, match="cityType"):
        parse_pg_schema(text)


def test_syntax_error_has_position():
    with pytest.raises(RaqletSyntaxError) as info:
        parse_pg_schema("CREATE GRAPH {\n  ( t:T {id INT, x FLOAT})\n}")
    assert info.value.line == 2


def test_duplicates_and_missing_id():
    with pytest.raises(DuplicateType):
        parse_pg_schema("CREATE GRAPH { (t: A {id INT}), (t: B {id INT}) }")
    with pytest.raises(SchemaError):
        parse_pg_schema("CREATE GRAPH { (t: A {name STRING}) }")


def test_comments_and_whitespace():
    s = parse_pg_schema("// graph\nCREATE GRAPH{(t:A{id INT}) // node\n}")
    assert s.node_types[0].label == "A"


def test_derive_fig2b(fig_dl):
    got = [(e.name, [c for c, _ in e.columns]) for e in fig_dl.edbs]
    assert got == [
        ("Person", ["id", "firstName", "locationIP"]),
        ("City", ["id", "name"]),
        ("Person_IS_LOCATED_IN_City", ["id1", "id2", "id"]),
    ]
    assert dict(fig_dl.get("Person").columns) == {"id": "number", "firstName": "symbol", "locationIP": "symbol"}
    assert fig_dl.get("Person").origin.kind == "node"
    assert fig_dl.get("Person_IS_LOCATED_IN_City").origin.kind == "edge"


def test_knows_self_edge(knows_schema):
    d = derive_dl_schema(knows_schema)
    assert [c for c, _ in d.get("Person_KNOWS_Person").columns] == ["id1", "id2"]


def test_id_column_moves_first():
    d = derive_dl_schema(parse_pg_schema("CREATE GRAPH { (t: A {name STRING, id INT}) }"))
    assert [c for c, _ in d.get("A").columns] == ["id", "name"]


def test_edge_property_clash():
    with pytest.raises(NameCollision):
        derive_dl_schema(parse_pg_schema("CREATE GRAPH { (t: A {id INT}), (:t)-[e: r {id1 INT}]->(:t) }"))


@pytest.mark.parametrize(
    "label, expected",
    [("isLocatedIn", "IS_LOCATED_IN"), ("knows", "KNOWS"), ("KNOWS", "KNOWS"), ("hasHTTPLink", "HAS_HTTP_LINK"), ("a1B", "A1_B")],
)
def test_upper_snake(label, expected):
    assert upper_snake(label) == expected


_ident = st.from_regex(r"[a-z][a-zA-Z0-9]{0,6}", fullmatch=True).filter(lambda s: s not in ("id", "id1", "id2"))
_scalar = st.sampled_from(["INT", "STRING"])


@st.composite
def schemas(draw):
    n = draw(st.integers(0, 4))
    labels = draw(st.lists(_ident, min_size=n, max_size=n, unique=True))
    nodes = []
    for i, label in enumerate(labels):
        extra = draw(st.lists(st.tuples(_ident, _scalar), max_size=3, unique_by=lambda t: t[0]))
        props = (Property("id", "INT"),) + tuple(Property(a, b) for a, b in extra)
        nodes.append(NodeType(f"t{i}", label.capitalize() + str(i), props))
    edges = []
    if nodes:
        for j in range(draw(st.integers(0, 3))):
            src, tgt = draw(st.sampled_from(nodes)), draw(st.sampled_from(nodes))
            extra = draw(st.lists(st.tuples(_ident, _scalar), max_size=2, unique_by=lambda t: t[0]))
            edges.append(EdgeType(f"e{j}", f"rel{j}", src.label, tgt.label, tuple(Property(a, b) for a, b in extra)))
    return PropertyGraphSchema(tuple(nodes), tuple(edges))


@given(schemas())
def test_format_parse_round_trip(schema):
    assert parse_pg_schema(format_pg_schema(schema)) == schema


@given(schemas())
def test_derive_preserves_order(schema):
    d = derive_dl_schema(schema)
    assert [e.name for e in d.edbs][: len(schema.node_types)] == [n.label for n in schema.node_types]
    for n, e in zip(schema.node_types, d.edbs):
        assert e.columns[0] == ("id", "number")
        assert [c for c, _ in e.columns[1:]] == [p.name for p in n.properties if p.name != "id"]
    assert derive_dl_schema(schema) == d
