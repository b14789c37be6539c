"""PG-Schema parsing and derivation of the flat Datalog schema."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Literal

from ._scan import Cursor, tokenize
from .diagnostics import Span
from .errors import DuplicateType, NameCollision, SchemaError, UnknownLabel

ScalarType = Literal["INT", "STRING"]
ColumnType = Literal["number", "symbol"]

SCALAR_TO_COLUMN: dict[str, ColumnType] = {"INT": "number", "STRING": "symbol"}


@dataclass(frozen=True)
class Property:
    name: str
    type: ScalarType


@dataclass(frozen=True)
class NodeType:
    type_name: str
    label: str
    properties: tuple[Property, ...]
    span: Span | None = field(default=None, compare=False, repr=False)

    def property(self, name: str) -> Property | None:
        return next((p for p in self.properties if p.name == name), None)


@dataclass(frozen=True)
class EdgeType:
    type_name: str
    label: str
    source_label: str
    target_label: str
    properties: tuple[Property, ...]
    span: Span | None = field(default=None, compare=False, repr=False)

    def property(self, name: str) -> Property | None:
        return next((p for p in self.properties if p.name == name), None)

    def matches(self, label: str) -> bool:
        """Cypher refers to edges either by the schema label or its UPPER_SNAKE form."""
        return label == self.label or label == upper_snake(self.label)


@dataclass(frozen=True)
class PropertyGraphSchema:
    node_types: tuple[NodeType, ...] = ()
    edge_types: tuple[EdgeType, ...] = ()

    def node(self, label: str) -> NodeType | None:
        return next((n for n in self.node_types if n.label == label), None)

    def edges_with_label(self, label: str) -> list[EdgeType]:
        return [e for e in self.edge_types if e.matches(label)]

    def edge(self, label: str, source_label: str, target_label: str) -> EdgeType | None:
        for e in self.edge_types:
            if e.matches(label) and e.source_label == source_label and e.target_label == target_label:
                return e
        return None


@dataclass(frozen=True)
class EdbOrigin:
    kind: Literal["node", "edge"]
    type_name: str


@dataclass(frozen=True)
class EdbDecl:
    name: str
    columns: tuple[tuple[str, ColumnType], ...]
    origin: EdbOrigin

    @property
    def arity(self) -> int:
        return len(self.columns)

    def column_index(self, name: str) -> int:
        for i, (col, _) in enumerate(self.columns):
            if col == name:
                return i
        raise KeyError(name)


@dataclass(frozen=True)
class DlSchema:
    edbs: tuple[EdbDecl, ...] = ()

    def get(self, name: str) -> EdbDecl | None:
        return next((e for e in self.edbs if e.name == name), None)

    def __contains__(self, name: str) -> bool:
        return self.get(name) is not None

    def for_node(self, label: str) -> EdbDecl:
        for e in self.edbs:
            if e.origin.kind == "node" and e.name == label:
                return e
        raise KeyError(label)

    def for_edge(self, edge: EdgeType) -> EdbDecl:
        return self.get(edge_edb_name(edge))

    def node_edb_names(self) -> set[str]:
        return {e.name for e in self.edbs if e.origin.kind == "node"}


_CASE_BOUNDARY = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")


def upper_snake(label: str) -> str:
    """``isLocatedIn`` -> ``IS_LOCATED_IN``; already-snake labels pass through."""
    return _CASE_BOUNDARY.sub("_", label).upper()


def edge_edb_name(edge: EdgeType) -> str:
    return f"{edge.source_label}_{upper_snake(edge.label)}_{edge.target_label}"


_RULES = [
    ("WS", r"\s+"),
    ("COMMENT", r"//[^\n]*"),
    ("ARROW", r"->"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("PUNCT", r"[(){}\[\]:,\-]"),
]


def parse_pg_schema(text: str) -> PropertyGraphSchema:
    """Parse a single ``CREATE GRAPH { ... }`` block.

    Edge endpoints name node *types* (``(: personType)``); they are resolved
    to node labels here, so the returned ``EdgeType`` carries labels.
    """
    cur = Cursor(tokenize(text, _RULES))
    kw = cur.expect("IDENT", "CREATE")
    cur.expect("IDENT", "GRAPH")
    cur.expect("PUNCT", "{")
    raw_nodes: list[NodeType] = []
    raw_edges: list[tuple[str, str, str, str, tuple[Property, ...], Span, Span, Span]] = []
    if not cur.at("PUNCT", "}"):
        while True:
            _parse_item(cur, raw_nodes, raw_edges)
            if not cur.accept("PUNCT", ","):
                break
    cur.expect("PUNCT", "}")
    cur.expect("EOF", what="end of input")
    del kw

    by_type: dict[str, NodeType] = {}
    labels: set[str] = set()
    for n in raw_nodes:
        if n.type_name in by_type:
            raise DuplicateType(f"duplicate node type {n.type_name}", line=n.span.line, column=n.span.column)
        if n.label in labels:
            raise DuplicateType(f"duplicate node label {n.label}", line=n.span.line, column=n.span.column)
        by_type[n.type_name] = n
        labels.add(n.label)

    edges: list[EdgeType] = []
    edge_names: set[str] = set()
    for type_name, label, src, tgt, props, span, src_span, tgt_span in raw_edges:
        if type_name in edge_names or type_name in by_type:
            raise DuplicateType(f"duplicate edge type {type_name}", line=span.line, column=span.column)
        edge_names.add(type_name)
        for ref, ref_span in ((src, src_span), (tgt, tgt_span)):
            if ref not in by_type:
                raise UnknownLabel(
                    f"edge type {type_name} references undeclared node type {ref}",
                    line=ref_span.line,
                    column=ref_span.column,
                )
        edges.append(EdgeType(type_name, label, by_type[src].label, by_type[tgt].label, props, span))
    return PropertyGraphSchema(tuple(raw_nodes), tuple(edges))


def _parse_item(cur: Cursor, nodes: list, edges: list) -> None:
    start = cur.expect("PUNCT", "(")
    if cur.accept("PUNCT", ":"):
        src_tok = cur.expect("IDENT", what="node type name")
        cur.expect("PUNCT", ")")
        cur.expect("PUNCT", "-")
        cur.expect("PUNCT", "[")
        name_tok = cur.expect("IDENT", what="edge type name")
        cur.expect("PUNCT", ":")
        label = cur.expect("IDENT", what="edge label").text
        props = _parse_props(cur, required=False)
        cur.expect("PUNCT", "]")
        cur.expect("ARROW", what="'->'")
        cur.expect("PUNCT", "(")
        cur.expect("PUNCT", ":")
        tgt_tok = cur.expect("IDENT", what="node type name")
        cur.expect("PUNCT", ")")
        edges.append((name_tok.text, label, src_tok.text, tgt_tok.text, props, start.span, src_tok.span, tgt_tok.span))
        return
    name_tok = cur.expect("IDENT", what="node type name")
    cur.expect("PUNCT", ":")
    label = cur.expect("IDENT", what="node label").text
    props = _parse_props(cur, required=True)
    cur.expect("PUNCT", ")")
    id_prop = next((p for p in props if p.name == "id"), None)
    if id_prop is None or id_prop.type != "INT":
        raise SchemaError(
            f"node type {name_tok.text} needs an 'id INT' property", line=start.line, column=start.column
        )
    nodes.append(NodeType(name_tok.text, label, props, start.span))


def _parse_props(cur: Cursor, required: bool) -> tuple[Property, ...]:
    if not cur.at("PUNCT", "{"):
        if required:
            cur.fail("expected '{'")
        return ()
    cur.expect("PUNCT", "{")
    props: list[Property] = []
    seen: set[str] = set()
    if not cur.at("PUNCT", "}"):
        while True:
            name = cur.expect("IDENT", what="property name")
            ty = cur.expect("IDENT", what="property type")
            if ty.text not in SCALAR_TO_COLUMN:
                cur.fail(f"unsupported property type {ty.text}; expected INT or STRING", ty)
            if name.text in seen:
                raise SchemaError(f"duplicate property {name.text}", line=name.line, column=name.column)
            seen.add(name.text)
            props.append(Property(name.text, ty.text))
            if not cur.accept("PUNCT", ","):
                break
    cur.expect("PUNCT", "}")
    return tuple(props)


def format_pg_schema(schema: PropertyGraphSchema) -> str:
    type_of_label = {n.label: n.type_name for n in schema.node_types}

    def props(ps: tuple[Property, ...]) -> str:
        return "{" + ", ".join(f"{p.name} {p.type}" for p in ps) + "}"

    items = [f"  ( {n.type_name}:{n.label} {props(n.properties)})" for n in schema.node_types]
    for e in schema.edge_types:
        body = f" {props(e.properties)}" if e.properties else ""
        items.append(
            f"  (: {type_of_label[e.source_label]} )-[ {e.type_name}: {e.label}{body} ]->"
            f"(: {type_of_label[e.target_label]} )"
        )
    if not items:
        return "CREATE GRAPH { }\n"
    return "CREATE GRAPH {\n" + ",\n".join(items) + "\n}\n"


def derive_dl_schema(schema: PropertyGraphSchema) -> DlSchema:
    edbs: list[EdbDecl] = []
    for n in schema.node_types:
        # id first, then the remaining properties in declared order
        cols = [("id", "number")] + [(p.name, SCALAR_TO_COLUMN[p.type]) for p in n.properties if p.name != "id"]
        edbs.append(EdbDecl(n.label, tuple(cols), EdbOrigin("node", n.type_name)))
    for e in schema.edge_types:
        cols = [("id1", "number"), ("id2", "number")]
        cols += [(p.name, SCALAR_TO_COLUMN[p.type]) for p in e.properties]
        names = [c for c, _ in cols]
        if len(set(names)) != len(names):
            raise NameCollision(f"edge type {e.type_name} has a property clashing with id1/id2")
        edbs.append(EdbDecl(edge_edb_name(e), tuple(cols), EdbOrigin("edge", e.type_name)))
    seen: set[str] = set()
    for d in edbs:
        if d.name in seen:
            raise NameCollision(f"generated EDB name {d.name} is not unique")
        seen.add(d.name)
    return DlSchema(tuple(edbs))
