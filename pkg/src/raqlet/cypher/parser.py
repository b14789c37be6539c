"""Recursive-descent parser for the Cypher subset.

Grammar::

    query   := match+ where? return
    match   := "MATCH" pattern ("," pattern)*
    pattern := node (edge node)*
    node    := "(" var? ":" Label map? ")"
    edge    := ("-" | "<-") "[" var? ":" Label len? "]" ("-" | "->")
    len     := "*" (int? ".." int?)?
    where   := "WHERE" expr
    return  := "RETURN DISTINCT" item ("," item)*
    item    := expr ("AS" ident)?
"""

from __future__ import annotations

from .._scan import Cursor, Token, tokenize
from ..errors import UnsupportedFeature, UnsupportedStarBounds
from .ast import (
    AggregateCall,
    Comparison,
    CypherQuery,
    EdgePatternAst,
    Expr,
    Literal,
    MatchClause,
    NodePatternAst,
    Operand,
    PatternAst,
    PropertyAccess,
    ReturnClause,
    ReturnItem,
    StarLength,
    VariableRef,
    WhereClause,
    conjoin,
    conjuncts,
)

_RULES = [
    ("WS", r"\s+"),
    ("COMMENT", r"//[^\n]*"),
    ("STRING", r"'(?:[^'\\\n]|\\.)*'"),
    ("INT", r"\d+"),
    ("RARROW", r"->"),
    ("LARROW", r"<-"),
    ("DOTDOT", r"\.\."),
    ("OP", r"<>|<=|>=|=|<|>"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("PUNCT", r"[()\[\]{}:,.*\-;]"),
]

_UNSUPPORTED_CLAUSES = {
    "OPTIONAL", "ORDER", "LIMIT", "SKIP", "WITH", "UNWIND", "UNION", "CREATE",
    "MERGE", "DELETE", "DETACH", "SET", "REMOVE", "CALL", "FOREACH",
}
_UNSUPPORTED_EXPR = {"OR", "XOR", "NOT", "IN", "IS", "CASE", "EXISTS", "STARTS", "ENDS", "CONTAINS"}
_AGGREGATES = {"count", "sum", "min", "max"}


def parse_cypher(text: str) -> CypherQuery:
    return _Parser(tokenize(text, _RULES)).query()


def _unsupported(tok: Token, what: str | None = None) -> UnsupportedFeature:
    return UnsupportedFeature(what or f"{tok.text} is not supported", line=tok.line, column=tok.column)


class _Parser(Cursor):
    def query(self) -> CypherQuery:
        clauses: list = []
        while True:
            self._reject_unsupported_clause()
            if not self.accept("IDENT", "MATCH"):
                break
            clauses.append(self.match())
        if not clauses:
            self.fail("expected MATCH")
        if self.accept("IDENT", "WHERE"):
            clauses.append(WhereClause(self.expr(allow_agg=False)))
            self._reject_unsupported_clause()
            if self.at("IDENT", "MATCH"):
                self.fail("WHERE must follow the last MATCH")
        ret = self.expect("IDENT", "RETURN", what="RETURN")
        if not self.accept("IDENT", "DISTINCT"):
            raise _unsupported(ret, "RETURN without DISTINCT is not supported; use RETURN DISTINCT")
        clauses.append(self.return_items())
        self.accept("PUNCT", ";")
        self._reject_unsupported_clause()
        self.expect("EOF", what="end of query")
        return CypherQuery(tuple(clauses))

    def _reject_unsupported_clause(self) -> None:
        t = self.tok
        if t.kind == "IDENT" and t.text in _UNSUPPORTED_CLAUSES:
            raise _unsupported(t)

    def match(self) -> MatchClause:
        patterns = [self.pattern()]
        while self.accept("PUNCT", ","):
            patterns.append(self.pattern())
        return MatchClause(tuple(patterns))

    def pattern(self) -> PatternAst:
        if self.at("IDENT") and self.peek().kind == "OP" and self.peek().text == "=":
            raise _unsupported(self.tok, "path variables are not supported")
        if self.at("IDENT") and self.tok.text in ("shortestPath", "allShortestPaths"):
            raise _unsupported(self.tok)
        elements: list = [self.node()]
        while self.at("PUNCT", "-") or self.at("LARROW"):
            elements.append(self.edge())
            elements.append(self.node())
        return PatternAst(tuple(elements))

    def node(self) -> NodePatternAst:
        start = self.expect("PUNCT", "(")
        var = self.accept("IDENT")
        if not self.accept("PUNCT", ":"):
            raise _unsupported(self.tok, "node patterns need a label")
        label = self.expect("IDENT", what="node label").text
        props: list[tuple[str, Literal]] = []
        if self.accept("PUNCT", "{"):
            if not self.at("PUNCT", "}"):
                while True:
                    key = self.expect("IDENT", what="property name").text
                    self.expect("PUNCT", ":")
                    props.append((key, self.literal()))
                    if not self.accept("PUNCT", ","):
                        break
            self.expect("PUNCT", "}")
        self.expect("PUNCT", ")")
        return NodePatternAst(var.text if var else None, label, tuple(props), start.span)

    def edge(self) -> EdgePatternAst:
        start = self.tok
        left = self.accept("LARROW") is not None
        if not left:
            self.expect("PUNCT", "-")
        if not self.at("PUNCT", "["):
            raise _unsupported(self.tok, "edge patterns need a bracketed label, e.g. -[:KNOWS]->")
        self.expect("PUNCT", "[")
        var = self.accept("IDENT")
        if not self.accept("PUNCT", ":"):
            raise _unsupported(self.tok, "edge patterns need a label")
        label = self.expect("IDENT", what="edge label").text
        length = self.star() if self.at("PUNCT", "*") else None
        self.expect("PUNCT", "]")
        right = self.accept("RARROW") is not None
        if not right:
            self.expect("PUNCT", "-", what="'-' or '->'")
        if left == right:
            raise _unsupported(start, "undirected and bidirectional edges are not supported")
        return EdgePatternAst(var.text if var else None, label, "left" if left else "right", length, start.span)

    def star(self) -> StarLength:
        star = self.expect("PUNCT", "*")
        lo = self.accept("INT")
        if self.accept("DOTDOT"):
            hi = self.accept("INT")
            mn = int(lo.text) if lo else 1
            mx = int(hi.text) if hi else None
        elif lo:
            mn = mx = int(lo.text)
        else:
            mn, mx = 1, None
        if mn < 1:
            raise UnsupportedStarBounds("variable-length edges need a minimum of at least 1", line=star.line, column=star.column)
        if mx is None and mn > 1:
            raise UnsupportedStarBounds(
                f"*{mn}.. without an upper bound is not supported", line=star.line, column=star.column
            )
        if mx is not None and mn > mx:
            raise UnsupportedStarBounds(f"empty range *{mn}..{mx}", line=star.line, column=star.column)
        return StarLength(mn, mx)

    def return_items(self) -> ReturnClause:
        items = [self.return_item()]
        while self.accept("PUNCT", ","):
            items.append(self.return_item())
        return ReturnClause(tuple(items))

    def return_item(self) -> ReturnItem:
        start = self.tok
        expr = self.operand(allow_agg=True)
        if self.at("OP"):
            raise _unsupported(self.tok, "comparisons in RETURN items are not supported")
        alias = self.expect("IDENT", what="alias").text if self.accept("IDENT", "AS") else str(expr)
        return ReturnItem(expr, alias, start.span)

    def expr(self, allow_agg: bool) -> Expr:
        parts = [self.comparison(allow_agg)]
        while True:
            t = self.tok
            if t.kind == "IDENT" and t.text in _UNSUPPORTED_EXPR:
                raise _unsupported(t)
            if not self.accept("IDENT", "AND"):
                break
            parts.append(self.comparison(allow_agg))
        flat = [c for part in parts for c in conjuncts(part)]
        return conjoin(flat)

    def comparison(self, allow_agg: bool) -> Expr:
        if self.accept("PUNCT", "("):
            inner = self.expr(allow_agg)
            self.expect("PUNCT", ")")
            return inner
        t = self.tok
        if t.kind == "IDENT" and t.text in _UNSUPPORTED_EXPR:
            raise _unsupported(t)
        left = self.operand(allow_agg)
        op = self.accept("OP")
        if op is None:
            self.fail("expected a comparison operator")
        right = self.operand(allow_agg)
        return Comparison(op.text, left, right)

    def operand(self, allow_agg: bool) -> Operand:
        t = self.tok
        if t.kind in ("INT", "STRING") or (t.kind == "PUNCT" and t.text == "-"):
            return self.literal()
        name = self.expect("IDENT", what="expression")
        if self.at("PUNCT", "("):
            if name.text.lower() not in _AGGREGATES:
                raise _unsupported(name, f"function {name.text} is not supported")
            if not allow_agg:
                raise _unsupported(name, "aggregates are only allowed in RETURN items")
            self.expect("PUNCT", "(")
            if self.at("IDENT", "DISTINCT"):
                raise _unsupported(self.tok, "DISTINCT inside aggregates is not supported")
            arg = self.operand(allow_agg=False)
            if not isinstance(arg, PropertyAccess):
                raise _unsupported(name, "aggregates must be applied to a property access")
            self.expect("PUNCT", ")")
            return AggregateCall(name.text.lower(), arg, name.span)
        if self.accept("PUNCT", "."):
            prop = self.expect("IDENT", what="property name")
            return PropertyAccess(name.text, prop.text, name.span)
        return VariableRef(name.text, name.span)

    def literal(self) -> Literal:
        t = self.tok
        if self.accept("PUNCT", "-"):
            n = self.expect("INT", what="integer")
            return Literal(-int(n.text), t.span)
        if self.accept("INT"):
            return Literal(int(t.text), t.span)
        if self.accept("STRING"):
            return Literal(_unescape(t), t.span)
        self.fail("expected a literal")


def _unescape(tok: Token) -> str:
    body = tok.text[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            nxt = body[i + 1]
            if nxt not in "'\\":
                raise _unsupported(tok, f"unsupported escape \\{nxt}")
            out.append(nxt)
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)
