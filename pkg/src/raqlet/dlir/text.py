"""Textual DLIR: the Souffle-compatible surface syntax.

``render_dlir`` and ``parse_dlir`` are inverses: EDB declarations come first
(each followed by ``.input``), every IDB declaration is printed just before the
first rule that defines it, and ``.output`` directives close the file.
"""

from __future__ import annotations

from typing import Callable

from .._scan import Cursor, tokenize
from ..errors import RaqletSyntaxError
from ..schema import DlSchema
from .ir import (
    WILDCARD,
    Aggregate,
    Arith,
    Atom,
    Comparison,
    Const,
    Literal,
    Negation,
    PredicateDecl,
    Program,
    Rule,
    Term,
    Var,
    add_schema_decls,
)

_AGG_FUNCS = ("count", "sum", "min", "max")
_LINE_WIDTH = 80


def render_decl(d: PredicateDecl) -> str:
    cols = ", ".join(f"{c}: {t}" for c, t in d.columns)
    return f".decl {d.name}({cols})"


def render_rule(rule: Rule) -> str:
    flat = str(rule)
    if len(flat) <= _LINE_WIDTH or not rule.body:
        return flat
    parts = [str(b) for b in rule.body]
    return f"{rule.head} :- " + ",\n    ".join(parts) + "."


def render_dlir(prog: Program, input_directive: Callable[[PredicateDecl], str] | None = None) -> str:
    input_directive = input_directive or (lambda d: f".input {d.name}")
    lines: list[str] = []
    for d in prog.edb_decls:
        lines.append(render_decl(d))
        lines.append(input_directive(d))
    pending = [d for d in prog.idb_decls]
    for rule in prog.rules:
        names = [d.name for d in pending]
        if rule.head.pred in names:
            upto = names.index(rule.head.pred) + 1
            lines.extend(render_decl(d) for d in pending[:upto])
            del pending[:upto]
        lines.append(render_rule(rule))
    lines.extend(render_decl(d) for d in pending)
    lines.extend(f".output {o}" for o in prog.outputs)
    return "\n".join(lines) + "\n" if lines else ""


_RULES = [
    ("WS", r"\s+"),
    ("COMMENT", r"//[^\n]*|/\*(?:.|\n)*?\*/"),
    ("DIRECTIVE", r"\.(?:decl|input|output)\b"),
    ("STRING", r'"(?:[^"\\\n]|\\.)*"'),
    ("INT", r"\d+"),
    ("IF", r":-"),
    ("OP", r"!=|<=|>=|=|<|>"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("PUNCT", r"[(){},:.!+\-*]"),
]


def parse_dlir(text: str, dl_schema: DlSchema | None = None) -> Program:
    """Parse textual DLIR.

    Predicates used without a ``.decl`` are taken from ``dl_schema`` when it
    knows them; otherwise they are inferred (head predicates become IDBs,
    body-only predicates EDBs) with columns ``c1..cn``.
    """
    p = _Parser(tokenize(text, _RULES))
    decls, inputs, outputs, rules = p.program()
    for name, tok in inputs.items():
        if name not in decls:
            raise RaqletSyntaxError(f".input for undeclared predicate {name}", line=tok.line, column=tok.column)
    for name, tok in outputs.items():
        if name not in decls and not any(r.head.pred == name for r in rules):
            raise RaqletSyntaxError(f".output for undeclared predicate {name}", line=tok.line, column=tok.column)

    final: list[PredicateDecl] = []
    for name, (cols, _) in decls.items():
        final.append(PredicateDecl(name, cols, "EDB" if name in inputs else "IDB"))
    known = set(decls)
    heads = {r.head.pred for r in rules}
    for atom in _all_atoms(rules):
        if atom.pred in known:
            continue
        known.add(atom.pred)
        if dl_schema is not None and atom.pred in dl_schema and atom.pred not in heads:
            continue  # supplied by add_schema_decls below
        final.append(_infer_decl(atom, rules, "IDB" if atom.pred in heads else "EDB"))
    prog = Program(tuple(final), tuple(rules), tuple(outputs))
    return add_schema_decls(prog, dl_schema)


def _all_atoms(rules: list[Rule]):
    for r in rules:
        yield r.head
        yield from r.atoms()


def _infer_decl(atom: Atom, rules: list[Rule], kind: str) -> PredicateDecl:
    types = ["number"] * atom.arity
    for a in _all_atoms(rules):
        if a.pred == atom.pred:
            for i, t in enumerate(a.terms[: atom.arity]):
                if isinstance(t, Const) and isinstance(t.value, str):
                    types[i] = "symbol"
    return PredicateDecl(atom.pred, tuple((f"c{i + 1}", types[i]) for i in range(atom.arity)), kind)


class _Parser(Cursor):
    def program(self):
        decls: dict[str, tuple[tuple[tuple[str, str], ...], object]] = {}
        inputs: dict = {}
        outputs: dict = {}
        rules: list[Rule] = []
        while not self.at("EOF"):
            if self.at("DIRECTIVE"):
                kw = self.expect("DIRECTIVE")
                name = self.expect("IDENT", what="predicate name")
                if kw.text == ".decl":
                    if name.text in decls:
                        raise RaqletSyntaxError(f"duplicate .decl {name.text}", line=name.line, column=name.column)
                    decls[name.text] = (self.columns(), name)
                else:
                    if self.at("PUNCT", "("):
                        self.skip_params()
                    (inputs if kw.text == ".input" else outputs)[name.text] = name
                continue
            rules.append(self.rule())
        return decls, inputs, outputs, rules

    def columns(self) -> tuple[tuple[str, str], ...]:
        self.expect("PUNCT", "(")
        cols: list[tuple[str, str]] = []
        if not self.at("PUNCT", ")"):
            while True:
                name = self.expect("IDENT", what="column name").text
                self.expect("PUNCT", ":")
                ty = self.expect("IDENT", what="column type")
                if ty.text not in ("number", "symbol"):
                    self.fail(f"unsupported column type {ty.text}", ty)
                cols.append((name, ty.text))
                if not self.accept("PUNCT", ","):
                    break
        self.expect("PUNCT", ")")
        return tuple(cols)

    def skip_params(self) -> None:
        self.expect("PUNCT", "(")
        depth = 1
        while depth:
            t = self.tok
            if t.kind == "EOF":
                self.fail("unterminated directive parameters")
            if t.kind == "PUNCT" and t.text == "(":
                depth += 1
            elif t.kind == "PUNCT" and t.text == ")":
                depth -= 1
            self.i += 1

    def rule(self) -> Rule:
        head = self.atom()
        body: list[Literal] = []
        if self.accept("IF"):
            body.append(self.literal())
            while self.accept("PUNCT", ","):
                body.append(self.literal())
        self.expect("PUNCT", ".", what="'.' at end of rule")
        return Rule(head, tuple(body))

    def atom(self) -> Atom:
        name = self.expect("IDENT", what="predicate name")
        if name.text == "_":
            self.fail("expected predicate name", name)
        self.expect("PUNCT", "(")
        terms: list[Term] = []
        if not self.at("PUNCT", ")"):
            while True:
                terms.append(self.term())
                if not self.accept("PUNCT", ","):
                    break
        self.expect("PUNCT", ")")
        return Atom(name.text, tuple(terms))

    def term(self) -> Term:
        t = self.tok
        if self.accept("PUNCT", "-"):
            n = self.expect("INT", what="number")
            return Const(-int(n.text))
        if self.accept("INT"):
            return Const(int(t.text))
        if self.accept("STRING"):
            return Const(_unescape(t.text))
        if self.at("IDENT") and self.peek().kind == "PUNCT" and self.peek().text == "(":
            self.fail("expected a term")
        name = self.expect("IDENT", what="term")
        return WILDCARD if name.text == "_" else Var(name.text)

    def literal(self, in_aggregate: bool = False) -> Literal:
        if self.accept("PUNCT", "!"):
            if in_aggregate:
                self.fail("negation inside aggregates is not supported")
            return Negation(self.atom())
        if self.at("IDENT") and self.peek().kind == "PUNCT" and self.peek().text == "(":
            return self.atom()
        start = self.tok
        lhs = self.term()
        op = self.expect("OP", what="comparison operator")
        if (
            not in_aggregate
            and op.text == "="
            and self.at("IDENT")
            and self.tok.text in _AGG_FUNCS
            and not (self.peek().kind == "PUNCT" and self.peek().text in (",", ".", "+", "-", "*"))
        ):
            if not isinstance(lhs, Var):
                self.fail("aggregate result must be a variable", start)
            return self.aggregate(lhs)
        rhs = self.term()
        t = self.tok
        if t.kind == "PUNCT" and t.text in "+-*" and not in_aggregate:
            if op.text != "=" or not isinstance(lhs, Var):
                self.fail("arithmetic is only supported as 'var = term op term'", start)
            self.i += 1
            rhs2 = self.term()
            return Arith(lhs, rhs, t.text, rhs2)
        return Comparison(lhs, op.text, rhs)

    def aggregate(self, result: Var) -> Aggregate:
        func = self.expect("IDENT").text
        target = None
        if not self.at("PUNCT", ":"):
            target = self.term()
        self.expect("PUNCT", ":")
        body: list = []
        if self.accept("PUNCT", "{"):
            body.append(self.literal(in_aggregate=True))
            while self.accept("PUNCT", ","):
                body.append(self.literal(in_aggregate=True))
            self.expect("PUNCT", "}")
        else:
            body.append(self.atom())
        return Aggregate(result, func, target, tuple(body))


def _unescape(raw: str) -> str:
    body = raw[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        if body[i] == "\\" and i + 1 < len(body):
            nxt = body[i + 1]
            out.append({"n": "\n", "t": "\t"}.get(nxt, nxt))
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)
