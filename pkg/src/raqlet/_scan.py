"""Tiny regex tokenizer and token cursor shared by the three text parsers."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .diagnostics import Span
from .errors import RaqletSyntaxError


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int

    @property
    def span(self) -> Span:
        return Span(self.line, self.column)


EOF = "EOF"


def tokenize(text: str, rules: Sequence[tuple[str, str]], skip: Sequence[str] = ("WS", "COMMENT")) -> list[Token]:
    """Split ``text`` by the first matching rule at each offset.

    Rules are tried in order, so multi-character operators must precede their
    prefixes.
    """
    pattern = re.compile("|".join(f"(?P<{kind}>{rx})" for kind, rx in rules))
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = pattern.match(text, pos)
        if m is None or m.end() == pos:
            raise RaqletSyntaxError(
                f"unexpected character {text[pos]!r}", line=line, column=pos - line_start + 1
            )
        kind = m.lastgroup
        if kind not in skip:
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token(EOF, "", line, pos - line_start + 1))
    return tokens


class Cursor:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def at(self, kind: str, text: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (text is None or t.text == text)

    def accept(self, kind: str, text: str | None = None) -> Token | None:
        if self.at(kind, text):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, kind: str, text: str | None = None, what: str | None = None) -> Token:
        t = self.accept(kind, text)
        if t is None:
            self.fail(f"expected {what or text or kind}")
        return t

    def fail(self, message: str, tok: Token | None = None):
        t = tok or self.tok
        found = "end of input" if t.kind == EOF else repr(t.text)
        raise RaqletSyntaxError(f"{message}, found {found}", line=t.line, column=t.column)
