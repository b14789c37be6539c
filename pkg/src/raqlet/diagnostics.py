from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Literal

Severity = Literal["error", "warning", "info"]


@dataclass(frozen=True)
class Span:
    """1-based source position."""

    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    locus: str | None = None
    span: Span | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        d = {"code": self.code, "severity": self.severity, "message": self.message, "locus": self.locus}
        if self.span is not None:
            d["span"] = {"line": self.span.line, "column": self.span.column}
        return d

    def format(self) -> str:
        where = f" [{self.locus}]" if self.locus else ""
        pos = f" at {self.span}" if self.span else ""
        return f"{self.severity}: {self.code}{where}{pos}: {self.message}"


def error(code: str, message: str, locus: str | None = None, span: Span | None = None) -> Diagnostic:
    return Diagnostic("error", code, message, locus, span)


def warning(code: str, message: str, locus: str | None = None, span: Span | None = None) -> Diagnostic:
    return Diagnostic("warning", code, message, locus, span)


def info(code: str, message: str, locus: str | None = None, span: Span | None = None) -> Diagnostic:
    return Diagnostic("info", code, message, locus, span)


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity == "error" for d in diags)


def to_json(diags: Iterable[Diagnostic]) -> str:
    return json.dumps([d.to_dict() for d in diags], indent=2)
