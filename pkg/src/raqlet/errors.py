"""Exception hierarchy shared by every compiler stage."""

from __future__ import annotations


class RaqletError(Exception):
    """Base class for all errors raised by raqlet.

    ``code`` is a stable identifier that the CLI prints next to the message.
    """

    code = "ERROR"

    def __init__(self, message: str, *, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(self._format())

    def _format(self) -> str:
        if self.line is not None:
            return f"{self.message} (line {self.line}, column {self.column})"
        return self.message


class RaqletSyntaxError(RaqletError):
    code = "SYNTAX_ERROR"


class DuplicateType(RaqletError):
    code = "DUPLICATE_TYPE"


class UnknownLabel(RaqletError):
    code = "UNKNOWN_LABEL"


class UnknownProperty(RaqletError):
    code = "UNKNOWN_PROPERTY"


class SchemaError(RaqletError):
    code = "INVALID_SCHEMA"


class NameCollision(RaqletError):
    code = "NAME_COLLISION"


class UnsupportedFeature(RaqletError):
    code = "UNSUPPORTED_FEATURE"


class TypeMismatch(RaqletError):
    code = "TYPE_MISMATCH"


class UnboundVariable(RaqletError):
    code = "UNBOUND_VARIABLE"


class DuplicateAlias(RaqletError):
    code = "DUPLICATE_ALIAS"


class UnsupportedStarBounds(RaqletError):
    code = "UNSUPPORTED_STAR_BOUNDS"


class InvariantViolation(RaqletError):
    code = "INVARIANT_VIOLATION"


class UnstratifiedProgram(RaqletError):
    code = "UNSTRATIFIED"


class ArithmeticOverflow(RaqletError):
    code = "ARITHMETIC_OVERFLOW"


class EvaluationError(RaqletError):
    code = "EVALUATION_ERROR"


class FactParseError(RaqletError):
    code = "FACT_PARSE_ERROR"


class ArityMismatch(RaqletError):
    code = "ARITY_MISMATCH"


class UnsupportedConstruct(RaqletError):
    code = "UNSUPPORTED_CONSTRUCT"


class BackendIncompatible(RaqletError):
    code = "BACKEND_INCOMPATIBLE"

    def __init__(self, message: str, diagnostics=()):
        self.diagnostics = list(diagnostics)
        super().__init__(message)


# label of a diagnostic code -> exception type, used when a validation pass
# has to be turned back into a raised error
ERROR_BY_CODE: dict[str, type[RaqletError]] = {
    cls.code: cls
    for cls in (
        RaqletSyntaxError,
        DuplicateType,
        SchemaError,
        UnknownLabel,
        UnknownProperty,
        NameCollision,
        UnsupportedFeature,
        TypeMismatch,
        UnboundVariable,
        DuplicateAlias,
        UnsupportedStarBounds,
        InvariantViolation,
    )
}
