"""Code generators for Souffle Datalog and SQL."""

from .souffle import emit_souffle
from .sql import DIALECTS, SqlDialect, emit_sql, emit_sql_ddl, get_dialect

__all__ = ["DIALECTS", "SqlDialect", "emit_sql", "emit_sql_ddl", "emit_souffle", "get_dialect"]
