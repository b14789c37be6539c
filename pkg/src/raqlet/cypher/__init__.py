from .ast import (
    AggregateCall,
    And,
    Comparison,
    CypherQuery,
    EdgePatternAst,
    Literal,
    MatchClause,
    NodePatternAst,
    PatternAst,
    PropertyAccess,
    ReturnClause,
    ReturnItem,
    StarLength,
    VariableRef,
    WhereClause,
)
from .normalize import normalize_query
from .parser import parse_cypher

__all__ = [
    "AggregateCall",
    "And",
    "Comparison",
    "CypherQuery",
    "EdgePatternAst",
    "Literal",
    "MatchClause",
    "NodePatternAst",
    "PatternAst",
    "PropertyAccess",
    "ReturnClause",
    "ReturnItem",
    "StarLength",
    "VariableRef",
    "WhereClause",
    "normalize_query",
    "parse_cypher",
]
