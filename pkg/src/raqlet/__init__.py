"""Compile recursive property-graph queries to Datalog and SQL."""

__version__ = "0.1.0"
