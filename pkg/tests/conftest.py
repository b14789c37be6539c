from __future__ import annotations

from pathlib import Path

import pytest

from raqlet.schema import derive_dl_schema, parse_pg_schema

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def golden() -> Path:
    return GOLDEN


@pytest.fixture(scope="session")
def fig_schema():
    return parse_pg_schema((GOLDEN / "fig2a.pgs").read_text())


@pytest.fixture(scope="session")
def fig_dl(fig_schema):
    return derive_dl_schema(fig_schema)


@pytest.fixture(scope="session")
def knows_schema():
    return parse_pg_schema(
        "CREATE GRAPH { (personType: Person {id INT, name STRING}), (:personType)-[knowsType: knows]->(:personType) }"
    )
