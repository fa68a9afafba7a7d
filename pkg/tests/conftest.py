import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
FIXTURES = REPO / "fixtures"

sys.path.insert(0, str(REPO / "src"))

from respo.model import OMQ  # noqa: E402
from respo.textio import parse_abox, parse_query, parse_tbox  # noqa: E402


def load_fixture(stem: str):
    tbox = parse_tbox((FIXTURES / f"{stem}.tbox").read_text(encoding="utf-8"))
    abox = parse_abox((FIXTURES / f"{stem}.abox").read_text(encoding="utf-8"))
    query = parse_query((FIXTURES / f"{stem}.query").read_text(encoding="utf-8"))
    return tbox, abox, query


@pytest.fixture(scope="session")
def fig1():
    tbox, abox, query = load_fixture("fig1")
    return OMQ(tbox, query), abox


@pytest.fixture(scope="session")
def variant():
    tbox, abox, query = load_fixture("variant")
    return OMQ(tbox, query), abox
