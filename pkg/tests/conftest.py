from pathlib import Path

import pytest

from peercqa.lang import parse_system
from peercqa.relational import Atom

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load(name: str):
    return parse_system((FIXTURES / name).read_text())


def atoms(text: str) -> frozenset:
    """``"R1(a,b) R2(c,d)"`` -> set of Atom."""
    out = set()
    for tok in text.split():
        rel, rest = tok.split("(")
        out.add(Atom(rel, tuple(rest.rstrip(")").split(","))))
    return frozenset(out)


@pytest.fixture
def fix_a():
    return load("fix_a.p2p")


@pytest.fixture
def fix_b():
    return load("fix_b.p2p")


@pytest.fixture
def fix_c():
    return load("fix_c.p2p")


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
