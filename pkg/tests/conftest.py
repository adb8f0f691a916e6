import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

DATA = Path(__file__).parent / "data"
FIXTURES = Path(__file__).parent / "fixtures"


def as_float(v):
    if isinstance(v, list):
        return [as_float(x) for x in v]
    return float(Fraction(v)) if isinstance(v, str) else v


@pytest.fixture(scope="session")
def derived():
    """Reference values frozen by scripts/derive_oracles.py."""
    return json.loads((DATA / "derived.json").read_text())


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


# (criterion, passed, detail) rows filled in by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
