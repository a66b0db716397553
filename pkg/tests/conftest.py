import random
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import pytest

from imperfect_market import marketfile
from imperfect_market.market import Asset, Market
from imperfect_market.order import CommonOrder, SampleSpace

FIXTURES = ("G1", "G2", "G3")


def fixture_path(name):
    return resources.files("imperfect_market") / "fixtures" / f"{name}.market"


def load_fixture(name):
    return marketfile.load(fixture_path(name))


@pytest.fixture(params=FIXTURES)
def fixture_market(request):
    return request.param, load_fixture(request.param).to_market()


@pytest.fixture
def g1():
    return load_fixture("G1").to_market()


@pytest.fixture
def g2():
    return load_fixture("G2").to_market()


@pytest.fixture
def g3():
    return load_fixture("G3").to_market()


def make_market(states, assets, core=()):
    space = SampleSpace(tuple(states))
    order = CommonOrder(space, frozenset(core))
    return Market(space, order, tuple(Asset(n, p, a) for n, p, a in assets))


@lru_cache(maxsize=None)
def random_markets(count=200):
    """Seeded valid markets, <= 6 states and <= 4 assets; every other one may fail NPB."""
    out = []
    for seed in range(count):
        rng = random.Random(seed)
        n, k = rng.randint(1, 6), rng.randint(0, 4)
        mf = marketfile.generate_market(seed, n, k, full_support=(seed % 2 == 0))
        out.append(mf.to_market())
    return tuple(out)


def F(x):
    return Fraction(x)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::" in nodeid and getattr(rep, "when", "call") == "call":
                lines.append((nodeid.split("::", 1)[1], "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, status in sorted(lines):
            terminalreporter.write_line(f"{status}  {name}")
