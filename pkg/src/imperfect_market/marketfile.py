"""Line-oriented market files.

Example::

    imperfect-market 1
    # states, then negligible sets, assets, optional priors and strikes
    states a b c
    negligible c
    asset A ask 1/2 payoff 1 0 5
    strikes 1 2

Numbers are exact: integers, finite decimals (``0.25``) or fractions
(``1/4``).  The numeraire (payoff 1, ask 1) is implicit and never listed.
See ``docs/format.md`` for the full grammar.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .market import Asset, Market, validate
from .order import (
    AllStatesNegligible,
    PriorFamily,
    SampleSpace,
    order_from_negligible_sets,
    order_from_priors,
)

SCHEMA_NAME = "imperfect-market"
SCHEMA_VERSION = 1

_EXACT = re.compile(r"^[+-]?\d+(?:\.\d+)?(?:/\d+)?$")
_FLOAT = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")
_LABEL = re.compile(r"^[A-Za-z0-9_.:-]+$")


class MarketFileError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def parse_number(token: str, exact: bool = True, line=None, field=None) -> Fraction:
    if _EXACT.match(token) and not ("." in token and "/" in token):
        try:
            value = Fraction(token)
        except ZeroDivisionError:
            raise MarketFileError(f"{token!r} has a zero denominator", line, field) from None
    elif not exact and _FLOAT.match(token):
        value = Fraction(float(token))
    else:
        kind = "exact number (integer, decimal or p/q)" if exact else "number"
        raise MarketFileError(f"{token!r} is not an {kind}", line, field)
    return value


def format_number(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass
class MarketFile:
    states: list
    negligible: list = field(default_factory=list)  # list of lists of labels
    assets: list = field(default_factory=list)  # (name, payoff list, ask)
    priors: list = field(default_factory=list)
    strikes: list = field(default_factory=list)
    version: int = SCHEMA_VERSION

    def serialize(self) -> str:
        lines = [f"{SCHEMA_NAME} {self.version}", "states " + " ".join(self.states)]
        for g in self.negligible:
            lines.append("negligible " + " ".join(g))
        for name, payoff, ask in self.assets:
            lines.append(
                f"asset {name} ask {format_number(ask)} payoff "
                + " ".join(format_number(v) for v in payoff)
            )
        for prior in self.priors:
            lines.append("prior " + " ".join(format_number(p) for p in prior))
        if self.strikes:
            lines.append("strikes " + " ".join(format_number(k) for k in self.strikes))
        return "\n".join(lines) + "\n"

    def to_market(self) -> Market:
        try:
            space = SampleSpace(tuple(self.states))
            if self.priors:
                order = order_from_priors(PriorFamily(space, tuple(self.priors)))
                if self.negligible:
                    declared = order_from_negligible_sets(space, self.negligible)
                    if declared.negligible_core != order.negligible_core:
                        raise MarketFileError(
                            "negligible sets disagree with the null states of the priors",
                            field="negligible",
                        )
            else:
                order = order_from_negligible_sets(space, self.negligible)
            assets = tuple(Asset(name, tuple(p), ask) for name, p, ask in self.assets)
            return Market(space, order, assets)
        except MarketFileError:
            raise
        except (AllStatesNegligible, KeyError, ValueError) as exc:
            raise MarketFileError(str(exc)) from exc


def parse(text: str, exact: bool = True) -> MarketFile:
    mf = None
    seen_states = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if mf is None:
            if head != SCHEMA_NAME or len(tokens) != 2:
                raise MarketFileError(f"expected header '{SCHEMA_NAME} <version>'", lineno, "header")
            if tokens[1] != str(SCHEMA_VERSION):
                raise MarketFileError(f"unsupported schema version {tokens[1]!r}", lineno, "header")
            mf = MarketFile(states=[])
            continue
        if head == "states":
            if seen_states:
                raise MarketFileError("duplicate 'states' line", lineno, "states")
            labels = tokens[1:]
            if not labels:
                raise MarketFileError("no states listed", lineno, "states")
            for lab in labels:
                if not _LABEL.match(lab):
                    raise MarketFileError(f"bad state label {lab!r}", lineno, "states")
            if len(set(labels)) != len(labels):
                raise MarketFileError("duplicate state labels", lineno, "states")
            mf.states = labels
            seen_states = True
            continue
        if not seen_states:
            raise MarketFileError(f"'{head}' before 'states'", lineno, head)
        n = len(mf.states)
        if head == "negligible":
            labels = tokens[1:]
            unknown = [lab for lab in labels if lab not in mf.states]
            if unknown:
                raise MarketFileError(f"unknown states {unknown}", lineno, "negligible")
            mf.negligible.append(labels)
        elif head == "asset":
            if len(tokens) < 5 or tokens[2] != "ask" or tokens[4] != "payoff":
                raise MarketFileError(
                    "expected 'asset <name> ask <number> payoff <n numbers>'", lineno, "asset"
                )
            name = tokens[1]
            if not _LABEL.match(name):
                raise MarketFileError(f"bad asset name {name!r}", lineno, "asset")
            if any(a[0] == name for a in mf.assets):
                raise MarketFileError(f"duplicate asset {name!r}", lineno, "asset")
            ask = parse_number(tokens[3], exact, lineno, "ask")
            payoff = [parse_number(t, exact, lineno, "payoff") for t in tokens[5:]]
            if len(payoff) != n:
                raise MarketFileError(f"{len(payoff)} payoffs for {n} states", lineno, "payoff")
            mf.assets.append((name, payoff, ask))
        elif head == "prior":
            prior = [parse_number(t, exact, lineno, "prior") for t in tokens[1:]]
            if len(prior) != n:
                raise MarketFileError(f"{len(prior)} probabilities for {n} states", lineno, "prior")
            if any(p < 0 for p in prior) or sum(prior) != 1:
                raise MarketFileError("prior must be non-negative and sum to 1", lineno, "prior")
            mf.priors.append(prior)
        elif head == "strikes":
            ks = [parse_number(t, exact, lineno, "strikes") for t in tokens[1:]]
            if any(k < 0 for k in ks):
                raise MarketFileError("strikes must be non-negative", lineno, "strikes")
            mf.strikes.extend(ks)
        else:
            raise MarketFileError(f"unknown directive {head!r}", lineno, head)
    if mf is None:
        raise MarketFileError("empty market file", None, "header")
    if not seen_states:
        raise MarketFileError("missing 'states' line", None, "states")
    mf.to_market()  # surface semantic errors (e.g. all states negligible) at parse time
    return mf


def load(path, exact: bool = True) -> MarketFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), exact=exact)


def _random_probability(rng: random.Random, n: int, support: list, full: bool) -> list:
    weights = [0] * n
    for i in support:
        weights[i] = rng.randint(1, 5) if full else rng.randint(0, 5)
    if not any(weights):
        weights[rng.choice(support)] = 1
    total = sum(weights)
    return [Fraction(w, total) for w in weights]


def _draw(rng: random.Random, n: int, k: int, full_support: bool) -> MarketFile:
    states = [f"w{i}" for i in range(1, n + 1)]
    core_size = rng.choice([0, 0, 1, 2]) if n > 1 else 0
    core_size = min(core_size, n - 1)
    core = sorted(rng.sample(range(n), core_size))
    live = [i for i in range(n) if i not in core]
    dead = None
    if not full_support and len(live) > 1 and k > 0 and rng.random() < 0.5:
        dead = rng.choice(live)
        live_support = [i for i in live if i != dead]
    else:
        live_support = live
    measures = []
    if full_support:
        measures.append([Fraction(1, len(live)) if i in live else Fraction(0) for i in range(n)])
    for _ in range(rng.randint(1, 2)):
        measures.append(_random_probability(rng, n, live_support, full_support))
    assets = []
    for j in range(k):
        payoff = [Fraction(rng.randint(0, 8), rng.choice([1, 2])) for _ in range(n)]
        if dead is not None and j == 0:
            # flat payoff with a bump at the dead state: pins its mass to zero
            level = Fraction(rng.randint(0, 4))
            payoff = [level + int(i == dead) for i in range(n)]
        ask = max(sum(p * m for p, m in zip(payoff, mu)) for mu in measures)
        assets.append((f"A{j + 1}", payoff, ask))
    negligible = [[states[i] for i in core]] if core else []
    return MarketFile(states=states, negligible=negligible, assets=assets)


def generate_market(
    seed: int, n_states: int, k_assets: int, full_support: bool = True, max_tries: int = 50
) -> MarketFile:
    """Seeded random market that passes :func:`validate`.

    Asks are the maximum of the payoff's expectation over a small family of
    probabilities supported off the core, which makes the ask functional
    normalized and arbitrage free.  With ``full_support`` the family
    contains the uniform law on live states, so every ask is at least the
    uniform integral and the market has no pure bubble; without it the
    family may miss states and the market may fail the test.  Draws that
    fail the sampled monotonicity check are redrawn from the same stream.
    """
    if n_states < 1 or k_assets < 0:
        raise ValueError("need n_states >= 1 and k_assets >= 0")
    rng = random.Random(seed)
    for _ in range(max_tries):
        mf = _draw(rng, n_states, k_assets, full_support)
        if validate(mf.to_market(), sample_count=8, seed=seed).accepted:
            return mf
    raise RuntimeError(f"no valid market after {max_tries} draws (seed {seed})")
