"""Markets of finitely many assets priced by a sublinear ask functional.

The traded set is

    X = { sum_i w_i * payoff_i + s * 1 + lam : w_i >= 0, sum_i w_i + s <= 1, lam >= 0 }

i.e. the convex hull of the generators, the numeraire and the origin, made
closed under adding cash.  The price of a traded claim is the cost of its
cheapest exact representation, ``sum_i w_i * ask_i + s + lam``.  This is
convex and subadditive by construction; monotonicity and absence of
arbitrage are not, and :func:`validate` checks them.

Superhedging-type functionals work with conic weights ``z_i >= 0``.  The
reparametrization ``z = lam * w`` is exact: the cheapest representation of
``lam * X`` for a generator combination costs ``lam`` times that of ``X``
whenever both are traded, and ``z = 0`` is the ``lam -> 0`` limit.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import lp
from .lp import LPProblem, Status, as_rational
from .order import (
    CommonOrder,
    DimensionMismatch,
    SampleSpace,
    dominates,
    strictly_positive,
    truncate,
)


class NotRepresentable(ValueError):
    """The claim is not an element of the traded set."""


class NegativeStrike(ValueError):
    pass


class UnboundedBelow(ArithmeticError):
    """An LP that should be bounded is not; the market admits unlimited arbitrage."""


@dataclass(frozen=True)
class Asset:
    name: str
    payoff: tuple
    ask: Fraction

    def __post_init__(self):
        object.__setattr__(self, "payoff", tuple(as_rational(v) for v in self.payoff))
        object.__setattr__(self, "ask", as_rational(self.ask))


@dataclass(frozen=True)
class Market:
    space: SampleSpace
    order: CommonOrder
    assets: tuple = ()

    def __post_init__(self):
        assets = tuple(self.assets)
        n = len(self.space)
        names = [a.name for a in assets]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate asset names: {names}")
        for a in assets:
            if len(a.payoff) != n:
                raise DimensionMismatch(f"asset {a.name!r} has {len(a.payoff)} payoffs, {n} states")
        if self.order.space != self.space:
            raise ValueError("order and market live on different sample spaces")
        object.__setattr__(self, "assets", assets)

    @property
    def n_states(self) -> int:
        return len(self.space)

    @property
    def payoffs(self) -> list:
        return [a.payoff for a in self.assets]

    @property
    def asks(self) -> list:
        return [a.ask for a in self.assets]

    def claim(self, values) -> tuple:
        return self.space.claim(values)

    def with_asks(self, asks: Sequence) -> "Market":
        return Market(
            self.space,
            self.order,
            tuple(Asset(a.name, a.payoff, ask) for a, ask in zip(self.assets, asks)),
        )

    def _check(self, f):
        if len(f) != self.n_states:
            raise DimensionMismatch(f"claim of length {len(f)} on {self.n_states} states")


@dataclass(frozen=True)
class PriceQuote:
    """Value and an optimal representation ``sum w_i X_i + s + lam``."""

    value: Fraction
    weights: tuple
    numeraire: Fraction
    cash: Fraction
    shift: Fraction = Fraction(0)

    def replicate(self, market: Market) -> tuple:
        out = []
        for j in range(market.n_states):
            v = self.numeraire + self.cash
            for w, a in zip(self.weights, market.assets):
                v += w * a.payoff[j]
            out.append(v - self.shift)
        return tuple(out)


@dataclass(frozen=True)
class HedgeQuote:
    """Value and conic strategy: ``z`` units of each generator, ``cash``, ``offset``."""

    value: Fraction
    weights: tuple
    cash: Fraction
    offset: Fraction = Fraction(0)


def _representation_lp(market: Market, target, with_shift: bool) -> LPProblem:
    k, n = len(market.assets), market.n_states
    # variables: w_1..w_k, s, lam[, t]
    width = k + 2 + (1 if with_shift else 0)
    A_eq, b_eq = [], []
    for j in range(n):
        row = [a.payoff[j] for a in market.assets] + [1, 1]
        if with_shift:
            row.append(-1)
        A_eq.append(row)
        b_eq.append(target[j])
    budget = [1] * k + [1, 0] + ([0] if with_shift else [])
    cost = list(market.asks) + [1, 1] + ([-1] if with_shift else [])
    lower = [0] * (k + 2) + ([None] if with_shift else [])
    assert len(cost) == width
    return LPProblem.build(cost, A_ub=[budget], b_ub=[1], A_eq=A_eq, b_eq=b_eq, lower=lower)


def price(market: Market, target: Sequence) -> PriceQuote:
    """Cheapest exact representation of ``target`` within the traded set."""
    market._check(target)
    sol = lp.solve(_representation_lp(market, target, with_shift=False))
    if sol.status is Status.INFEASIBLE:
        raise NotRepresentable(f"claim {tuple(map(str, target))} is not traded")
    if sol.status is Status.UNBOUNDED:  # pragma: no cover - bounded feasible set
        raise UnboundedBelow("price LP unbounded")
    k = len(market.assets)
    x = sol.point
    return PriceQuote(sol.value, tuple(x[:k]), x[k], x[k + 1])


def is_representable(market: Market, target: Sequence) -> bool:
    try:
        price(market, target)
    except NotRepresentable:
        return False
    return True


def cash_additive_part_quote(market: Market, target: Sequence) -> PriceQuote:
    market._check(target)
    sol = lp.solve(_representation_lp(market, target, with_shift=True))
    if sol.status is Status.INFEASIBLE:
        raise NotRepresentable(f"no cash shift of {tuple(map(str, target))} is traded")
    if sol.status is Status.UNBOUNDED:
        raise UnboundedBelow("cash-additive part is -inf: the numeraire is underpriced")
    k = len(market.assets)
    x = sol.point
    return PriceQuote(sol.value, tuple(x[:k]), x[k], x[k + 1], shift=x[k + 2])


def cash_additive_part(market: Market, target: Sequence) -> Fraction:
    """``inf_t price(target + t) - t`` over shifts that keep the claim traded."""
    return cash_additive_part_quote(market, target).value


def _hedge_lp(market: Market, g, with_offset: bool) -> LPProblem:
    # variables: z_1..z_k, u[, a];  rows: -(sum z X + u - a)(w) <= -g(w) on live states
    k = len(market.assets)
    A_ub, b_ub = [], []
    for j in market.order.live_indices:
        row = [-a.payoff[j] for a in market.assets] + [-1]
        if with_offset:
            row.append(1)
        A_ub.append(row)
        b_ub.append(-g[j])
    cost = list(market.asks) + [1] + ([-1] if with_offset else [])
    lower = [0] * (k + 1) + ([None] if with_offset else [])
    return LPProblem.build(cost, A_ub=A_ub, b_ub=b_ub, lower=lower)


def superhedge_quote(market: Market, g: Sequence) -> HedgeQuote:
    market._check(g)
    sol = lp.solve(_hedge_lp(market, g, with_offset=False))
    if sol.status is not Status.OPTIMAL:
        raise UnboundedBelow(f"superhedging LP is {sol.status.value}")
    k = len(market.assets)
    return HedgeQuote(sol.value, tuple(sol.point[:k]), sol.point[k])


def superhedge(market: Market, g: Sequence) -> Fraction:
    """Cheapest conic strategy plus non-negative cash dominating ``g``."""
    return superhedge_quote(market, g).value


def completion_quote(market: Market, f: Sequence) -> HedgeQuote:
    market._check(f)
    sol = lp.solve(_hedge_lp(market, f, with_offset=True))
    if sol.status is not Status.OPTIMAL:
        raise UnboundedBelow(
            f"completion LP is {sol.status.value}: the market has no pricing measure"
        )
    k = len(market.assets)
    x = sol.point
    return HedgeQuote(sol.value, tuple(x[:k]), x[k], x[k + 1])


def completion_price(market: Market, f: Sequence) -> Fraction:
    """``inf { lam*pi(X) - a : lam*X >=* f + a }``, a cash-additive price."""
    return completion_quote(market, f).value


def cone_distance(market: Market, f: Sequence) -> Fraction:
    """Smallest achievable live maximum of ``f - sum z_i (X_i - ask_i)``.

    ``f`` lies in the uniform closure of the cone of claims dominated by
    scaled net positions ``lam * (X - pi(X))`` exactly when this is ``<= 0``.
    Cash cancels inside ``X - pi(X)`` so only generators appear.
    """
    market._check(f)
    k = len(market.assets)
    A_ub, b_ub = [], []
    for j in market.order.live_indices:
        # f(w) - sum z_i (X_i(w) - ask_i) <= v
        A_ub.append([-(a.payoff[j] - a.ask) for a in market.assets] + [-1])
        b_ub.append(-f[j])
    prob = LPProblem.build([0] * k + [1], A_ub=A_ub, b_ub=b_ub, lower=[0] * k + [None])
    sol = lp.solve(prob)
    if sol.status is not Status.OPTIMAL:
        raise UnboundedBelow("cone distance is -inf: some net position is a free lunch")
    return sol.value


def payoff_levels(payoff: Sequence) -> list:
    return sorted(set(payoff))


def call_overwrite_extension(market: Market, strike_grid: Sequence = ()) -> list:
    """Truncations ``X ^ k`` of each generator over the strike grid.

    The grid is extended by the generator's own payoff levels and by
    ``+inf``; on a finite space ``X ^ k`` only changes at those levels.
    Duplicates are removed, order is generator-major then strike-ascending.
    """
    strikes = []
    for k in strike_grid:
        if k is None:
            continue
        k = as_rational(k)
        if k < 0:
            raise NegativeStrike(f"strike {k} < 0")
        strikes.append(k)
    out = []
    seen = set()
    for a in market.assets:
        grid = sorted(set(strikes) | set(payoff_levels(a.payoff)))
        for k in grid + [None]:
            claim = truncate(a.payoff, k)
            if claim not in seen:
                seen.add(claim)
                out.append(claim)
    return out


@dataclass
class ValidationReport:
    numeraire_price_ok: bool
    numeraire_price: Optional[Fraction] = None
    monotonicity_violations: list = field(default_factory=list)
    arbitrage_violations: list = field(default_factory=list)
    messages: list = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return (
            self.numeraire_price_ok
            and not self.monotonicity_violations
            and not self.arbitrage_violations
        )


def random_portfolio(market: Market, rng: random.Random) -> tuple:
    """A random traded claim ``sum w_i X_i + s + lam`` with small rational weights."""
    k = len(market.assets)
    raw = [rng.randint(0, 4) for _ in range(k + 2)]  # last entry is the unused budget
    total = sum(raw) or 1
    w = [Fraction(r, total) for r in raw]
    lam = Fraction(rng.randint(0, 4), 2)
    s = w[k]
    out = []
    for j in range(market.n_states):
        v = s + lam + sum((w[i] * market.assets[i].payoff[j] for i in range(k)), Fraction(0))
        out.append(v)
    return tuple(out)


def validate(market: Market, sample_count: int = 32, seed: int = 0) -> ValidationReport:
    """Check normalization, no-arbitrage and monotonicity of the ask functional.

    Deterministic checks: ``price(1) == 1``; every generator that is
    strictly positive has a positive price; no generator can be
    superhedged more cheaply than it is quoted (otherwise the functional
    cannot be both monotone and positively homogeneous).  Sampled checks
    draw ``sample_count`` random traded claims and test every dominated
    pair among them, the generators, ``0`` and ``1``.
    """
    one = market.space.constant(1)
    zero = market.space.constant(0)
    mode = lp.current_mode()
    tol = 0 if mode.exact else mode.tol
    p1 = price(market, one).value
    report = ValidationReport(numeraire_price_ok=abs(p1 - 1) <= tol, numeraire_price=p1)
    if not report.numeraire_price_ok:
        report.messages.append(f"numeraire priced at {p1}, expected 1")
        return report

    rng = random.Random(seed)
    pool = [("0", zero), ("1", one)]
    pool += [(a.name, a.payoff) for a in market.assets]
    pool += [(f"sample{i}", random_portfolio(market, rng)) for i in range(sample_count)]
    prices = {}
    for label, claim in pool:
        prices[claim] = price(market, claim).value

    for label, claim in pool:
        if strictly_positive(market.order, claim) and prices[claim] <= tol:
            report.arbitrage_violations.append({"claim": label, "payoff": claim, "price": prices[claim]})

    for a in market.assets:
        hedge = superhedge_quote(market, a.payoff)
        if hedge.value < prices[a.payoff] - tol:
            report.monotonicity_violations.append(
                {
                    "dominating": {"weights": hedge.weights, "cash": hedge.cash},
                    "dominated": a.name,
                    "dominating_cost": hedge.value,
                    "dominated_price": prices[a.payoff],
                }
            )

    seen = set()
    for la, fa in pool:
        for lb, fb in pool:
            if fa == fb or (fa, fb) in seen:
                continue
            seen.add((fa, fb))
            if dominates(market.order, fa, fb) and prices[fa] < prices[fb] - tol:
                report.monotonicity_violations.append(
                    {
                        "dominating": la,
                        "dominated": lb,
                        "dominating_cost": prices[fa],
                        "dominated_price": prices[fb],
                    }
                )
    if report.arbitrage_violations:
        report.messages.append(f"{len(report.arbitrage_violations)} arbitrage violation(s)")
    if report.monotonicity_violations:
        report.messages.append(f"{len(report.monotonicity_violations)} monotonicity violation(s)")
    return report
