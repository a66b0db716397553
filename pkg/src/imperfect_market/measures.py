"""Pricing measures of a market and the verdicts built on them.

A pricing measure is a probability ``m`` vanishing on the negligible core
with ``sum_w X(w) m_w <= ask`` for every generator.  Generator constraints
suffice for all traded claims: integrals are linear and the price of a
traded claim is the cost of a representation by generators and cash.

The polytope's support function ``X -> max_m sum X m`` coincides, by LP
duality, with the completion price and with the cone distance of the
market module; the verdicts below are computed from the polytope and the
test-suite cross-checks them against those independent LPs.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import lp
from .lp import LPProblem, Status, as_rational
from .market import (
    Market,
    NotRepresentable,
    call_overwrite_extension,
    cash_additive_part,
    price,
)
from .order import strictly_positive, truncate


class EmptyPolytope(ValueError):
    """The market admits no pricing measure."""


class InconsistentMarket(EmptyPolytope):
    """A market that passed validation still has no pricing measure."""


class ZeroFundamentalValue(ZeroDivisionError):
    """``X != 0`` integrates to zero under the certificate measure."""


@dataclass(frozen=True)
class PricingPolytope:
    market: Market
    nonempty: bool

    @property
    def n(self) -> int:
        return self.market.n_states

    def constraints(self):
        """``(A_ub, b_ub, A_eq, b_eq)`` over ``m`` in state order."""
        n = self.n
        A_ub = [list(a.payoff) for a in self.market.assets]
        b_ub = list(self.market.asks)
        A_eq = [[1] * n]
        b_eq = [1]
        for i, s in enumerate(self.market.space.states):
            if s in self.market.order.negligible_core:
                A_eq.append([int(j == i) for j in range(n)])
                b_eq.append(0)
        return A_ub, b_ub, A_eq, b_eq

    def _lp(self, objective, extra_ub=(), extra_width=0):
        A_ub, b_ub, A_eq, b_eq = self.constraints()
        pad = [0] * extra_width
        A_ub = [r + pad for r in A_ub] + [r for r, _ in extra_ub]
        b_ub = b_ub + [b for _, b in extra_ub]
        A_eq = [r + pad for r in A_eq]
        lower = [0] * self.n + [None] * extra_width
        return LPProblem.build(objective, A_ub, b_ub, A_eq, b_eq, lower)

    def _require(self):
        if not self.nonempty:
            raise EmptyPolytope("the pricing polytope is empty")

    def support(self, X: Sequence) -> tuple:
        """``(max_m sum X m, argmax)``."""
        self._require()
        sol = lp.maximize(self._lp(list(X)))
        return sol.value, sol.point

    def contains(self, m: Sequence) -> bool:
        A_ub, b_ub, A_eq, b_eq = self.constraints()
        if any(v < 0 for v in m):
            return False
        return all(sum(a * v for a, v in zip(r, m)) <= b for r, b in zip(A_ub, b_ub)) and all(
            sum(a * v for a, v in zip(r, m)) == d for r, d in zip(A_eq, b_eq)
        )

    def vertices(self, max_states: int = 8) -> list:
        """All vertices by brute-force enumeration of active constraint sets.

        Exact; only meant for small instances (``n <= max_states``).
        """
        self._require()
        n = self.n
        if n > max_states:
            raise ValueError(f"vertex enumeration limited to {max_states} states")
        A_ub, b_ub, A_eq, b_eq = self.constraints()
        A_ub = [list(map(as_rational, r)) for r in A_ub]
        ineq = A_ub + [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
        ineq_b = list(map(as_rational, b_ub)) + [Fraction(0)] * n
        eq = [list(map(Fraction, r)) for r in A_eq]
        found = set()
        for active in itertools.combinations(range(len(ineq)), n - len(eq)):
            rows = eq + [ineq[i] for i in active]
            rhs = list(map(Fraction, b_eq)) + [ineq_b[i] for i in active]
            m = lp.solve_linear_system(rows, rhs)
            if m is None:
                continue
            if self.contains(m):
                found.add(tuple(m))
        return sorted(found)


def build_polytope(market: Market, require_nonempty: bool = True) -> PricingPolytope:
    probe = PricingPolytope(market, nonempty=True)
    sol = lp.solve(probe._lp([0] * market.n_states))
    nonempty = sol.status is Status.OPTIMAL
    if require_nonempty and not nonempty:
        raise InconsistentMarket("no probability vanishing on the core is dominated by the asks")
    return PricingPolytope(market, nonempty)


def attainment_value(polytope: PricingPolytope, X: Sequence) -> Fraction:
    """``sup`` of ``sum X m`` over pricing measures."""
    return polytope.support(X)[0]


def fundamental_value_bounds(polytope: PricingPolytope, X: Sequence) -> tuple:
    hi = polytope.support(X)[0]
    lo = -polytope.support([-v for v in X])[0]
    return lo, hi


@dataclass(frozen=True)
class AtomSupportProfile:
    maxima: dict  # live state label -> max_m m_state

    @property
    def no_pure_bubble(self) -> bool:
        return all(v > 0 for v in self.maxima.values())


def npb_check(market: Market, polytope: PricingPolytope) -> AtomSupportProfile:
    """Largest mass each live state can receive under a pricing measure.

    On a finite space testing indicators of single live states is
    exhaustive: any ``f >* 0`` dominates ``eps * 1_w`` for some live ``w``
    and ``eps > 0``, and ``f ^ 1`` does too.  The profile's verdict is at
    once the no-pure-bubble, the no-free-lunch and the cash-additive
    completability verdict.
    """
    polytope._require()
    space = market.space
    maxima = {}
    for i in market.order.live_indices:
        maxima[space.states[i]] = attainment_value(polytope, space.indicator(space.states[i]))
    return AtomSupportProfile(maxima)


class CertificateKind(enum.Enum):
    PRICING = "pricing"
    STRICTLY_POSITIVE = "strictly_positive"
    EMPTY = "empty"


@dataclass(frozen=True)
class MeasureCertificate:
    kind: CertificateKind
    measure: Optional[tuple] = None
    floor: Optional[Fraction] = None


def strictly_positive_measure(polytope: PricingPolytope) -> MeasureCertificate:
    """Maximize the smallest live mass over the polytope.

    The maximizer is chosen by the simplex pivot rule; only feasibility and
    the floor are certified, not uniqueness.
    """
    polytope._require()
    n = polytope.n
    live = polytope.market.order.live_indices
    # variables m_1..m_n, eps;  eps - m_w <= 0 on live states
    extra = []
    for i in live:
        row = [0] * n + [1]
        row[i] = -1
        extra.append((row, 0))
    sol = lp.maximize(polytope._lp([0] * n + [1], extra_ub=extra, extra_width=1))
    m, eps = sol.point[:n], sol.value
    mode = lp.current_mode()
    if eps > (0 if mode.exact else mode.tol):
        return MeasureCertificate(CertificateKind.STRICTLY_POSITIVE, tuple(m), eps)
    return MeasureCertificate(CertificateKind.EMPTY)


def pricing_measure(polytope: PricingPolytope) -> MeasureCertificate:
    """Any pricing measure (the first vertex the simplex reaches)."""
    polytope._require()
    sol = lp.solve(polytope._lp([0] * polytope.n))
    return MeasureCertificate(CertificateKind.PRICING, tuple(sol.point))


def bubble(market: Market, X: Sequence, strike_grid: Sequence = (), polytope=None) -> Fraction:
    """``pi^a(X)`` minus the limit of truncated fundamental values.

    The truncation grid is extended by ``max(X)``, where ``X ^ k = X`` and
    the limit has already been reached, so on a finite space this is the
    gap between the cash-additive part and the attainment value.
    """
    polytope = polytope or build_polytope(market)
    pa = cash_additive_part(market, X)
    grid = {as_rational(k) for k in strike_grid if k is not None} | {max(X)}
    best = max(attainment_value(polytope, truncate(X, k)) for k in grid)
    return pa - best


def markup(market: Market, certificate: MeasureCertificate, X: Sequence) -> Fraction:
    """``price(X) / int X dm - 1`` under the certificate measure."""
    if certificate.measure is None:
        raise EmptyPolytope("mark-ups need a pricing measure")
    fv = sum(x * m for x, m in zip(X, certificate.measure))
    if fv == 0:
        if all(x == 0 for x in X):
            return Fraction(0)
        raise ZeroFundamentalValue(f"claim {tuple(map(str, X))} has zero fundamental value")
    return price(market, X).value / fv - 1


markup_decomposition = markup


@dataclass
class ExtensionVerdict:
    extendable: bool
    strictly_positive: bool
    witnesses: list = field(default_factory=list)
    measure: Optional[tuple] = None
    floor: Optional[Fraction] = None


def restricted_extension_check(
    market: Market, strike_grid: Sequence = (), polytope=None
) -> ExtensionVerdict:
    """No-pure-bubble test restricted to call-overwritten claims.

    Covers every ``X ^ k`` (generators over the extended grid) and the
    numeraire truncations ``1 ^ k`` that are ``>* 0``.  ``extendable``
    asks each claim separately for a pricing measure charging ``f ^ 1``;
    ``strictly_positive`` asks for one measure charging all of them.
    """
    polytope = polytope or build_polytope(market)
    one = market.space.constant(1)
    claims = call_overwrite_extension(market, strike_grid)
    for k in sorted({as_rational(k) for k in strike_grid if k is not None}) + [None]:
        c = truncate(one, k)
        if c not in claims:
            claims.append(c)
    positive = [c for c in claims if strictly_positive(market.order, c)]
    witnesses = []
    extendable = True
    for c in positive:
        v = attainment_value(polytope, truncate(c, 1))
        ok = v > 0
        extendable &= ok
        witnesses.append({"claim": c, "sup_integral": v, "ok": ok})

    n = polytope.n
    extra = []
    for c in positive:
        c1 = truncate(c, 1)
        extra.append(([-v for v in c1] + [1], 0))
    sol = lp.maximize(polytope._lp([0] * n + [1], extra_ub=extra, extra_width=1))
    if sol.status is Status.UNBOUNDED:
        # no positive claims: every pricing measure qualifies
        cert = pricing_measure(polytope)
        return ExtensionVerdict(extendable, True, witnesses, cert.measure, None)
    eps = sol.value
    strict = eps > 0
    return ExtensionVerdict(
        extendable, strict, witnesses, tuple(sol.point[:n]) if strict else None, eps if strict else None
    )


def reprice_at_cash_additive_part(market: Market) -> Market:
    """The same market with each generator quoted at its cash-additive part."""
    return market.with_asks([cash_additive_part(market, a.payoff) for a in market.assets])


__all__ = [
    "AtomSupportProfile",
    "CertificateKind",
    "EmptyPolytope",
    "ExtensionVerdict",
    "InconsistentMarket",
    "MeasureCertificate",
    "NotRepresentable",
    "PricingPolytope",
    "ZeroFundamentalValue",
    "attainment_value",
    "bubble",
    "build_polytope",
    "fundamental_value_bounds",
    "markup",
    "markup_decomposition",
    "npb_check",
    "pricing_measure",
    "reprice_at_cash_additive_part",
    "restricted_extension_check",
    "strictly_positive_measure",
]
