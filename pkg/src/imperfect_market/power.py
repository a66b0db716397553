"""Market-power index of a price functional on non-negative claims.

For a family ``f_1..f_N`` of non-negative claims the index is the relative
subadditivity gap

    (sum_i rho(f_i) - rho(sum_i f_i)) / sum_i rho(f_i)      (0/0 := 0)

and the market power of ``rho`` is its supremum over finite families.  The
supremum is only bounded from below here, by structured probes (partitions
of the live states into indicator blocks) and seeded random search.
"""
from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Optional, Sequence

from .market import Market, completion_price
from .measures import CertificateKind, build_polytope, strictly_positive_measure
from .order import CommonOrder, SampleSpace


class NegativeClaim(ValueError):
    """A family member is strictly negative at some live state."""


class OracleKind(enum.Enum):
    LINEAR = "linear"
    COMPLETION = "completion"
    SUP_SPREAD = "sup_spread"


@dataclass(frozen=True)
class PriceOracle:
    """A total price map on claims.

    ``linear``: ``sum f m``.  ``completion``: the market's completion price.
    ``sup_spread``: ``sum f mu + beta * max_live |f|``, a sublinear price
    that is monotone off the core and charges a spread on concentration.
    """

    kind: OracleKind
    order: CommonOrder
    measure: Optional[tuple] = None
    market: Optional[Market] = None
    beta: Fraction = Fraction(0)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __call__(self, f: Sequence) -> Fraction:
        f = tuple(f)
        if f in self._cache:
            return self._cache[f]
        if self.kind is OracleKind.LINEAR:
            v = sum((x * m for x, m in zip(f, self.measure)), Fraction(0))
        elif self.kind is OracleKind.COMPLETION:
            v = completion_price(self.market, f)
        else:
            base = sum((x * m for x, m in zip(f, self.measure)), Fraction(0))
            spread = max((abs(f[i]) for i in self.order.live_indices), default=Fraction(0))
            v = base + self.beta * spread
        self._cache[f] = v
        return v


def linear_oracle(order: CommonOrder, measure: Sequence) -> PriceOracle:
    return PriceOracle(OracleKind.LINEAR, order, measure=tuple(measure))


def completion_oracle(market: Market) -> PriceOracle:
    return PriceOracle(OracleKind.COMPLETION, market.order, market=market)


def sup_spread_oracle(order: CommonOrder, measure: Sequence, beta) -> PriceOracle:
    beta = Fraction(beta)
    if beta < 0:
        raise ValueError("spread coefficient must be non-negative")
    return PriceOracle(OracleKind.SUP_SPREAD, order, measure=tuple(measure), beta=beta)


def power_at(oracle: Callable, family: Sequence[Sequence], order: Optional[CommonOrder] = None) -> Fraction:
    """The index at one family; ``order`` defaults to the oracle's."""
    order = order if order is not None else oracle.order
    if not family:
        raise ValueError("family must be non-empty")
    for f in family:
        if any(f[i] < 0 for i in order.live_indices):
            raise NegativeClaim(f"claim {tuple(map(str, f))} is negative at a live state")
    total = tuple(sum(col) for col in zip(*family))
    denom = sum(oracle(f) for f in family)
    num = denom - oracle(total)
    if denom == 0:
        return Fraction(0) if num == 0 else _undefined(num)
    return num / denom


def _undefined(num):
    raise ZeroDivisionError(f"index undefined: numerator {num} over zero denominator")


@dataclass(frozen=True)
class PowerEstimate:
    lower_bound: Fraction
    witness: tuple
    probe_budget: int
    probes_used: int


def set_partitions(items: Sequence) -> Iterator[list]:
    """Every partition of ``items`` into non-empty blocks (restricted growth order)."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def _block_family(space: SampleSpace, blocks) -> tuple:
    return tuple(space.indicator(b) for b in blocks)


def _probe_families(oracle: PriceOracle, market: Optional[Market], rng: random.Random):
    order = oracle.order
    space = order.space
    live = order.live_states
    # Finest partition first: it is the worst case for spread-type oracles.
    yield _block_family(space, [[s] for s in live])
    for part in set_partitions(live):
        if len(part) > 1:
            yield _block_family(space, part)
    if market is not None and market.assets:
        pos = tuple(tuple(max(v, Fraction(0)) for v in a.payoff) for a in market.assets)
        yield pos
        for p in pos:
            yield (p, space.constant(1))
    while True:
        size = rng.randint(2, 4)
        yield tuple(
            tuple(Fraction(rng.randint(0, 6), rng.randint(1, 3)) for _ in space.states)
            for _ in range(size)
        )


def power_lower_bound(
    oracle: PriceOracle, market: Optional[Market] = None, probe_budget: int = 64, seed: int = 0
) -> PowerEstimate:
    """Best index over ``probe_budget`` probe families.

    Ties keep the earliest probe, so the result is deterministic in the seed.
    """
    if probe_budget < 1:
        raise ValueError("probe budget must be at least 1")
    rng = random.Random(seed)
    best_value, best_family = None, None
    used = 0
    for family in _probe_families(oracle, market, rng):
        if used >= probe_budget:
            break
        used += 1
        v = power_at(oracle, family)
        if best_value is None or v > best_value:
            best_value, best_family = v, family
    return PowerEstimate(best_value, best_family, probe_budget, used)


def linear_completion(market: Market) -> Optional[PriceOracle]:
    """Linear price from a strictly positive pricing measure, if one exists.

    Such a completion is cash additive with zero market power.  When none
    exists, no completion of this market has market power below one.
    """
    cert = strictly_positive_measure(build_polytope(market))
    if cert.kind is not CertificateKind.STRICTLY_POSITIVE:
        return None
    return linear_oracle(market.order, cert.measure)


def uniform_space(k: int) -> tuple:
    space = SampleSpace(tuple(f"s{i}" for i in range(1, k + 1)))
    return space, CommonOrder(space, frozenset())


def refinement_study(beta, k_max: int) -> list:
    """Index of the uniform sup-spread price on the finest partition of ``k`` states.

    Returns ``[(k, index)]`` for ``k = 2..k_max``; the index rises towards
    one as the state space is refined.
    """
    beta = Fraction(beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    rows = []
    for k in range(2, k_max + 1):
        space, order = uniform_space(k)
        mu = tuple(Fraction(1, k) for _ in range(k))
        oracle = sup_spread_oracle(order, mu, beta)
        family = _block_family(space, [[s] for s in space.states])
        rows.append((k, power_at(oracle, family)))
    return rows
