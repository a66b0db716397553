"""The common order on claims, induced by an ideal of negligible states.

On a finite sample space every family of sets closed under subsets and
finite unions is principal: it consists of the subsets of one maximal
negligible set, called the *core* here.  Adding the robustness axiom
(``f + eps >* 0`` for all ``eps > 0`` implies ``f >=* 0``) pins the order
down completely: ``f >=* g`` iff ``f >= g`` at every state outside the
core.  That is the only kind of order this module represents.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .lp import as_rational

Claim = tuple  # tuple of Fractions indexed like SampleSpace.states


class AllStatesNegligible(ValueError):
    """Every state is negligible, so ``1 >* 0`` would fail."""


class DimensionMismatch(ValueError):
    pass


class InvalidPriorFamily(ValueError):
    pass


@dataclass(frozen=True)
class SampleSpace:
    states: tuple

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ValueError("a sample space needs at least one state")
        if any(not isinstance(s, str) or not s for s in states):
            raise ValueError("state labels must be non-empty strings")
        if len(set(states)) != len(states):
            raise ValueError(f"duplicate state labels in {states}")
        object.__setattr__(self, "states", states)

    def __len__(self) -> int:
        return len(self.states)

    def index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise KeyError(f"unknown state {label!r}") from None

    def claim(self, values: Iterable) -> Claim:
        out = tuple(as_rational(v) for v in values)
        if len(out) != len(self.states):
            raise DimensionMismatch(
                f"claim has {len(out)} entries, sample space has {len(self.states)}"
            )
        return out

    def indicator(self, labels) -> Claim:
        labels = {labels} if isinstance(labels, str) else set(labels)
        return tuple(Fraction(int(s in labels)) for s in self.states)

    def constant(self, c) -> Claim:
        return tuple(as_rational(c) for _ in self.states)


@dataclass(frozen=True)
class CommonOrder:
    space: SampleSpace
    negligible_core: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        core = frozenset(self.negligible_core)
        unknown = core - set(self.space.states)
        if unknown:
            raise KeyError(f"unknown states in negligible core: {sorted(unknown)}")
        if core == set(self.space.states):
            raise AllStatesNegligible("the whole sample space cannot be negligible")
        object.__setattr__(self, "negligible_core", core)

    @classmethod
    def _unchecked(cls, space: SampleSpace, core: Iterable[str]) -> "CommonOrder":
        # Test hook: bypasses validation to build a deliberately broken order.
        obj = object.__new__(cls)
        object.__setattr__(obj, "space", space)
        object.__setattr__(obj, "negligible_core", frozenset(core))
        return obj

    @property
    def live_indices(self) -> tuple:
        """Indices of states outside the negligible core, in state order."""
        return tuple(
            i for i, s in enumerate(self.space.states) if s not in self.negligible_core
        )

    @property
    def live_states(self) -> tuple:
        return tuple(self.space.states[i] for i in self.live_indices)

    def is_negligible(self, labels: Iterable[str]) -> bool:
        return set(labels) <= self.negligible_core

    def _check(self, *claims):
        n = len(self.space)
        for c in claims:
            if len(c) != n:
                raise DimensionMismatch(f"claim of length {len(c)} on a space of {n} states")


def order_from_negligible_sets(
    space: SampleSpace, generators: Iterable[Iterable[str]]
) -> CommonOrder:
    core: set = set()
    for g in generators:
        core |= set(g)
    return CommonOrder(space, frozenset(core))


@dataclass(frozen=True)
class PriorFamily:
    space: SampleSpace
    priors: tuple

    def __post_init__(self):
        priors = tuple(tuple(as_rational(p) for p in prior) for prior in self.priors)
        if not priors:
            raise InvalidPriorFamily("a prior family must be non-empty")
        for k, prior in enumerate(priors):
            if len(prior) != len(self.space):
                raise InvalidPriorFamily(f"prior {k} has the wrong length")
            if any(p < 0 for p in prior):
                raise InvalidPriorFamily(f"prior {k} has a negative entry")
            if sum(prior) != 1:
                raise InvalidPriorFamily(f"prior {k} sums to {sum(prior)}, not 1")
        object.__setattr__(self, "priors", priors)


def order_from_priors(family: PriorFamily) -> CommonOrder:
    """States null under every prior of the family form the core."""
    core = frozenset(
        s
        for i, s in enumerate(family.space.states)
        if all(prior[i] == 0 for prior in family.priors)
    )
    return CommonOrder(family.space, core)


def dominates(order: CommonOrder, f: Sequence, g: Sequence) -> bool:
    """Decide ``f >=* g``."""
    order._check(f, g)
    return all(f[i] >= g[i] for i in order.live_indices)


def strictly_positive(order: CommonOrder, f: Sequence) -> bool:
    """Decide ``f >* 0``: ``f >=* 0`` and not ``0 >=* f``."""
    order._check(f)
    live = order.live_indices
    return all(f[i] >= 0 for i in live) and any(f[i] > 0 for i in live)


def truncate(f: Sequence, k) -> Claim:
    """Pointwise minimum ``f ^ k``; ``k=None`` stands for ``+inf``."""
    if k is None:
        return tuple(f)
    return tuple(min(v, k) for v in f)


def representing_probability(order: CommonOrder) -> Claim:
    """Uniform mass on the live states, zero on the core.

    ``f >=* g`` holds exactly when this probability gives ``{f < g}``
    measure zero.
    """
    live = set(order.live_indices)
    w = Fraction(1, len(live))
    return tuple(w if i in live else Fraction(0) for i in range(len(order.space)))


def probability_of_loss(prob: Sequence, f: Sequence, g: Sequence) -> Fraction:
    """``P(f < g)``."""
    return sum((p for p, a, b in zip(prob, f, g) if a < b), Fraction(0))


@dataclass
class AxiomResult:
    name: str
    checked: int = 0
    witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.witnesses


@dataclass
class AxiomReport:
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def __getitem__(self, name: str) -> AxiomResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)


AXIOMS = ("unit_positive", "pointwise_monotone", "affine", "truncation", "robustness")


def _random_claim(rng: random.Random, n: int, lo: int = -10, hi: int = 10) -> Claim:
    return tuple(Fraction(rng.randint(lo * 4, hi * 4), 4) for _ in range(n))


def check_axioms(
    order: CommonOrder,
    samples: Sequence[tuple] = (),
    n_random: int = 100,
    seed: Optional[int] = 0,
) -> AxiomReport:
    """Evaluate the order axioms on ``samples`` plus ``n_random`` random triples.

    The multipliers ``b >= 0`` and shifts ``h`` used for the affine axiom are
    drawn from quarter-integers in ``[-10, 10]``.  The robustness axiom is
    checked at the sampled ``eps`` values together with the critical one
    (half the size of the worst live shortfall), which is what makes a
    finite sample decisive on a finite space.
    """
    n = len(order.space)
    rng = random.Random(seed)
    triples = [tuple(tuple(as_rational(v) for v in c) for c in t) for t in samples]
    for _ in range(n_random):
        triples.append(tuple(_random_claim(rng, n) for _ in range(3)))

    res = {name: AxiomResult(name) for name in AXIOMS}
    one = (Fraction(1),) * n
    zero = (Fraction(0),) * n

    r = res["unit_positive"]
    r.checked += 1
    if not strictly_positive(order, one):
        r.witnesses.append({"claim": one})

    eps_grid = [Fraction(1), Fraction(1, 10), Fraction(1, 1000), Fraction(1, 10**6)]
    for f, g, h in triples:
        r = res["pointwise_monotone"]
        for a, b in ((f, g), (g, f), (f, zero)):
            if all(x >= y for x, y in zip(a, b)):
                r.checked += 1
                if not dominates(order, a, b):
                    r.witnesses.append({"f": a, "g": b})

        r = res["affine"]
        b_mult = tuple(Fraction(rng.randint(0, 40), 4) for _ in range(n))
        for a, c in ((f, g), (g, f), (f, h)):
            if dominates(order, a, c):
                r.checked += 1
                lhs = tuple(bi * x + hi for bi, x, hi in zip(b_mult, a, h))
                rhs = tuple(bi * y + hi for bi, y, hi in zip(b_mult, c, h))
                if not dominates(order, lhs, rhs):
                    r.witnesses.append({"f": a, "g": c, "b": b_mult, "h": h})

        r = res["truncation"]
        for a in (f, g, h):
            if strictly_positive(order, a):
                r.checked += 1
                if not strictly_positive(order, truncate(a, 1)):
                    r.witnesses.append({"f": a})

        r = res["robustness"]
        for a in (f, g, h):
            live_min = min((a[i] for i in order.live_indices), default=Fraction(0))
            eps_values = list(eps_grid)
            if live_min < 0:
                eps_values.append(-live_min / 2)
            shifted_ok = all(
                strictly_positive(order, tuple(x + e for x in a)) for e in eps_values
            )
            r.checked += 1
            if shifted_ok and not dominates(order, a, zero):
                r.witnesses.append({"f": a})
            if dominates(order, a, zero) and not shifted_ok:
                r.witnesses.append({"f": a, "note": "f >=* 0 but some f + eps is not >* 0"})

    return AxiomReport([res[name] for name in AXIOMS])
