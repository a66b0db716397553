import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imperfect_market.order import (
    AllStatesNegligible,
    CommonOrder,
    DimensionMismatch,
    InvalidPriorFamily,
    PriorFamily,
    SampleSpace,
    check_axioms,
    dominates,
    order_from_negligible_sets,
    order_from_priors,
    probability_of_loss,
    representing_probability,
    strictly_positive,
    truncate,
)

ABC = SampleSpace(("a", "b", "c"))


def claim(*vals):
    return tuple(Fraction(v) for v in vals)


@pytest.mark.parametrize(
    "states, generators, core",
    [
        ("abc", [{"c"}], {"c"}),
        ("abcd", [{"c"}, {"d"}], {"c", "d"}),
        ("abc", [], set()),
    ],
)
def test_order_from_negligible_sets(states, generators, core):
    space = SampleSpace(tuple(states))
    assert order_from_negligible_sets(space, generators).negligible_core == core


def test_all_states_negligible():
    with pytest.raises(AllStatesNegligible):
        order_from_negligible_sets(ABC, [{"a"}, {"b"}, {"c"}])


def test_sample_space_rejects_duplicates_and_empty():
    with pytest.raises(ValueError):
        SampleSpace(("a", "a"))
    with pytest.raises(ValueError):
        SampleSpace(())
    with pytest.raises(ValueError):
        SampleSpace(("a", ""))


@pytest.mark.parametrize(
    "priors, core",
    [
        ([("1/2", "1/2", 0)], {"c"}),
        ([(1, 0, 0), (0, 1, 0)], {"c"}),
        ([("1/3", "1/3", "1/3")], set()),
    ],
)
def test_order_from_priors(priors, core):
    assert order_from_priors(PriorFamily(ABC, tuple(priors))).negligible_core == core


@pytest.mark.parametrize(
    "priors",
    [(), [("1/2", "1/3", 0)], [(2, -1, 0)], [(1, 0)]],
)
def test_invalid_prior_family(priors):
    with pytest.raises(InvalidPriorFamily):
        PriorFamily(ABC, tuple(priors))


def test_prior_family_all_null_rejected():
    space = SampleSpace(("a",))
    with pytest.raises(InvalidPriorFamily):
        PriorFamily(space, ((0,),))


def test_dominates_examples():
    core_c = CommonOrder(ABC, frozenset({"c"}))
    f = claim(1, 2, 3)
    assert dominates(core_c, f, f)
    assert dominates(core_c, claim(0, 0, -5), claim(0, 0, 0))
    ab = SampleSpace(("a", "b"))
    assert not dominates(CommonOrder(ab), claim(1, -1), claim(0, 0))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        dominates(CommonOrder(ABC), claim(1, 2), claim(1, 2, 3))
    with pytest.raises(DimensionMismatch):
        strictly_positive(CommonOrder(ABC), claim(1))


def test_strictly_positive_examples():
    core_c = CommonOrder(ABC, frozenset({"c"}))
    assert not strictly_positive(core_c, claim(0, 0, 0))
    assert strictly_positive(core_c, claim(1, 0, -3))
    assert not strictly_positive(core_c, claim(0, 0, 7))


@pytest.mark.parametrize(
    "core, expected",
    [
        ({"c"}, claim("1/2", "1/2", 0)),
        (set(), claim("1/3", "1/3", "1/3")),
    ],
)
def test_representing_probability(core, expected):
    assert representing_probability(CommonOrder(ABC, frozenset(core))) == expected


def test_representing_probability_two_states():
    ab = SampleSpace(("a", "b"))
    assert representing_probability(CommonOrder(ab)) == claim("1/2", "1/2")


def test_check_axioms_passes_on_valid_order():
    report = check_axioms(CommonOrder(ABC, frozenset({"c"})), n_random=100, seed=3)
    assert report.passed
    assert all(r.checked > 0 for r in report.results)


def test_check_axioms_detects_corrupted_order():
    broken = CommonOrder._unchecked(ABC, {"a", "b", "c"})
    report = check_axioms(broken, n_random=10)
    assert not report["unit_positive"].passed
    assert report["unit_positive"].witnesses


def test_truncation_axiom_on_supplied_sample():
    order = CommonOrder(ABC, frozenset({"c"}))
    f = claim(1, 0, -3)
    report = check_axioms(order, samples=[(f, f, f)], n_random=0)
    assert report["truncation"].checked >= 1 and report["truncation"].passed
    assert truncate(f, 1) == claim(1, 0, -3)
    assert strictly_positive(order, truncate(f, 1))


def test_representing_probability_reproduces_order():
    rng = random.Random(11)
    for core in [set(), {"a"}, {"b", "c"}]:
        order = CommonOrder(ABC, frozenset(core))
        P = representing_probability(order)
        for _ in range(200):
            f = claim(*(rng.randint(-3, 3) for _ in range(3)))
            g = claim(*(rng.randint(-3, 3) for _ in range(3)))
            assert dominates(order, f, g) == (probability_of_loss(P, f, g) == 0)


def test_priors_then_representing_probability_null_set():
    fam = PriorFamily(ABC, ((Fraction(1), Fraction(0), Fraction(0)),))
    P = representing_probability(order_from_priors(fam))
    assert {s for s, p in zip(ABC.states, P) if p == 0} == {"b", "c"}


values = st.integers(min_value=-5, max_value=5).map(Fraction)
claims = st.tuples(values, values, values)
cores = st.sets(st.sampled_from("abc"), max_size=2)


@settings(max_examples=200, deadline=None)
@given(core=cores, f=claims, g=claims, h=claims)
def test_preorder_properties(core, f, g, h):
    order = CommonOrder(ABC, frozenset(core))
    assert dominates(order, f, f)
    if dominates(order, f, g) and dominates(order, g, h):
        assert dominates(order, f, h)


@settings(max_examples=200, deadline=None)
@given(core=cores, f=claims)
def test_strict_positivity_and_absolute_value(core, f):
    order = CommonOrder(ABC, frozenset(core))
    zero = (Fraction(0),) * 3
    if strictly_positive(order, f):
        assert dominates(order, f, zero) and not dominates(order, zero, f)
    if dominates(order, f, zero):
        assert dominates(order, f, tuple(abs(v) for v in f))
