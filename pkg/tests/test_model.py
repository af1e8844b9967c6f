import random
from fractions import Fraction as F
from math import prod

import pytest
from hypothesis import given, strategies as st

from bellcheck import fixtures
from bellcheck.generate import random_model
from bellcheck.model import (
    DomainError,
    Model,
    Site,
    as_float,
    chain_factor,
    chain_factors,
    coarse_grain,
    event_prob,
    joint,
    marginal,
    validate,
)

from oracles import black, card_prob, king

LL = ("look", "look")
seeds = st.integers(0, 2**32 - 1)


@pytest.fixture
def deck():
    return fixtures.carddeck()


def test_carddeck_is_valid(deck):
    assert validate(deck).ok


def test_validate_reports_bad_normalization(deck):
    kernel = dict(deck.kernel)
    kernel[("D_1", LL)] = {**kernel[("D_1", LL)], ("KR", "QB"): F(1, 10)}
    bad = Model(deck.sites, deck.hidden, (F(1, 2), F(1, 2)), kernel)
    report = validate(bad)
    assert report.kinds() == {"normalization"}
    assert "D_1" in report.violations[0].message and "19/20" in report.violations[0].message


def test_validate_reports_missing_kernel(deck):
    kernel = {k: v for k, v in deck.kernel.items() if k[0] != "D_2"}
    report = validate(Model(deck.sites, deck.hidden, (F(1, 2), F(1, 2)), kernel))
    assert report.kinds() == {"totality"}
    assert "D_2" in report.violations[0].message


def test_validate_reports_structure_and_prior_problems(deck):
    bad = Model(deck.sites, deck.hidden, (F(1, 3), F(1, 3)), deck.kernel, {"D_1": ("a", "b")})
    assert validate(bad).kinds() == {"normalization", "structure"}


def test_validate_never_raises_on_empty_model():
    assert not validate(Model((), (), (), {})).ok


@pytest.mark.parametrize("outcomes, expected", [
    (("KR", "QB"), card_prob("D_1", lambda l, r: (l, r) == ("KR", "QB"))),
    (("KR", "KB"), F(0)),
])
def test_joint_card_deck(deck, outcomes, expected):
    assert joint(deck, "D_1", LL, outcomes) == expected


def test_joint_card_deck_value(deck):
    assert joint(deck, "D_1", LL, ("KR", "QB")) == F(3, 20)


def test_joint_product_fixture():
    assert joint(fixtures.product(), "h1", ("x0", "y0"), ("+", "+")) == F(1, 12)


@pytest.mark.parametrize("args", [
    ("D_3", LL, ("KR", "QB")),
    ("D_1", ("look", "peek"), ("KR", "QB")),
    ("D_1", LL, ("KR", "XX")),
    ("D_1", LL, ("KR",)),
])
def test_joint_domain_errors(deck, args):
    with pytest.raises(DomainError):
        joint(deck, *args)


def test_event_prob_king_black(deck):
    q = {"L": ("KR", "KB"), "R": ("KB", "QB")}
    assert event_prob(deck, "D_1", LL, q) == F(3, 20)
    assert event_prob(deck, "D_1", LL, q) == card_prob("D_1", lambda l, r: king(l) and black(r))


def test_event_prob_king_anywhere(deck):
    assert event_prob(deck, "D_1", LL, {"L": ("KR", "KB")}) == card_prob("D_1", lambda l, r: king(l)) == F(1, 2)


def test_event_prob_full_alphabet_is_one(deck):
    assert event_prob(deck, "D_2", LL, [None, None]) == 1


def test_event_prob_rejects_unknown_outcome(deck):
    with pytest.raises(DomainError):
        event_prob(deck, "D_1", LL, {"L": ("KX",)})


def test_marginals_card_deck(deck):
    assert marginal(deck, "D_1", LL, "L", "KR") == card_prob("D_1", lambda l, r: l == "KR") == F(3, 20)
    p_k = event_prob(deck, "D_1", LL, {"L": ("KR", "KB")})
    p_b = event_prob(deck, "D_1", LL, {"R": ("KB", "QB")})
    assert p_k * p_b == F(1, 4)


def test_marginal_of_deterministic_fixture_is_zero_or_one():
    m = fixtures.deterministic()
    for p in m.profiles:
        for j in range(2):
            for o in ("+", "-"):
                assert marginal(m, "h", p, j, o) in (0, 1)


def test_chain_factor_pair_forces_partner(deck):
    c = chain_factor(deck, "D_1", LL, 1, ("KR",), "QB")
    assert c.value == 1 and not c.undefined


def test_chain_factor_first_site_is_marginal(deck):
    for o in ("KR", "KB", "QR", "QB"):
        assert chain_factor(deck, "D_2", LL, 0, (), o).value == marginal(deck, "D_2", LL, 0, o)


def test_chain_factor_product_fixture_equals_marginal():
    m = fixtures.product()
    for prefix in ("+", "-"):
        for o in ("+", "-"):
            assert chain_factor(m, "h2", ("x1", "y1"), 1, (prefix,), o).value == marginal(m, "h2", ("x1", "y1"), 1, o)


def test_chain_factor_zero_prefix_is_flagged():
    # L always sees +, so conditioning on L = - is undefined
    m = fixtures.deterministic()
    c = chain_factor(m, "h", ("a0", "b0"), 1, ("-",), "-")
    assert c.undefined and c.value == 1


def test_chain_factor_prefix_length_checked(deck):
    with pytest.raises(DomainError):
        chain_factor(deck, "D_1", LL, 1, (), "QB")


@given(seeds, st.booleans())
def test_chain_identity_any_order(seed, full):
    rng = random.Random(seed)
    m = random_model(rng, full_support=full)
    order = list(range(m.n_sites))
    rng.shuffle(order)
    for lam in m.hidden:
        for p in m.profiles:
            for t in m.tuples(p):
                factors = chain_factors(m, lam, p, t, order)
                assert prod(f.value for f in factors) == joint(m, lam, p, t)
                if joint(m, lam, p, t) != 0:
                    assert not any(f.undefined for f in factors)


@given(seeds)
def test_marginals_sum_to_one_and_bound_joint(seed):
    m = random_model(random.Random(seed))
    for lam in m.hidden:
        for p in m.profiles:
            for j, alpha in enumerate(m.alphabets(p)):
                assert sum(marginal(m, lam, p, j, o) for o in alpha) == 1
            for t in m.tuples(p):
                pj = joint(m, lam, p, t)
                assert event_prob(m, lam, p, [(o,) for o in t]) == pj
                assert all(pj <= marginal(m, lam, p, j, o) for j, o in enumerate(t))


def test_coarse_grain_completed_deck_recovers_deck(deck):
    complete = fixtures.carddeck_complete()
    coarse = coarse_grain(complete, {lam: fixtures.deck_of(lam) for lam in complete.hidden}, name="carddeck")
    assert coarse == deck


def test_float_copy_validates_with_tolerance(deck):
    fm = as_float(deck)
    assert not fm.is_exact() and validate(fm).ok
    assert joint(fm, "D_1", LL, ("KR", "QB")) == pytest.approx(0.15)


def test_model_equality_and_immutability(deck):
    assert deck == fixtures.carddeck()
    with pytest.raises(AttributeError):
        deck.hidden = ("x",)


def test_site_index_by_name_or_number(deck):
    assert deck.site_index("R") == 1 == deck.site_index(1)
    with pytest.raises(DomainError):
        deck.site_index("Z")


def test_sparse_kernel_drops_zero_entries():
    m = Model((Site("A", {"s": ("0", "1")}),), ("h",), (1,), {("h", ("s",)): {("0",): 1, ("1",): 0}})
    assert m.kernel[("h", ("s",))] == {("0",): 1}
