import random

import pytest
from hypothesis import given, strategies as st

from isdaflow.errors import CurrencyMismatch
from isdaflow.money import Money, ROUND_HALF_AWAY, ROUND_HALF_TOWARD, money_sum, round_ratio


def test_same_currency_arithmetic():
    assert Money("USD", 10_000) + Money("USD", 5_000) == Money("USD", 15_000)
    assert Money("USD", 10_000) - Money("USD", 15_000) == Money("USD", -5_000)
    assert -Money("USD", 3) == Money("USD", -3)
    assert abs(Money("USD", -3)) == Money("USD", 3)


def test_mixed_currency_is_hard_error():
    with pytest.raises(CurrencyMismatch):
        Money("USD", 1) + Money("EUR", 1)
    with pytest.raises(CurrencyMismatch):
        Money("USD", 1) < Money("EUR", 1)


def test_amount_must_be_integer():
    with pytest.raises(TypeError):
        Money("USD", 1.5)
    with pytest.raises(TypeError):
        Money("USD", True)


def test_money_sum_examples():
    assert money_sum([Money("USD", 100_00), Money("USD", 50_00)], "USD") == Money("USD", 150_00)
    assert money_sum([], "EUR") == Money("EUR", 0)
    with pytest.raises(CurrencyMismatch):
        money_sum([Money("USD", 1), Money("EUR", 1)], "USD")


@given(st.lists(st.integers(min_value=-10**12, max_value=10**12), max_size=30),
       st.randoms(use_true_random=False))
def test_money_sum_permutation_invariant(amounts, rng):
    items = [Money("USD", a) for a in amounts]
    shuffled = list(items)
    rng.shuffle(shuffled)
    assert money_sum(items, "USD") == money_sum(shuffled, "USD")
    assert money_sum(items, "USD").amount == sum(amounts)  # exact, no drift


@pytest.mark.parametrize("num,den,expected", [
    (5, 10, 1),     # .5 rounds away from zero
    (-5, 10, -1),
    (4, 10, 0),
    (6, 10, 1),
    (15, 10, 2),    # 1.5 -> 2
    (-15, 10, -2),
    (25, 10, 3),    # 2.5 -> 3 (away, not banker's)
    (0, 7, 0),
])
def test_round_half_away(num, den, expected):
    assert round_ratio(num, den, ROUND_HALF_AWAY) == expected


def test_round_half_toward_differs_only_on_ties():
    assert round_ratio(5, 10, ROUND_HALF_TOWARD) == 0
    assert round_ratio(-5, 10, ROUND_HALF_TOWARD) == 0
    assert round_ratio(6, 10, ROUND_HALF_TOWARD) == 1
    rng = random.Random(7)
    for _ in range(2000):
        num = rng.randint(-10**9, 10**9)
        den = rng.randint(1, 10**6)
        if (2 * abs(num)) % (2 * den) == den:
            continue  # a tie
        assert round_ratio(num, den, ROUND_HALF_AWAY) == round_ratio(num, den, ROUND_HALF_TOWARD)


def test_divide_tracks_remainder():
    quotient, remainder = Money("USD", 100).divide(3)
    assert quotient == Money("USD", 33)
    assert remainder == 1
    assert quotient.amount * 3 + remainder == 100
    quotient, remainder = Money("USD", 5).divide(2)
    assert quotient == Money("USD", 3)  # half away from zero
    assert remainder == -1


@given(st.integers(min_value=-10**15, max_value=10**15),
       st.integers(min_value=1, max_value=10**9))
def test_round_ratio_error_bound(num, den):
    # |result - exact| <= 1/2, i.e. |2*result*den - 2*num| <= den
    result = round_ratio(num, den)
    assert abs(2 * result * den - 2 * num) <= den


def test_mul_ratio_single_rounding():
    # 1,000,000.00 at 5%/yr for 90/360 days: exactly 12,500.00
    notional = Money("USD", 100_000_000)
    assert notional.mul_ratio(50_000 * 90, 1_000_000 * 360) == Money("USD", 1_250_000)
