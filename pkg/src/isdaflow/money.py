"""Exact money arithmetic in integer minor units.

Amounts are signed integers in the currency's minor unit (cents for USD).
No floats anywhere: netting, interest and tax must be replayable bit-for-bit
across replicas, so every product/quotient goes through one integer rounding
helper with an explicit mode.

Rates are carried as scaled integers with 1e-6 precision (RATE_SCALE), so
5.3% is 53_000 micro-units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import CurrencyMismatch

RATE_SCALE = 1_000_000  # micro-units per 1.0 of rate

ROUND_HALF_AWAY = "half-away-from-zero"
ROUND_HALF_TOWARD = "half-toward-zero"  # only used for fault injection


def round_ratio(numerator: int, denominator: int, mode: str = ROUND_HALF_AWAY) -> int:
    """Round numerator/denominator to the nearest integer, ties per mode."""
    if denominator == 0:
        raise ZeroDivisionError("round_ratio denominator is zero")
    if denominator < 0:
        numerator, denominator = -numerator, -denominator
    sign = -1 if numerator < 0 else 1
    n = abs(numerator)
    whole, rem = divmod(n, denominator)
    twice = 2 * rem
    if twice > denominator:
        whole += 1
    elif twice == denominator and mode == ROUND_HALF_AWAY:
        whole += 1
    return sign * whole


@dataclass(frozen=True)
class Money:
    """A signed amount of one currency, in integer minor units."""

    currency: str
    amount: int

    def __post_init__(self):
        if not isinstance(self.amount, int) or isinstance(self.amount, bool):
            raise TypeError(f"Money amount must be int, got {type(self.amount).__name__}")

    def _check(self, other: "Money") -> None:
        if self.currency != other.currency:
            raise CurrencyMismatch(f"{self.currency} vs {other.currency}")

    def __add__(self, other: "Money") -> "Money":
        self._check(other)
        return Money(self.currency, self.amount + other.amount)

    def __sub__(self, other: "Money") -> "Money":
        self._check(other)
        return Money(self.currency, self.amount - other.amount)

    def __neg__(self) -> "Money":
        return Money(self.currency, -self.amount)

    def __abs__(self) -> "Money":
        return Money(self.currency, abs(self.amount))

    def __lt__(self, other: "Money") -> bool:
        self._check(other)
        return self.amount < other.amount

    def __le__(self, other: "Money") -> bool:
        self._check(other)
        return self.amount <= other.amount

    def __bool__(self) -> bool:
        return self.amount != 0

    @property
    def is_zero(self) -> bool:
        return self.amount == 0

    def zero(self) -> "Money":
        return Money(self.currency, 0)

    def mul_ratio(self, numerator: int, denominator: int, mode: str = ROUND_HALF_AWAY) -> "Money":
        """amount * numerator / denominator, rounded once."""
        return Money(self.currency, round_ratio(self.amount * numerator, denominator, mode))

    def divide(self, divisor: int) -> tuple["Money", int]:
        """Split by an integer divisor; returns (rounded quotient, remainder).

        remainder = amount - quotient * divisor, for the caller to track; no
        fractional minor units ever exist.
        """
        q = round_ratio(self.amount, divisor)
        return Money(self.currency, q), self.amount - q * divisor

    def __str__(self) -> str:
        return f"{self.currency} {self.amount}"


def money_sum(items: Iterable[Money], currency: str) -> Money:
    """Exact sum of same-currency amounts; empty input is zero of currency."""
    total = 0
    for item in items:
        if item.currency != currency:
            raise CurrencyMismatch(f"expected {currency}, got {item.currency}")
        total += item.amount
    return Money(currency, total)
