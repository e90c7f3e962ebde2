"""Gross obligation generation from transaction economics.

Each leg of a transaction produces one payment obligation per accrual period:
amount = notional x rate x day-count fraction, computed in exact integer
arithmetic and rounded once per period to the minor unit. Obligation ids are
content-derived (instance, leg, period) so regeneration is naturally
idempotent. Floating legs consume journaled rate fixings, falling back per
the agreement's disruption policy when a fixing is missing.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from datetime import date

from .calendars import BusinessDayCalendar, roll_forward
from .errors import ConflictingFixing, FixingUnavailable
from .money import Money, RATE_SCALE, ROUND_HALF_AWAY
from .templates import ContractInstance

ACT_360 = "ACT/360"
THIRTY_360 = "30/360"

# Obligation lifecycle
SCHEDULED = "Scheduled"
NETTED = "Netted"
DUE = "Due"
PAID = "Paid"
SUSPENDED = "Suspended"
DEFERRED = "Deferred"
DISCHARGED = "Discharged"

# Obligation origins
ORIGIN_GROSS = "Gross"
ORIGIN_NET = "Net"
ORIGIN_INTEREST = "Interest"
ORIGIN_GROSS_UP = "GrossUp"

_ALLOWED_TRANSITIONS = {
    SCHEDULED: {NETTED, DUE},
    NETTED: set(),
    DUE: {PAID, SUSPENDED, DEFERRED, DISCHARGED},
    SUSPENDED: {DUE},
    DEFERRED: {PAID, SUSPENDED, DISCHARGED, DUE},
    PAID: set(),
    DISCHARGED: set(),
}


@dataclass
class Obligation:
    """A dated, directed payment duty (gross, net, interest or gross-up)."""

    obligation_id: str
    instance_id: str
    payer: str
    payee: str
    amount: Money
    due_date: date
    status: str = SCHEDULED
    origin: str = ORIGIN_GROSS
    netted_into: str | None = None  # net successor, set when a gross is netted
    group_id: str | None = None  # netting group, set on nets
    constituents: tuple[str, ...] = ()  # gross ids folded into a net
    outstanding: int | None = None  # minor units still unpaid; None = amount
    suspended_since: date | None = None  # first date performance was withheld
    taxable: bool = True

    def __post_init__(self):
        if self.amount.amount <= 0 and not (self.origin == ORIGIN_NET and self.amount.amount == 0):
            raise ValueError(f"obligation amount must be positive: {self.amount}")
        if self.outstanding is None:
            self.outstanding = self.amount.amount

    def transition(self, new_status: str) -> None:
        allowed = _ALLOWED_TRANSITIONS[self.status]
        if new_status not in allowed:
            raise ValueError(f"illegal obligation transition {self.status} -> {new_status}")
        self.status = new_status

    @property
    def currency(self) -> str:
        return self.amount.currency


@dataclass
class DeliveryObligation:
    """A dated duty to deliver an asset; never enters netting groups."""

    obligation_id: str
    instance_id: str
    deliverer: str
    recipient: str
    asset_id: str
    quantity: int
    due_date: date
    status: str = SCHEDULED
    suspended_since: date | None = None

    def __post_init__(self):
        if self.quantity <= 0:
            raise ValueError("delivery quantity must be positive")

    def transition(self, new_status: str) -> None:
        allowed = _ALLOWED_TRANSITIONS[self.status]
        if new_status not in allowed:
            raise ValueError(f"illegal delivery transition {self.status} -> {new_status}")
        self.status = new_status


@dataclass(frozen=True)
class RateFixing:
    source: str
    fixing_date: date
    value: int  # micro-units of rate

    @property
    def key(self) -> tuple[str, date]:
        return (self.source, self.fixing_date)


class FixingStore:
    """One fixing per (source, date); immutable once journaled."""

    def __init__(self):
        self._fixings: dict[tuple[str, date], int] = {}

    def ingest(self, fixing: RateFixing) -> bool:
        """Returns True if new, False if an identical fixing already exists."""
        existing = self._fixings.get(fixing.key)
        if existing is None:
            self._fixings[fixing.key] = fixing.value
            return True
        if existing == fixing.value:
            return False
        raise ConflictingFixing(f"{fixing.source} {fixing.fixing_date}: {existing} != {fixing.value}")

    def get(self, source: str, fixing_date: date) -> int | None:
        return self._fixings.get((source, fixing_date))


@dataclass(frozen=True)
class FallbackPolicy:
    policy: str = "use-last-published"  # or "escalate-immediately"
    max_age_business_days: int = 5

    @classmethod
    def from_term(cls, raw) -> "FallbackPolicy":
        if not raw:
            return cls()
        return cls(
            policy=raw.get("policy", "use-last-published"),
            max_age_business_days=int(raw.get("max_age_business_days", 5)),
        )


@dataclass(frozen=True)
class Escalation:
    """A rate disruption needing a human: not an error, a pending request."""

    source: str
    fixing_date: date
    reason: str = "rate-unpublished-beyond-fallback"


@dataclass(frozen=True)
class ResolvedRate:
    value: int  # micro-units
    fallback_applied: bool
    fixed_from: date | None = None


@dataclass(frozen=True)
class LegSchedule:
    payer: str
    payee: str
    currency: str
    notional: Money
    period_dates: tuple[date, ...]  # strictly increasing boundaries
    rate_type: str  # fixed | floating
    fixed_rate: int | None = None  # micro-units
    rate_source: str | None = None
    spread: int = 0  # micro-units, floating only
    day_count: str = ACT_360
    calendar_id: str | None = None

    def __post_init__(self):
        if any(earlier >= later for earlier, later in zip(self.period_dates, self.period_dates[1:])):
            raise ValueError("period dates must be strictly increasing")
        if self.rate_type == "fixed" and self.fixed_rate is None:
            raise ValueError("fixed leg needs fixed_rate")
        if self.rate_type == "floating" and not self.rate_source:
            raise ValueError("floating leg needs rate_source")
        if self.rate_type == "fixed" and self.rate_source:
            raise ValueError("a leg has a fixed rate or a rate source, never both")

    @property
    def periods(self) -> list[tuple[date, date]]:
        return list(zip(self.period_dates, self.period_dates[1:]))


def _month_add(d: date, months: int) -> date:
    month = d.month - 1 + months
    year = d.year + month // 12
    month = month % 12 + 1
    day = min(d.day, [31, 29 if year % 4 == 0 and (year % 100 != 0 or year % 400 == 0) else 28,
                      31, 30, 31, 30, 31, 31, 30, 31, 30, 31][month - 1])
    return date(year, month, day)


def leg_from_dict(raw: dict, default_payee: str) -> LegSchedule:
    """Parse a confirmation leg; period dates explicit or generated monthly."""
    if "period_dates" in raw:
        boundaries = tuple(date.fromisoformat(d) for d in raw["period_dates"])
    else:
        start = date.fromisoformat(raw["effective"])
        end = date.fromisoformat(raw["termination"])
        step = int(raw.get("frequency_months", 3))
        boundaries = [start]
        current = start
        while current < end:
            current = min(_month_add(current, step), end)
            boundaries.append(current)
        boundaries = tuple(boundaries)
    notional_raw = raw["notional"]
    notional = Money(raw["currency"], int(notional_raw["amount"]) if isinstance(notional_raw, dict) else int(notional_raw))
    return LegSchedule(
        payer=raw["payer"],
        payee=raw.get("payee", default_payee),
        currency=raw["currency"],
        notional=notional,
        period_dates=boundaries,
        rate_type=raw["rate_type"],
        fixed_rate=int(raw["fixed_rate"]) if raw.get("fixed_rate") is not None else None,
        rate_source=raw.get("rate_source"),
        spread=int(raw.get("spread", 0)),
        day_count=raw.get("day_count", ACT_360),
        calendar_id=raw.get("calendar_id"),
    )


def instance_legs(instance: ContractInstance) -> list[LegSchedule]:
    parties = instance.agreement.parties
    legs = []
    for raw in instance.confirmation.economics.get("legs", []):
        payer = raw["payer"]
        default_payee = parties[1] if payer == parties[0] else parties[0]
        legs.append(leg_from_dict(raw, default_payee))
    return legs


def day_count_days(start: date, end: date, convention: str) -> int:
    """Numerator day count for the accrual period [start, end)."""
    if convention == ACT_360:
        return (end - start).days
    if convention == THIRTY_360:
        d1 = min(start.day, 30)
        d2 = 30 if (end.day == 31 and d1 >= 30) else end.day
        return 360 * (end.year - start.year) + 30 * (end.month - start.month) + (d2 - d1)
    raise ValueError(f"unsupported day count convention {convention!r}")


def period_amount(
    notional: Money,
    rate_micro: int,
    start: date,
    end: date,
    convention: str,
    rounding: str = ROUND_HALF_AWAY,
) -> Money:
    """notional x rate x days/360, rounded once to the minor unit."""
    days = day_count_days(start, end, convention)
    return notional.mul_ratio(rate_micro * days, RATE_SCALE * 360, rounding)


def resolve_rate(
    leg: LegSchedule,
    fixing_date: date,
    policy: FallbackPolicy,
    fixings: FixingStore,
    calendar: BusinessDayCalendar,
) -> ResolvedRate | Escalation:
    """Fixing for the date, else the disruption fallback, else an escalation."""
    if leg.rate_type == "fixed":
        return ResolvedRate(value=leg.fixed_rate, fallback_applied=False)
    direct = fixings.get(leg.rate_source, fixing_date)
    if direct is not None:
        return ResolvedRate(value=direct + leg.spread, fallback_applied=False)
    if policy.policy == "use-last-published":
        probe = fixing_date
        for _ in range(policy.max_age_business_days):
            # walk back one business day at a time over the fallback window
            step = probe
            while True:
                step = step.fromordinal(step.toordinal() - 1)
                if calendar.is_business_day(step):
                    break
            probe = step
            value = fixings.get(leg.rate_source, probe)
            if value is not None:
                return ResolvedRate(value=value + leg.spread, fallback_applied=True, fixed_from=probe)
    return Escalation(source=leg.rate_source, fixing_date=fixing_date)


def obligation_id_for(instance_id: str, leg_index: int, period_end: date) -> str:
    digest = hashlib.sha256(f"{instance_id}|{leg_index}|{period_end.isoformat()}".encode()).hexdigest()
    return f"ob-{digest[:16]}"


@dataclass
class GenerationResult:
    obligations: list[Obligation] = field(default_factory=list)
    deliveries: list[DeliveryObligation] = field(default_factory=list)
    escalations: list[Escalation] = field(default_factory=list)
    fallbacks: list[tuple[str, ResolvedRate]] = field(default_factory=list)  # (obligation id, rate)


def generate_obligations(
    instance: ContractInstance,
    up_to: date,
    fixings: FixingStore,
    calendar: BusinessDayCalendar,
    already_generated: set[str],
    policy: FallbackPolicy | None = None,
    rounding: str = ROUND_HALF_AWAY,
    strict: bool = False,
) -> GenerationResult:
    """Obligations for every period ending on or before up_to, minus ones
    already generated. Deterministic and idempotent.

    Floating periods whose fixing is unresolvable are reported as escalations
    and retried on later calls (their ids are not marked generated); with
    strict=True they raise FixingUnavailable instead, for direct callers.
    """
    if policy is None:
        policy = FallbackPolicy.from_term(instance.term("rate-fallback-policy"))
    result = GenerationResult()
    for leg_index, leg in enumerate(instance_legs(instance)):
        if leg.notional.is_zero:
            continue
        for start, end in leg.periods:
            if end > up_to:
                break
            ob_id = obligation_id_for(instance.instance_id, leg_index, end)
            if ob_id in already_generated:
                continue
            rate = resolve_rate(leg, end, policy, fixings, calendar)
            if isinstance(rate, Escalation):
                if strict:
                    raise FixingUnavailable(rate.source, rate.fixing_date)
                result.escalations.append(rate)
                continue
            amount = period_amount(leg.notional, rate.value, start, end, leg.day_count, rounding)
            if amount.amount <= 0:
                already_generated.add(ob_id)
                continue
            obligation = Obligation(
                obligation_id=ob_id,
                instance_id=instance.instance_id,
                payer=leg.payer,
                payee=leg.payee,
                amount=amount,
                due_date=roll_forward(end, calendar),
            )
            result.obligations.append(obligation)
            if rate.fallback_applied:
                result.fallbacks.append((ob_id, rate))
            already_generated.add(ob_id)

    for d_index, raw in enumerate(instance.confirmation.economics.get("deliveries", [])):
        due = date.fromisoformat(raw["due_date"])
        if due > up_to:
            continue
        ob_id = obligation_id_for(instance.instance_id, 1000 + d_index, due)
        if ob_id in already_generated:
            continue
        result.deliveries.append(
            DeliveryObligation(
                obligation_id=ob_id,
                instance_id=instance.instance_id,
                deliverer=raw["deliverer"],
                recipient=raw["recipient"],
                asset_id=raw["asset_id"],
                quantity=int(raw["quantity"]),
                due_date=roll_forward(due, calendar),
            )
        )
        already_generated.add(ob_id)
    return result
