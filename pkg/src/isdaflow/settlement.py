"""Settlement gate: condition precedent, default interest, multibranch
discharge and tax withholding.

An outgoing payment is performed only when no Event of Default or Potential
Event of Default is continuing against the payee side; failing that the
obligation is suspended at full quantum: suspension withholds performance,
it never expunges or reduces the duty, and it can persist indefinitely until
cure. Interest on deferred amounts is proposed, never self-executed: a human
applies or waives every charge. Incoming funds from any designated branch of
the payer discharge oldest-first. Withholding tax deducts at source and, when
the tax does not arise from the payee's own connection to the taxing
authority, a gross-up obligation makes the payee whole.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

from .cashflows import DUE, Obligation, SUSPENDED
from .errors import EmptyWindow, RuleExpired, UndesignatedBranch, UnknownBranch
from .events import BANKRUPTCY, EVENT_OF_DEFAULT, EventRecord
from .money import Money, RATE_SCALE, round_ratio
from .parties import Party

PASS = "Pass"


@dataclass(frozen=True)
class SuspensionCheck:
    outcome: str  # Pass | Suspend
    event_ids: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return self.outcome == PASS


def check_condition_precedent(
    payer: str,
    counterparty: str,
    live_events: list[EventRecord],
    metavante_mode: bool = False,
) -> SuspensionCheck:
    """Gate one outgoing payment of `payer` against events on `counterparty`.

    Suspends iff any uncured, unwaived EoD or Potential EoD stands with
    respect to the counterparty. Metavante mode (New York law uncertainty)
    excludes Bankruptcy events from the gate. A party's own default never
    suspends its own outgoing obligations.
    """
    suspending = []
    for record in live_events:
        if record.event_class != EVENT_OF_DEFAULT or not record.live:
            continue
        if counterparty not in record.affected_parties:
            continue
        if metavante_mode and record.kind == BANKRUPTCY:
            continue
        suspending.append(record.event_id)
    if suspending:
        return SuspensionCheck("Suspend", tuple(sorted(suspending)))
    return SuspensionCheck(PASS)


class SuspensionLedger:
    """Which obligations each live event is suspending, with reverse index."""

    def __init__(self):
        self.by_event: dict[str, set[str]] = {}
        self.by_obligation: dict[str, set[str]] = {}
        self.suspended_on: dict[str, date] = {}

    def suspend(self, obligation: Obligation, event_ids: tuple[str, ...], on: date) -> None:
        for event_id in event_ids:
            self.by_event.setdefault(event_id, set()).add(obligation.obligation_id)
            self.by_obligation.setdefault(obligation.obligation_id, set()).add(event_id)
        if obligation.status != SUSPENDED:
            obligation.transition(SUSPENDED)
        if obligation.suspended_since is None:
            obligation.suspended_since = on
        self.suspended_on.setdefault(obligation.obligation_id, on)

    def release_event(self, event_id: str) -> list[str]:
        """Drop one event's holds; returns obligations no longer held by any."""
        held = sorted(self.by_event.pop(event_id, set()))
        freed = []
        for ob_id in held:
            holders = self.by_obligation.get(ob_id, set())
            holders.discard(event_id)
            if not holders:
                self.by_obligation.pop(ob_id, None)
                self.suspended_on.pop(ob_id, None)
                freed.append(ob_id)
        return freed

    def holders_of(self, obligation_id: str) -> set[str]:
        return set(self.by_obligation.get(obligation_id, set()))


@dataclass
class InterestCharge:
    charge_id: str
    obligation_id: str
    payer: str
    payee: str
    window_start: date
    window_end: date
    rate: int  # micro-units per year
    denominator: int
    amount: Money
    status: str = "Proposed"  # Proposed | Authorized | Waived | Paid


def accrue_default_interest(
    obligation: Obligation,
    rate_micro: int,
    window_start: date,
    window_end: date,
    denominator: int = 360,
) -> InterestCharge:
    """Propose interest on a deferred/suspended-then-paid obligation.

    amount = principal x rate x days/denominator, rounded once. The charge
    affects nothing until a journaled party decision authorizes or waives it.
    """
    days = (window_end - window_start).days
    if days <= 0:
        raise EmptyWindow(f"{window_start} .. {window_end}")
    principal = obligation.amount
    amount = Money(
        principal.currency,
        round_ratio(principal.amount * rate_micro * days, RATE_SCALE * denominator),
    )
    return InterestCharge(
        charge_id=f"int-{obligation.obligation_id}",
        obligation_id=obligation.obligation_id,
        payer=obligation.payer,
        payee=obligation.payee,
        window_start=window_start,
        window_end=window_end,
        rate=rate_micro,
        denominator=denominator,
        amount=amount,
    )


@dataclass(frozen=True)
class IncomingPayment:
    payment_id: str
    payer: str
    branch_id: str
    amount: Money
    value_date: date


@dataclass
class DischargeReport:
    payment_id: str
    matched: list[tuple[str, int]] = field(default_factory=list)  # (obligation id, minor units applied)
    unapplied: int = 0  # overage left in the credit bucket


def validate_branch(payment: IncomingPayment, party: Party, designated: tuple[str, ...]) -> None:
    """Any listed office may pay; head office always may; others are rejected."""
    branch = party.branch(payment.branch_id)
    if branch is None:
        raise UnknownBranch(payment.branch_id)
    if branch.branch_id == party.head_office.branch_id:
        return
    if designated and branch.branch_id not in designated:
        raise UndesignatedBranch(payment.branch_id)
    if not designated and not branch.designated_multibranch:
        raise UndesignatedBranch(payment.branch_id)


def match_incoming(
    payment: IncomingPayment,
    due_obligations: list[Obligation],
    extra_credit: int = 0,
) -> DischargeReport:
    """Apply funds to the payer's Due obligations in this currency.

    Deterministic order: oldest due date first, then obligation id. Never
    over-discharges; a partial match leaves the residual Due, overage is
    reported for the credit bucket.
    """
    available = payment.amount.amount + extra_credit
    report = DischargeReport(payment_id=payment.payment_id)
    candidates = sorted(
        (
            ob
            for ob in due_obligations
            if ob.payer == payment.payer and ob.currency == payment.amount.currency and ob.status == DUE
        ),
        key=lambda ob: (ob.due_date, ob.obligation_id),
    )
    for ob in candidates:
        if available <= 0:
            break
        applied = min(available, ob.outstanding)
        if applied <= 0:
            continue
        ob.outstanding -= applied
        available -= applied
        report.matched.append((ob.obligation_id, applied))
        if ob.outstanding == 0:
            ob.transition("Discharged")
    report.unapplied = available
    return report


@dataclass(frozen=True)
class TaxRule:
    rule_id: str
    jurisdiction: str
    rate: int  # micro-units, 0 <= rate < 1.0
    indemnifiable: bool  # tax arises from payee's own connection to the authority
    effective_from: date | None = None
    effective_to: date | None = None
    payer: str | None = None  # restrict to one paying party; None applies to both

    def __post_init__(self):
        if not (0 <= self.rate < RATE_SCALE):
            raise ValueError("withholding rate must be in [0, 1)")

    def effective_on(self, value_date: date) -> bool:
        if self.effective_from and value_date < self.effective_from:
            return False
        if self.effective_to and value_date > self.effective_to:
            return False
        return True

    @classmethod
    def from_dict(cls, raw: dict) -> "TaxRule":
        return cls(
            rule_id=raw["rule_id"],
            jurisdiction=raw.get("jurisdiction", ""),
            rate=int(raw["rate"]),
            indemnifiable=bool(raw.get("indemnifiable", False)),
            effective_from=date.fromisoformat(raw["effective_from"]) if raw.get("effective_from") else None,
            effective_to=date.fromisoformat(raw["effective_to"]) if raw.get("effective_to") else None,
            payer=raw.get("payer"),
        )


@dataclass(frozen=True)
class WithholdingResult:
    net_paid: Money
    withheld: Money
    gross_up: Money | None  # extra obligation making the payee whole


def apply_withholding(gross: Money, rule: TaxRule, value_date: date, gross_up_elected: bool = True) -> WithholdingResult:
    """Deduct required tax at source and allocate the burden.

    Non-indemnifiable tax falls on the payer: a gross-up of (gross - net)
    reconstructs the payee's full receipt exactly. Indemnifiable tax falls on
    the payee: net only, no gross-up.
    """
    if not rule.effective_on(value_date):
        raise RuleExpired(f"{rule.rule_id} not effective on {value_date}")
    withheld = Money(gross.currency, round_ratio(gross.amount * rule.rate, RATE_SCALE))
    net = gross - withheld
    gross_up = None
    if not rule.indemnifiable and gross_up_elected and withheld.amount > 0:
        gross_up = gross - net
    return WithholdingResult(net_paid=net, withheld=withheld, gross_up=gross_up)
