"""Payment netting: same-day, same-currency aggregation per direction.

For each (group, value date, currency) the two directed aggregates are
summed exactly and replaced by a single net obligation equal to the excess
of the larger aggregate over the smaller, payable by the larger side. Equal
aggregates produce a zero net with no payer, journaled so the audit trail
shows netting occurred. Deliveries never net.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from datetime import date

from .cashflows import NETTED, ORIGIN_NET, Obligation, SCHEDULED
from .errors import MixedGroup, OutstandingObligations, UnknownTransaction
from .money import Money
from .templates import ScheduleElections

PER_TRANSACTION = "PerTransaction"
MULTIPLE_TRANSACTION = "MultipleTransaction"

DEFAULT_GROUP = "net-all"


@dataclass
class NettingGroup:
    group_id: str
    members: set[str] = field(default_factory=set)
    mode: str = MULTIPLE_TRANSACTION
    currency_scope: str | None = None


@dataclass(frozen=True)
class NetObligation:
    """The single obligation replacing a day's gross flows in one currency."""

    obligation_id: str
    group_id: str
    value_date: date
    currency: str
    payer: str | None  # None when the aggregates are equal
    payee: str | None
    amount: Money
    constituents: tuple[str, ...]


class GroupLedger:
    """Tracks group membership as transactions are created and retired."""

    def __init__(self, elections: ScheduleElections):
        self._elections = elections
        self.groups: dict[str, NettingGroup] = {}
        self._by_transaction: dict[str, str] = {}

    def assign_group(self, transaction_id: str, known_transactions: set[str]) -> str:
        if transaction_id not in known_transactions:
            raise UnknownTransaction(transaction_id)
        if transaction_id in self._by_transaction:
            return self._by_transaction[transaction_id]
        if self._elections.multiple_transaction_payment_netting:
            name = self._elections.netting_groups.get(transaction_id, DEFAULT_GROUP)
            group_id = f"group-{name}"
            mode = MULTIPLE_TRANSACTION
        else:
            group_id = f"group-txn-{transaction_id}"
            mode = PER_TRANSACTION
        group = self.groups.setdefault(group_id, NettingGroup(group_id=group_id, mode=mode))
        group.members.add(transaction_id)
        self._by_transaction[transaction_id] = group_id
        return group_id

    def group_of(self, transaction_id: str) -> str | None:
        return self._by_transaction.get(transaction_id)

    def retire_transaction(
        self,
        transaction_id: str,
        outstanding: list[Obligation],
        force: bool = False,
        reason: str | None = None,
    ) -> NettingGroup:
        """Remove a transaction from its group; empty groups persist for audit."""
        group_id = self._by_transaction.get(transaction_id)
        if group_id is None:
            raise UnknownTransaction(transaction_id)
        blocking = [ob for ob in outstanding if ob.status in (SCHEDULED, "Due")]
        if blocking and not force:
            raise OutstandingObligations(
                f"{transaction_id} has {len(blocking)} open obligations" + (f" ({reason})" if reason else "")
            )
        group = self.groups[group_id]
        group.members.discard(transaction_id)
        del self._by_transaction[transaction_id]
        return group


def net_obligation_id(group_id: str, value_date: date, currency: str) -> str:
    digest = hashlib.sha256(f"{group_id}|{value_date.isoformat()}|{currency}".encode()).hexdigest()
    return f"net-{digest[:16]}"


def net_day(
    group: NettingGroup,
    value_date: date,
    obligations: list[Obligation],
    parties: tuple[str, str],
) -> list[NetObligation]:
    """Replace the day's gross obligations with one net per currency.

    Every input must be a Scheduled gross obligation of a member transaction,
    due on the value date; each transitions to Netted naming its successor.
    Output order (by currency) and content are independent of input order.
    """
    for ob in obligations:
        if ob.instance_id not in group.members:
            raise MixedGroup(f"{ob.obligation_id} belongs to {ob.instance_id}, not in {group.group_id}")
        if ob.status != SCHEDULED or ob.due_date != value_date:
            raise MixedGroup(f"{ob.obligation_id} is not nettable on {value_date}")

    first, second = parties
    nets: list[NetObligation] = []
    for currency in sorted({ob.currency for ob in obligations}):
        if group.currency_scope and currency != group.currency_scope:
            continue
        batch = [ob for ob in obligations if ob.currency == currency]
        forward = sum(ob.amount.amount for ob in batch if ob.payer == first)
        backward = sum(ob.amount.amount for ob in batch if ob.payer == second)
        excess = forward - backward
        if excess > 0:
            payer, payee = first, second
        elif excess < 0:
            payer, payee = second, first
        else:
            payer = payee = None
        net = NetObligation(
            obligation_id=net_obligation_id(group.group_id, value_date, currency),
            group_id=group.group_id,
            value_date=value_date,
            currency=currency,
            payer=payer,
            payee=payee,
            amount=Money(currency, abs(excess)),
            constituents=tuple(sorted(ob.obligation_id for ob in batch)),
        )
        for ob in batch:
            ob.transition(NETTED)
            ob.netted_into = net.obligation_id
        nets.append(net)
    return nets


def as_payment_obligation(net: NetObligation) -> Obligation | None:
    """A non-zero net becomes a Due payment obligation; zero nets settle vacuously."""
    if net.amount.is_zero or net.payer is None:
        return None
    return Obligation(
        obligation_id=net.obligation_id,
        instance_id=net.group_id,
        payer=net.payer,
        payee=net.payee,
        amount=net.amount,
        due_date=net.value_date,
        status="Due",
        origin=ORIGIN_NET,
        group_id=net.group_id,
        constituents=net.constituents,
    )
