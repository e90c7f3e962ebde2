"""Event model: observation, determination and action over the four levels.

An "observation" is anything the platform or a party reports; an event record
only exists once determination decides the observed circumstance matches an
event specification. Events of Default are fault-based; Termination Events
are no-fault. Some kinds carry grace periods (calendar days or local business
days), some carry aggregation thresholds, and some are subjective and can
never be determined without a journaled human authorization.

This module holds the data model and the pure pieces (level classification,
grace deadlines, hierarchy resolution, notice construction); the engine owns
the stateful pipeline and the journal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

from .calendars import CalendarSet, add_business_days, add_calendar_days
from .errors import NotATerminationEvent
from .money import Money

# Event classes
EVENT_OF_DEFAULT = "EventOfDefault"
TERMINATION_EVENT = "TerminationEvent"

# Standard event kinds (2002-form set used by the master template)
FAILURE_TO_PAY = "FailureToPayOrDeliver"
CREDIT_SUPPORT_DEFAULT = "CreditSupportDefault"
CROSS_DEFAULT = "CrossDefault"
BANKRUPTCY = "Bankruptcy"
ILLEGALITY = "Illegality"
FORCE_MAJEURE = "ForceMajeure"
CREDIT_EVENT_UPON_MERGER = "CreditEventUponMerger"
UNCLASSIFIED = "Unclassified"

STANDARD_EVENTS_OF_DEFAULT = (FAILURE_TO_PAY, CREDIT_SUPPORT_DEFAULT, CROSS_DEFAULT, BANKRUPTCY)
STANDARD_TERMINATION_EVENTS = (ILLEGALITY, FORCE_MAJEURE, CREDIT_EVENT_UPON_MERGER)
STANDARD_EVENT_KINDS = STANDARD_EVENTS_OF_DEFAULT + STANDARD_TERMINATION_EVENTS

# Observation sources
ON_PLATFORM = "OnPlatform"
ORACLE = "Oracle"
PARTY_NOTICE = "PartyNotice"

# Levels at which circumstances are observed
LEVEL_TRANSACTION = "Transaction"
LEVEL_RELATIONSHIP = "Relationship"
LEVEL_THIRD_PARTY = "ThirdParty"
LEVEL_EXTERIOR = "Exterior"

_DEFAULT_LEVELS = {
    FAILURE_TO_PAY: LEVEL_TRANSACTION,
    CREDIT_SUPPORT_DEFAULT: LEVEL_RELATIONSHIP,
    BANKRUPTCY: LEVEL_RELATIONSHIP,
    CREDIT_EVENT_UPON_MERGER: LEVEL_RELATIONSHIP,
    CROSS_DEFAULT: LEVEL_THIRD_PARTY,
    ILLEGALITY: LEVEL_EXTERIOR,
    FORCE_MAJEURE: LEVEL_EXTERIOR,
}

# Event record statuses
POTENTIAL_PENDING_GRACE = "PotentialPendingGrace"
OCCURRED = "Occurred"
CONTINUING = "Continuing"
CURED = "Cured"
SUPERSEDED = "Superseded"

LIVE_STATUSES = (POTENTIAL_PENDING_GRACE, OCCURRED, CONTINUING)

# Action policy choices
ESCALATE_TO_HUMAN = "EscalateToHuman"
PRE_PROGRAMMED = "PreProgrammed"
SUSPEND = "Suspend"
IGNORE = "Ignore"

DEFAULT_EOD_MENU = ("suspend", "ignore", "terminate-relationship")
DEFAULT_TE_MENU = ("terminate-affected", "wait")


@dataclass(frozen=True)
class GraceSpec:
    """Grace-period duration: none, calendar days, or local business days."""

    basis: str = "none"  # none | calendar-days | local-business-days
    days: int = 0
    calendar_id: str | None = None

    @classmethod
    def none(cls) -> "GraceSpec":
        return cls()

    @classmethod
    def calendar_days(cls, days: int) -> "GraceSpec":
        return cls(basis="calendar-days", days=days)

    @classmethod
    def local_business_days(cls, days: int, calendar_id: str | None = None) -> "GraceSpec":
        return cls(basis="local-business-days", days=days, calendar_id=calendar_id)

    @classmethod
    def from_dict(cls, raw: dict | None) -> "GraceSpec":
        if not raw or raw.get("basis", "none") == "none":
            return cls.none()
        return cls(
            basis=raw["basis"],
            days=int(raw.get("days", 0)),
            calendar_id=raw.get("calendar_id"),
        )


@dataclass(frozen=True)
class EventSpec:
    kind: str
    event_class: str
    grace: GraceSpec = GraceSpec.none()
    subjective: bool = False
    threshold: Money | None = None
    standard: bool = True

    def __post_init__(self):
        if self.subjective and self.event_class not in (EVENT_OF_DEFAULT, TERMINATION_EVENT):
            raise ValueError("subjective events must still carry a class")


def standard_event_specs() -> dict[str, EventSpec]:
    """The pre-printed event set: every standard kind with its default mechanics.

    Thresholds and grace overrides come from the Schedule; the master only
    fixes shape. Failure to Pay gets the one-local-business-day cure window,
    Cross-Default the (placeholder) threshold gate, Credit Event upon Merger
    the subjective flag.
    """
    return {
        FAILURE_TO_PAY: EventSpec(FAILURE_TO_PAY, EVENT_OF_DEFAULT, GraceSpec.local_business_days(1)),
        CREDIT_SUPPORT_DEFAULT: EventSpec(CREDIT_SUPPORT_DEFAULT, EVENT_OF_DEFAULT),
        CROSS_DEFAULT: EventSpec(CROSS_DEFAULT, EVENT_OF_DEFAULT),
        BANKRUPTCY: EventSpec(BANKRUPTCY, EVENT_OF_DEFAULT),
        ILLEGALITY: EventSpec(ILLEGALITY, TERMINATION_EVENT),
        FORCE_MAJEURE: EventSpec(FORCE_MAJEURE, TERMINATION_EVENT),
        CREDIT_EVENT_UPON_MERGER: EventSpec(CREDIT_EVENT_UPON_MERGER, TERMINATION_EVENT, subjective=True),
    }


def classify_level(kind: str, explicit: str | None = None) -> str:
    """Level is assigned at ingestion; unknown kinds land at Exterior."""
    if explicit:
        return explicit
    return _DEFAULT_LEVELS.get(kind, LEVEL_EXTERIOR)


@dataclass(frozen=True)
class ObservationRecord:
    observation_id: str
    source: str  # OnPlatform | Oracle | PartyNotice
    level: str
    kind: str
    party: str | None  # the party the circumstance is about
    notifier: str | None  # set for PartyNotice
    payload: dict
    seq: int  # journal sequence at which it was recorded


@dataclass
class EventRecord:
    event_id: str
    kind: str
    event_class: str
    affected_parties: tuple[str, ...]
    status: str
    grace_deadline: date | None = None
    observation_ids: tuple[str, ...] = ()
    transaction_ids: tuple[str, ...] = ()
    linked_obligation: str | None = None  # missed payment that cures this event
    waived: bool = False  # counterparty elected to ignore
    occurred_on: date | None = None
    cured_on: date | None = None

    @property
    def live(self) -> bool:
        return self.status in LIVE_STATUSES and not self.waived

    def snapshot(self) -> dict:
        return {
            "event_id": self.event_id,
            "kind": self.kind,
            "class": self.event_class,
            "affected_parties": list(self.affected_parties),
            "status": self.status,
            "grace_deadline": self.grace_deadline,
            "observation_ids": list(self.observation_ids),
            "transaction_ids": list(self.transaction_ids),
            "waived": self.waived,
        }


@dataclass
class ActionPolicy:
    """How determined events are acted on, per event kind.

    The action menu is closed; subjective kinds always escalate to a human.
    Once a counterparty has accumulated `escalation_threshold` occurred
    events, subsequent menus drop the lenient "ignore" option.
    """

    choices: dict[str, str] = field(default_factory=dict)  # kind -> action choice
    escalation_threshold: int = 3

    def choice_for(self, spec: EventSpec) -> str:
        if spec.subjective:
            return ESCALATE_TO_HUMAN
        return self.choices.get(spec.kind, ESCALATE_TO_HUMAN)


def grace_deadline(spec: EventSpec, start: date, calendars: CalendarSet) -> date:
    """Deadline by which the underlying circumstance may still be cured."""
    grace = spec.grace
    if grace.basis == "none":
        raise ValueError(f"{spec.kind} has no grace period")
    if grace.basis == "calendar-days":
        return add_calendar_days(start, grace.days)
    return add_business_days(start, grace.days, calendars.get(grace.calendar_id))


def resolve_hierarchy(
    concurrent: list[EventRecord],
    precedence: list[str] | None = None,
) -> tuple[EventRecord, list[EventRecord]]:
    """Pick the governing event among records arising from one circumstance.

    Default precedence puts Illegality then Force Majeure ahead of everything,
    then other Termination Events, then Events of Default; within a band the
    input is ranked by kind name so the result is order-independent. Losers
    are returned for supersession; a singleton resolves to itself.
    """
    if not concurrent:
        raise ValueError("no events to resolve")
    if len(concurrent) == 1:
        return concurrent[0], []
    order = precedence if precedence is not None else [ILLEGALITY, FORCE_MAJEURE]

    def rank(record: EventRecord) -> tuple:
        try:
            band = order.index(record.kind)
        except ValueError:
            band = len(order) + (0 if record.event_class == TERMINATION_EVENT else 1)
        return (band, record.kind, record.event_id)

    ranked = sorted(concurrent, key=rank)
    return ranked[0], ranked[1:]


def record_dual_affected(event: EventRecord, parties: tuple[str, str]) -> EventRecord:
    """Mark a Termination Event as affecting both parties simultaneously."""
    if event.event_class != TERMINATION_EVENT:
        raise NotATerminationEvent(event.kind)
    event.affected_parties = tuple(sorted(parties))
    return event


@dataclass(frozen=True)
class Notice:
    notice_id: str
    sender: str
    recipient: str
    event_id: str
    kind: str
    affected_transactions: tuple[str, ...]


def build_notices(event: EventRecord, parties: tuple[str, str]) -> list[Notice]:
    """Notification duty for Termination Events.

    Each Affected Party must promptly notify the other; Force Majeure obliges
    both parties regardless of who is affected. Events of Default carry no
    mandatory notice.
    """
    if event.event_class != TERMINATION_EVENT or event.status not in (OCCURRED, CONTINUING):
        return []
    senders = set(event.affected_parties)
    if event.kind == FORCE_MAJEURE:
        senders = set(parties)
    notices = []
    for sender in sorted(senders):
        recipient = parties[1] if sender == parties[0] else parties[0]
        notices.append(
            Notice(
                notice_id=f"notice-{event.event_id}-{sender}",
                sender=sender,
                recipient=recipient,
                event_id=event.event_id,
                kind=event.kind,
                affected_transactions=event.transaction_ids,
            )
        )
    return notices


def action_menu(event_class: str, lenient: bool) -> tuple[str, ...]:
    """The closed menu offered with a request for authorization."""
    if event_class == EVENT_OF_DEFAULT:
        menu = DEFAULT_EOD_MENU
    else:
        menu = DEFAULT_TE_MENU
    if not lenient:
        menu = tuple(m for m in menu if m != "ignore")
    return menu
