import random
from datetime import date, timedelta

import pytest

from isdaflow.calendars import BusinessDayCalendar, CalendarSet
from isdaflow.errors import NotATerminationEvent
from isdaflow.events import (
    CONTINUING,
    CROSS_DEFAULT,
    EVENT_OF_DEFAULT,
    EventRecord,
    EventSpec,
    FAILURE_TO_PAY,
    FORCE_MAJEURE,
    GraceSpec,
    ILLEGALITY,
    LEVEL_EXTERIOR,
    LEVEL_RELATIONSHIP,
    LEVEL_THIRD_PARTY,
    LEVEL_TRANSACTION,
    OCCURRED,
    TERMINATION_EVENT,
    action_menu,
    build_notices,
    classify_level,
    grace_deadline,
    record_dual_affected,
    resolve_hierarchy,
)

PARTIES = ("alpha", "beta")


def calendars(cal=None):
    cs = CalendarSet()
    if cal is not None:
        cs.add(cal)
    return cs


def event(event_id, kind, event_class, affected=("beta",), status=OCCURRED, obs=("obs-1",)):
    return EventRecord(
        event_id=event_id, kind=kind, event_class=event_class,
        affected_parties=tuple(affected), status=status, observation_ids=tuple(obs),
        transaction_ids=("t1",),
    )


def test_level_classification():
    assert classify_level(FAILURE_TO_PAY) == LEVEL_TRANSACTION
    assert classify_level("Bankruptcy") == LEVEL_RELATIONSHIP
    assert classify_level(CROSS_DEFAULT) == LEVEL_THIRD_PARTY
    assert classify_level(ILLEGALITY) == LEVEL_EXTERIOR
    assert classify_level("SomethingNew") == LEVEL_EXTERIOR
    assert classify_level(FAILURE_TO_PAY, explicit="Exterior") == "Exterior"


def test_grace_deadline_calendar_days():
    spec = EventSpec("k", EVENT_OF_DEFAULT, GraceSpec.calendar_days(3))
    assert grace_deadline(spec, date(2024, 1, 5), calendars()) == date(2024, 1, 8)


def test_grace_deadline_business_days_weekend():
    spec = EventSpec("k", EVENT_OF_DEFAULT, GraceSpec.local_business_days(1))
    # Friday + 1 local business day = Monday (weekend-only fallback calendar)
    assert grace_deadline(spec, date(2024, 1, 5), calendars()) == date(2024, 1, 8)


def test_grace_deadline_holiday_span_oracle():
    cal = BusinessDayCalendar("hol", holidays=frozenset({date(2024, 7, 4)}))
    spec = EventSpec("k", EVENT_OF_DEFAULT, GraceSpec.local_business_days(2, "hol"))
    # oracle: Wed Jul 3 -> skip Jul 4 holiday -> Fri Jul 5 (1) -> Mon Jul 8 (2)
    start = date(2024, 7, 3)
    current, left = start, 2
    while left:
        current += timedelta(days=1)
        if current.weekday() < 5 and current != date(2024, 7, 4):
            left -= 1
    assert current == date(2024, 7, 8)
    assert grace_deadline(spec, start, calendars(cal)) == date(2024, 7, 8)


def test_grace_requires_spec():
    spec = EventSpec("k", EVENT_OF_DEFAULT)  # no grace
    with pytest.raises(ValueError):
        grace_deadline(spec, date(2024, 1, 1), calendars())


def test_hierarchy_example():
    illegality = event("e1", ILLEGALITY, TERMINATION_EVENT, affected=("alpha",))
    failure = event("e2", FAILURE_TO_PAY, EVENT_OF_DEFAULT, affected=("alpha",))
    governing, superseded = resolve_hierarchy([failure, illegality])
    assert governing is illegality
    assert superseded == [failure]
    # input order never matters
    governing2, _ = resolve_hierarchy([illegality, failure])
    assert governing2 is illegality


def test_hierarchy_singleton():
    only = event("e1", FAILURE_TO_PAY, EVENT_OF_DEFAULT)
    governing, superseded = resolve_hierarchy([only])
    assert governing is only and superseded == []


def test_hierarchy_order_independent_random():
    rng = random.Random(1)
    records = [
        event("e1", ILLEGALITY, TERMINATION_EVENT),
        event("e2", FORCE_MAJEURE, TERMINATION_EVENT),
        event("e3", FAILURE_TO_PAY, EVENT_OF_DEFAULT),
        event("e4", "Bankruptcy", EVENT_OF_DEFAULT),
    ]
    reference = None
    for _ in range(12):
        shuffled = list(records)
        rng.shuffle(shuffled)
        governing, superseded = resolve_hierarchy(shuffled)
        outcome = (governing.event_id, sorted(s.event_id for s in superseded))
        reference = reference or outcome
        assert outcome == reference
    assert reference[0] == "e1"  # Illegality governs by default precedence


def test_custom_precedence():
    records = [
        event("e1", ILLEGALITY, TERMINATION_EVENT),
        event("e2", FORCE_MAJEURE, TERMINATION_EVENT),
    ]
    governing, _ = resolve_hierarchy(records, precedence=[FORCE_MAJEURE, ILLEGALITY])
    assert governing.kind == FORCE_MAJEURE


def test_dual_affected():
    te = event("e1", ILLEGALITY, TERMINATION_EVENT, affected=("alpha",))
    updated = record_dual_affected(te, PARTIES)
    assert updated.affected_parties == ("alpha", "beta")
    eod = event("e2", FAILURE_TO_PAY, EVENT_OF_DEFAULT)
    with pytest.raises(NotATerminationEvent):
        record_dual_affected(eod, PARTIES)


def test_notices_affected_party_notifies_other():
    te = event("e1", ILLEGALITY, TERMINATION_EVENT, affected=("alpha",))
    notices = build_notices(te, PARTIES)
    assert len(notices) == 1
    assert (notices[0].sender, notices[0].recipient) == ("alpha", "beta")
    assert notices[0].affected_transactions == ("t1",)


def test_notices_force_majeure_both_parties():
    te = event("e1", FORCE_MAJEURE, TERMINATION_EVENT, affected=("alpha",))
    senders = {n.sender for n in build_notices(te, PARTIES)}
    assert senders == {"alpha", "beta"}


def test_no_notice_for_events_of_default():
    eod = event("e1", FAILURE_TO_PAY, EVENT_OF_DEFAULT)
    assert build_notices(eod, PARTIES) == []


def test_no_notice_while_pending_grace():
    te = event("e1", ILLEGALITY, TERMINATION_EVENT, status="PotentialPendingGrace")
    assert build_notices(te, PARTIES) == []
    te.status = CONTINUING
    assert len(build_notices(te, PARTIES)) == 1


def test_action_menu_escalation_drops_ignore():
    assert action_menu(EVENT_OF_DEFAULT, lenient=True) == ("suspend", "ignore", "terminate-relationship")
    assert action_menu(EVENT_OF_DEFAULT, lenient=False) == ("suspend", "terminate-relationship")
    assert "ignore" not in action_menu(TERMINATION_EVENT, lenient=True)
