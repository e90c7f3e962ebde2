import random
from datetime import date, timedelta

import pytest

from isdaflow.calendars import (
    BusinessDayCalendar,
    CalendarSet,
    WEEKEND_ONLY,
    add_business_days,
    add_calendar_days,
    load_calendar,
    roll_forward,
)
from isdaflow.errors import CalendarRangeExceeded


def brute_force_add(start: date, n: int, cal: BusinessDayCalendar) -> date:
    """Independent day-by-day oracle."""
    current = start
    remaining = n
    while remaining > 0:
        current += timedelta(days=1)
        if current.weekday() not in cal.weekend and current not in cal.holidays:
            remaining -= 1
    return current


def test_weekend_skip():
    assert add_business_days(date(2024, 1, 5), 1, WEEKEND_ONLY) == date(2024, 1, 8)


def test_zero_is_identity():
    for d in (date(2024, 1, 6), date(2024, 2, 29), date(1999, 12, 31)):
        assert add_business_days(d, 0, WEEKEND_ONLY) == d


def test_holiday_span():
    # computed with the day-by-day oracle: 25th/26th are holidays, plus a weekend
    cal = BusinessDayCalendar(
        calendar_id="xmas",
        holidays=frozenset({date(2024, 12, 25), date(2024, 12, 26)}),
    )
    start = date(2024, 12, 24)
    assert brute_force_add(start, 3, cal) == date(2024, 12, 31)
    assert add_business_days(start, 3, cal) == date(2024, 12, 31)


def test_negative_rejected():
    with pytest.raises(ValueError):
        add_business_days(date(2024, 1, 1), -1, WEEKEND_ONLY)
    with pytest.raises(ValueError):
        add_calendar_days(date(2024, 1, 1), -1)


def test_calendar_days_examples():
    assert add_calendar_days(date(2024, 1, 5), 3) == date(2024, 1, 8)
    assert add_calendar_days(date(2024, 2, 28), 1) == date(2024, 2, 29)  # leap year
    assert add_calendar_days(date(2023, 12, 30), 5) == date(2024, 1, 4)


def test_coverage_exceeded():
    cal = BusinessDayCalendar(
        calendar_id="bounded",
        holidays=frozenset({date(2024, 6, 3)}),
        coverage_start=date(2024, 1, 1),
        coverage_end=date(2024, 6, 30),
    )
    assert add_business_days(date(2024, 6, 25), 3, cal) == date(2024, 6, 28)
    with pytest.raises(CalendarRangeExceeded):
        add_business_days(date(2024, 6, 27), 5, cal)


def test_composition_property():
    rng = random.Random(42)
    cal = BusinessDayCalendar(
        calendar_id="mix",
        holidays=frozenset(date(2024, 1, 1) + timedelta(days=rng.randrange(365)) for _ in range(15)),
    )
    for _ in range(300):
        start = date(2024, 1, 1) + timedelta(days=rng.randrange(200))
        m, n = rng.randrange(20), rng.randrange(20)
        combined = add_business_days(start, m + n, cal)
        stepwise = add_business_days(add_business_days(start, m, cal), n, cal)
        assert combined == stepwise


def test_brute_force_agreement_10k():
    rng = random.Random(2024)
    calendars = []
    for i in range(5):
        holidays = frozenset(
            date(2020, 1, 1) + timedelta(days=rng.randrange(3000)) for _ in range(40)
        )
        weekend = frozenset({5, 6}) if i % 2 == 0 else frozenset({4, 5})
        calendars.append(BusinessDayCalendar(f"cal-{i}", weekend=weekend, holidays=holidays))
    for _ in range(10_000):
        cal = calendars[rng.randrange(len(calendars))]
        start = date(2020, 1, 1) + timedelta(days=rng.randrange(2500))
        n = rng.randrange(61)
        assert add_business_days(start, n, cal) == brute_force_add(start, n, cal)


def test_roll_forward():
    assert roll_forward(date(2024, 1, 6), WEEKEND_ONLY) == date(2024, 1, 8)  # Sat -> Mon
    assert roll_forward(date(2024, 1, 8), WEEKEND_ONLY) == date(2024, 1, 8)


def test_load_calendar_from_dict():
    cal = load_calendar({
        "calendar_id": "usny",
        "weekend": ["Saturday", "Sunday"],
        "holidays": ["2024-07-04"],
        "coverage": {"start": "2024-01-01", "end": "2024-12-31"},
    })
    assert not cal.is_business_day(date(2024, 7, 4))
    assert cal.is_business_day(date(2024, 7, 5))
    assert cal.coverage_end == date(2024, 12, 31)


def test_load_calendar_from_file(tmp_path):
    path = tmp_path / "cal.json"
    path.write_text('{"calendar_id": "x", "weekend": ["sunday"], "holidays": []}')
    cal = load_calendar(path)
    assert cal.is_business_day(date(2024, 1, 6))  # Saturday trades
    assert not cal.is_business_day(date(2024, 1, 7))


def test_calendar_set_fallback():
    cs = CalendarSet()
    assert cs.get(None).calendar_id == "weekend-only"
    assert cs.get("missing").calendar_id == "weekend-only"
    cs.add(BusinessDayCalendar("tokyo"))
    assert cs.get("tokyo").calendar_id == "tokyo"
