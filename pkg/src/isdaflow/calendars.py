"""Business-day calendars and date arithmetic.

Dates are plain ``datetime.date`` values throughout the engine: proleptic
Gregorian, totally ordered, no time-of-day. Intra-day ordering comes from
journal sequence numbers, never from timestamps.

A calendar is a weekend-day set plus a holiday set; a date is a business day
iff it is neither. Calendars may declare a coverage window; walking past it
raises CalendarRangeExceeded rather than silently treating unknown dates as
holiday-free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

from .errors import CalendarRangeExceeded

_DAY_NAMES = {
    "monday": 0, "tuesday": 1, "wednesday": 2, "thursday": 3,
    "friday": 4, "saturday": 5, "sunday": 6,
}


@dataclass(frozen=True)
class BusinessDayCalendar:
    calendar_id: str
    weekend: frozenset[int] = frozenset({5, 6})  # Mon=0 .. Sun=6
    holidays: frozenset[date] = frozenset()
    coverage_start: date | None = None
    coverage_end: date | None = None

    def _check_covered(self, d: date) -> None:
        if self.coverage_start is not None and d < self.coverage_start:
            raise CalendarRangeExceeded(f"{self.calendar_id} has no data before {self.coverage_start}")
        if self.coverage_end is not None and d > self.coverage_end:
            raise CalendarRangeExceeded(f"{self.calendar_id} has no data after {self.coverage_end}")

    def is_business_day(self, d: date) -> bool:
        self._check_covered(d)
        return d.weekday() not in self.weekend and d not in self.holidays


# A permissive default for agreements that configured no calendar: weekends only.
WEEKEND_ONLY = BusinessDayCalendar(calendar_id="weekend-only")


def add_calendar_days(start: date, n: int) -> date:
    if n < 0:
        raise ValueError("n must be non-negative")
    return start + timedelta(days=n)


def add_business_days(start: date, n: int, cal: BusinessDayCalendar) -> date:
    """Advance n business days from start (exclusive); n=0 returns start."""
    if n < 0:
        raise ValueError("n must be non-negative")
    current = start
    remaining = n
    while remaining > 0:
        current += timedelta(days=1)
        if cal.is_business_day(current):
            remaining -= 1
    return current


def roll_forward(d: date, cal: BusinessDayCalendar) -> date:
    """'Following' convention: first business day on or after d."""
    current = d
    while not cal.is_business_day(current):
        current += timedelta(days=1)
    return current


def load_calendar(source: dict | str | Path) -> BusinessDayCalendar:
    """Build a calendar from a JSON file or an already-parsed dict.

    Schema: {calendar_id, weekend: [day-names], holidays: [ISO dates],
    coverage?: {start, end}}.
    """
    if not isinstance(source, dict):
        source = json.loads(Path(source).read_text())
    weekend = frozenset(_DAY_NAMES[name.lower()] for name in source.get("weekend", ["saturday", "sunday"]))
    holidays = frozenset(date.fromisoformat(h) for h in source.get("holidays", []))
    coverage = source.get("coverage") or {}
    return BusinessDayCalendar(
        calendar_id=source["calendar_id"],
        weekend=weekend,
        holidays=holidays,
        coverage_start=date.fromisoformat(coverage["start"]) if "start" in coverage else None,
        coverage_end=date.fromisoformat(coverage["end"]) if "end" in coverage else None,
    )


@dataclass
class CalendarSet:
    """Named calendars for an agreement, with a weekend-only fallback."""

    calendars: dict[str, BusinessDayCalendar] = field(default_factory=dict)

    def add(self, cal: BusinessDayCalendar) -> None:
        self.calendars[cal.calendar_id] = cal

    def get(self, calendar_id: str | None) -> BusinessDayCalendar:
        if calendar_id is None:
            return WEEKEND_ONLY
        return self.calendars.get(calendar_id, WEEKEND_ONLY)
