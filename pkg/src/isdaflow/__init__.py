"""Deterministic event-sourced engine for ISDA Master Agreement payment,
netting, event and settlement automation, with replicated execution and a
human-authorization loop."""

from .calendars import BusinessDayCalendar, CalendarSet, add_business_days, add_calendar_days
from .engine import Engine, replay
from .journal import Journal, load_journal
from .money import Money, money_sum
from .replica import OracleLedger, ReplicaHarness
from .scenario import run_scenario
from .templates import apply_schedule, compile_master, instantiate, resolve_term

__all__ = [
    "BusinessDayCalendar",
    "CalendarSet",
    "Engine",
    "Journal",
    "Money",
    "OracleLedger",
    "ReplicaHarness",
    "add_business_days",
    "add_calendar_days",
    "apply_schedule",
    "compile_master",
    "instantiate",
    "load_journal",
    "money_sum",
    "replay",
    "resolve_term",
    "run_scenario",
]

__version__ = "0.1.0"
