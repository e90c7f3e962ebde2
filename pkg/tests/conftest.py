"""Shared builders for engine configurations used across the test suite."""

from __future__ import annotations

import copy

import pytest


def swap_legs(notional="10000000000", fixed_rate=50000, float_source="bench-3m",
              effective="2024-01-01", termination="2024-07-01", frequency_months=3,
              currency="USD", period_dates=None):
    base = {
        "currency": currency,
        "notional": {"currency": currency, "amount": notional},
        "day_count": "ACT/360",
    }
    if period_dates is not None:
        span = {"period_dates": period_dates}
    else:
        span = {"effective": effective, "termination": termination,
                "frequency_months": frequency_months}
    return [
        {**base, **span, "payer": "alpha", "rate_type": "fixed", "fixed_rate": fixed_rate},
        {**base, **span, "payer": "beta", "rate_type": "floating", "rate_source": float_source},
    ]


def base_config(**overrides):
    config = {
        "master": {"version_tag": "2002"},
        "elections": {
            "multiple_transaction_payment_netting": True,
            "cross_default_threshold": {"currency": "USD", "amount": "1000000000"},
        },
        "parties": [
            {"party_id": "alpha", "name": "Alpha Bank", "jurisdiction": "GB",
             "branches": [
                 {"branch_id": "alpha-head", "office_location": "London"},
                 {"branch_id": "alpha-sg", "office_location": "Singapore",
                  "designated_multibranch": True},
                 {"branch_id": "alpha-ky", "office_location": "Cayman"},
             ]},
            {"party_id": "beta", "name": "Beta Corp", "jurisdiction": "US"},
        ],
        "confirmations": [
            {
                "transaction_id": "irs-1",
                "product_type": "interest-rate-swap",
                "economics": {
                    "notional": {"currency": "USD", "amount": "10000000000"},
                    "currency": "USD",
                    "legs": swap_legs(),
                },
            }
        ],
        "calendars": [
            {"calendar_id": "all-days", "weekend": [], "holidays": []},
        ],
        "accounts": {"alpha": {"USD": "1000000000000"}, "beta": {"USD": "1000000000000"}},
    }
    config.update(copy.deepcopy(overrides))
    return config


def daily_config(days=("2024-03-01", "2024-03-12"), **overrides):
    """A swap paying daily over a short window; trades every calendar day."""
    from datetime import date, timedelta

    start = date.fromisoformat(days[0])
    end = date.fromisoformat(days[1])
    boundaries = []
    current = start - timedelta(days=1)
    while current <= end:
        boundaries.append(current.isoformat())
        current += timedelta(days=1)
    config = base_config(**overrides)
    config["confirmations"][0]["economics"]["legs"] = swap_legs(period_dates=boundaries)
    config["elections"]["term_overrides"] = {"default-calendar": "all-days"}
    return config


def all_fixings(days, source="bench-3m", value=30000):
    from datetime import date, timedelta

    start = date.fromisoformat(days[0])
    end = date.fromisoformat(days[1])
    commands = []
    current = start
    while current <= end:
        commands.append({"type": "fixing", "source": source,
                         "date": current.isoformat(), "value": value})
        current += timedelta(days=1)
    return commands


@pytest.fixture
def config():
    return base_config()
