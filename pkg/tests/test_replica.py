import random
from datetime import date, timedelta

import pytest

from isdaflow.engine import Engine
from isdaflow.errors import AlreadyStopped, DivergenceDetected, HarnessStopped
from isdaflow.replica import ReplicaHarness

from conftest import all_fixings, base_config, daily_config

WINDOW = ("2024-03-01", "2024-03-12")


def tie_config():
    """Economics engineered so one period amount lands exactly on a half
    minor unit: 3,001.00 at 5% for a 36-day ACT/360 period = 1,500.5, which
    the reference rounding takes to 1501 and the perturbed one to 1500."""
    config = base_config()
    legs = [
        {"payer": "alpha", "currency": "USD", "rate_type": "fixed", "fixed_rate": 50000,
         "notional": {"currency": "USD", "amount": "300100"},
         "period_dates": ["2024-01-01", "2024-02-06"], "day_count": "ACT/360"},
        {"payer": "beta", "currency": "USD", "rate_type": "floating", "rate_source": "bench-3m",
         "notional": {"currency": "USD", "amount": "300100"},
         "period_dates": ["2024-01-01", "2024-02-06"], "day_count": "ACT/360"},
    ]
    config["confirmations"][0]["economics"]["legs"] = legs
    config["elections"]["term_overrides"] = {"default-calendar": "all-days"}
    return config


def test_spawn_equal_genesis_digests():
    harness = ReplicaHarness(3, daily_config(WINDOW))
    digests = harness.genesis_digests()
    assert len(set(digests)) == 1


def test_single_replica_behaves_like_bare_engine():
    harness = ReplicaHarness(1, daily_config(WINDOW))
    bare = Engine(daily_config(WINDOW))
    for command in all_fixings(WINDOW):
        harness.publish(command)
        bare.consume(command)
    harness.publish({"type": "step-day", "date": "2024-03-01"})
    bare.consume({"type": "step-day", "date": "2024-03-01"})
    harness.step_all()
    assert harness.replicas[0].digest == bare.digest


def test_zero_replicas_rejected():
    with pytest.raises(ValueError):
        ReplicaHarness(0, daily_config(WINDOW))


def test_publish_density_and_stop_guard():
    harness = ReplicaHarness(1, daily_config(WINDOW))
    assert harness.publish({"type": "fixing", "source": "s", "date": "2024-03-01", "value": 1}) == 1
    assert harness.publish({"type": "fixing", "source": "s", "date": "2024-03-02", "value": 1}) == 2
    harness.stop_all("done")
    with pytest.raises(HarnessStopped):
        harness.publish({"type": "fixing", "source": "s", "date": "2024-03-03", "value": 1})
    with pytest.raises(AlreadyStopped):
        harness.resume_all()


def test_lockstep_on_random_feeds():
    rng = random.Random(101)
    for _ in range(10):
        harness = ReplicaHarness(3, daily_config(WINDOW))
        current = date(2024, 3, 1)
        for command in all_fixings(WINDOW):
            harness.publish(command)
        for _ in range(rng.randrange(3, 9)):
            roll = rng.random()
            if roll < 0.3:
                harness.publish({"type": "observation", "kind": "CreditSupportDefault",
                                 "party": rng.choice(["alpha", "beta"]), "source": "Oracle"})
            elif roll < 0.5:
                harness.publish({"type": "fund-account", "party": "alpha", "currency": "USD",
                                 "amount": str(rng.randrange(1, 10**9))})
            harness.publish({"type": "step-day", "date": current.isoformat()})
            current += timedelta(days=1)
        report = harness.step_all()
        assert len(set(report.digests.values())) == 1


def test_fault_injection_detected_at_first_divergent_entry():
    harness = ReplicaHarness(3, tie_config(), fault_profiles={1: "perturb-rounding"})
    harness.publish({"type": "fixing", "source": "bench-3m", "date": "2024-02-06", "value": 10000})
    divergence_seq = harness.publish({"type": "step-day", "date": "2024-02-06"})
    with pytest.raises(DivergenceDetected) as exc:
        harness.step_all()
    assert exc.value.seq == divergence_seq
    assert exc.value.replica_ids == (1,)
    diff = exc.value.diff[0]
    assert diff["replica_id"] == 1
    assert diff["reference"]["payload"]["amount"]["amount"] == "1501"  # half away from zero
    assert diff["divergent"]["payload"]["amount"]["amount"] == "1500"  # perturbed replica


def test_replay_ledger_into_fresh_replica():
    harness = ReplicaHarness(2, daily_config(WINDOW))
    for command in all_fixings(WINDOW):
        harness.publish(command)
    harness.publish({"type": "observation", "kind": "CreditSupportDefault",
                     "party": "beta", "source": "Oracle"})
    for day in range(1, 6):
        harness.publish({"type": "step-day", "date": f"2024-03-0{day}"})
    harness.step_all()
    live_digest = harness.replicas[0].digest

    fresh = Engine(daily_config(WINDOW))
    for entry in harness.ledger.entries:
        fresh.consume(entry.datum)
    assert fresh.digest == live_digest


def test_consolidated_authorization_single_request():
    harness = ReplicaHarness(3, daily_config(WINDOW))
    for command in all_fixings(WINDOW):
        harness.publish(command)
    harness.publish({"type": "observation", "kind": "CreditSupportDefault",
                     "party": "beta", "source": "Oracle"})
    harness.publish({"type": "step-day", "date": "2024-03-01"})
    harness.step_all()
    consolidated = harness.consolidate_authorizations()
    assert len(consolidated) == 1
    request = consolidated[0]
    assert request.party == "alpha"
    assert request.replica_ids == (0, 1, 2)

    # one answer, published once, consumed identically by all replicas
    harness.answer(request.request_id, "alpha", "suspend")
    harness.publish({"type": "step-day", "date": "2024-03-02"})
    report = harness.step_all()
    assert len(set(report.digests.values())) == 1
    assert harness.consolidate_authorizations() == []
    for replica in harness.replicas:
        assert replica.engine.pending_auth[request.request_id].status == "Answered"


def test_consolidation_mismatch_is_divergence():
    harness = ReplicaHarness(2, daily_config(WINDOW))
    for command in all_fixings(WINDOW):
        harness.publish(command)
    harness.publish({"type": "observation", "kind": "CreditSupportDefault",
                     "party": "beta", "source": "Oracle"})
    harness.publish({"type": "step-day", "date": "2024-03-01"})
    harness.step_all()
    request_id = next(iter(harness.replicas[1].engine.pending_auth))
    harness.replicas[1].engine.pending_auth[request_id].question = "tampered"
    with pytest.raises(DivergenceDetected):
        harness.consolidate_authorizations()


def test_pause_halts_all_replicas_at_same_cursor():
    harness = ReplicaHarness(3, daily_config(WINDOW))
    for command in all_fixings(WINDOW):
        harness.publish(command)
    harness.publish({"type": "step-day", "date": "2024-03-01"})
    pause_seq = harness.publish({"type": "pause", "reason": "hold"})
    harness.publish({"type": "step-day", "date": "2024-03-02"})  # beyond the pause

    report = harness.step_all()
    assert report.halted_on_pause
    assert report.consumed_through == pause_seq
    assert all(r.cursor == pause_seq for r in harness.replicas)
    assert all(r.mode == "Paused" for r in harness.replicas)

    harness.resume_all()
    harness.step_all()  # consumes the backlog entry published while paused
    assert all(r.mode == "Running" for r in harness.replicas)
    assert len({r.digest for r in harness.replicas}) == 1


def test_stop_leaves_instances_queryable():
    harness = ReplicaHarness(2, daily_config(WINDOW))
    for command in all_fixings(WINDOW):
        harness.publish(command)
    harness.publish({"type": "step-day", "date": "2024-03-01"})
    harness.step_all()
    harness.stop_all("wind-down")
    for replica in harness.replicas:
        assert replica.mode == "Stopped"
        assert replica.engine.instance_state("irs-1") == "Stopped"
        assert replica.engine.obligations_view(status="Paid")  # history intact


def test_empty_feed_leaves_digests_unchanged():
    harness = ReplicaHarness(3, daily_config(WINDOW))
    before = harness.genesis_digests()
    report = harness.step_all()
    assert list(report.digests.values()) == before


def test_oracle_ledger_persists_as_json_lines(tmp_path):
    from isdaflow.replica import load_oracle_ledger

    harness = ReplicaHarness(2, daily_config(WINDOW))
    for command in all_fixings(WINDOW):
        harness.publish(command, tag="feed")
    harness.publish({"type": "step-day", "date": "2024-03-01"}, tag="driver")
    harness.step_all()

    path = tmp_path / "oracle.jsonl"
    harness.ledger.dump(path)
    loaded = load_oracle_ledger(path)
    assert len(loaded.entries) == len(harness.ledger.entries)
    assert loaded.entries[0].tag == "feed"

    # replaying the persisted ledger reproduces the live digest
    fresh = Engine(daily_config(WINDOW))
    for entry in loaded.entries:
        fresh.consume(entry.datum)
    assert fresh.digest == harness.replicas[0].digest
