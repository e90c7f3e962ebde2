"""Scenario files: scripted days of inputs plus outcome assertions.

A scenario binds an agreement configuration to a day-by-day script of
observations, fixings, payments, authorizations and control commands, then
checks declared predicates against the resulting journal and state. Runs are
deterministic: the same file produces the same journal digest on every run
and platform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

from .engine import Engine
from .errors import EngineStopped, HarnessStopped, ScenarioParseError
from .replica import ReplicaHarness


@dataclass
class CheckResult:
    description: str
    passed: bool
    detail: str = ""


@dataclass
class ScenarioResult:
    name: str
    checks: list[CheckResult] = field(default_factory=list)
    engine: Engine | None = None
    harness: ReplicaHarness | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def report_lines(self) -> list[str]:
        lines = []
        for check in self.checks:
            status = "PASS" if check.passed else "FAIL"
            suffix = f": {check.detail}" if (check.detail and not check.passed) else ""
            lines.append(f"[{status}] {check.description}{suffix}")
        return lines


def load_scenario(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(exc.msg, line=exc.lineno, column=exc.colno) from None
    if not isinstance(raw, dict) or "config" not in raw:
        raise ScenarioParseError("scenario must be an object with a 'config' section")
    _expand_fixing_feeds(raw, path.parent)
    return raw


def _expand_fixing_feeds(raw: dict, base_dir: Path) -> None:
    """Inline fixing-feed files: JSON-lines, one fixing per line, kept in order.

    Expansion happens at load time so the journal records each fixing as its
    own command and replay never needs the feed file.
    """
    for day in raw.get("days", []):
        commands = day.get("commands")
        if not commands:
            continue
        expanded = []
        for command in commands:
            if command.get("type") == "fixing-feed":
                feed_path = base_dir / command["path"]
                for line_no, line in enumerate(feed_path.read_text().splitlines(), start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        fixing = json.loads(line)
                    except json.JSONDecodeError as exc:
                        raise ScenarioParseError(
                            f"{feed_path.name}: {exc.msg}", line=line_no, column=exc.colno
                        ) from None
                    expanded.append({"type": "fixing", **fixing})
            else:
                expanded.append(command)
        day["commands"] = expanded


def expand_days(raw_days: list[dict]) -> list[dict]:
    """Normalize day entries; range entries become one quiet step per day."""
    days = []
    for entry in raw_days:
        if "from" in entry:
            start = date.fromisoformat(entry["from"])
            end = date.fromisoformat(entry["to"])
            commands_on = entry.get("commands_on", {})
            current = start
            while current <= end:
                days.append({
                    "date": current.isoformat(),
                    "commands": commands_on.get(current.isoformat(), []),
                    "expect": [],
                })
                current += timedelta(days=1)
        else:
            days.append({
                "date": entry["date"],
                "commands": entry.get("commands", []),
                "expect": entry.get("expect", []),
            })
    return days


class _Driver:
    """Feeds inputs to either a bare engine or a replica harness."""

    def __init__(self, config: dict, replicas: int, fault_profiles: dict[int, str] | None):
        if replicas > 1 or fault_profiles:
            self.harness = ReplicaHarness(replicas, config, fault_profiles)
            self.engine = self.harness.replicas[0].engine
        else:
            self.harness = None
            self.engine = Engine(config)

    def submit(self, datum: dict) -> None:
        if self.harness is not None:
            seq = self.harness.publish(datum)
            self.harness.step_all(seq)
        else:
            self.engine.consume(datum)


def run_scenario(
    raw: dict | str | Path,
    replicas: int = 1,
    fault_profiles: dict[int, str] | None = None,
) -> ScenarioResult:
    if not isinstance(raw, dict):
        raw = load_scenario(raw)
    name = raw.get("name", "unnamed")
    driver = _Driver(raw["config"], replicas, fault_profiles)
    result = ScenarioResult(name=name, engine=driver.engine, harness=driver.harness)

    for day in expand_days(raw.get("days", [])):
        try:
            for command in day["commands"]:
                driver.submit(command)
            driver.submit({"type": "step-day", "date": day["date"]})
        except (EngineStopped, HarnessStopped):
            pass  # days after a stop command no longer perform automatically
        for index, assertion in enumerate(day["expect"]):
            result.checks.append(
                evaluate_assertion(driver.engine, assertion, f"day {day['date']} #{index}"))

    for index, assertion in enumerate(raw.get("assertions", [])):
        result.checks.append(evaluate_assertion(driver.engine, assertion, f"final #{index}"))
    return result


# -- assertion predicates ------------------------------------------------------

def _match_row(row: dict, where: dict) -> bool:
    return all(str(row.get(key)) == str(value) for key, value in where.items())


def _matching_entries(engine: Engine, kind: str | None, where: dict) -> list:
    matches = []
    for entry in engine.journal.entries:
        if kind and entry.kind != kind:
            continue
        if all(str(entry.payload.get(k)) == str(v) for k, v in where.items()):
            matches.append(entry)
    return matches


def evaluate_assertion(engine: Engine, assertion: dict, label: str) -> CheckResult:
    kind = assertion.get("assert")
    description = assertion.get("describe") or f"{label}: {kind}"

    if kind == "obligation":
        rows = [r for r in engine.obligations_view() if _match_row(r, assertion.get("where", {}))]
        problems = []
        if "count" in assertion and len(rows) != int(assertion["count"]):
            problems.append(f"count {len(rows)} != {assertion['count']}")
        if "min_count" in assertion and len(rows) < int(assertion["min_count"]):
            problems.append(f"count {len(rows)} < min {assertion['min_count']}")
        if "total_amount" in assertion:
            total = sum(int(r["amount"]) for r in rows)
            if total != int(assertion["total_amount"]):
                problems.append(f"total {total} != {assertion['total_amount']}")
        if assertion.get("outstanding_equals_amount"):
            drift = [r["obligation_id"] for r in rows if r["outstanding"] != r["amount"]]
            if drift:
                problems.append(f"outstanding drifted on {drift}")
        return CheckResult(description, not problems, "; ".join(problems))

    if kind == "event":
        rows = [r for r in engine.events_view() if _match_row(r, assertion.get("where", {}))]
        expected = int(assertion.get("count", 1))
        ok = len(rows) == expected
        return CheckResult(description, ok, f"matched {len(rows)}, expected {expected}")

    if kind == "journal-contains":
        matches = _matching_entries(engine, assertion.get("kind"), assertion.get("where", {}))
        problems = []
        if "count" in assertion and len(matches) != int(assertion["count"]):
            problems.append(f"count {len(matches)} != {assertion['count']}")
        if "min_count" in assertion and len(matches) < int(assertion["min_count"]):
            problems.append(f"count {len(matches)} < {assertion['min_count']}")
        if not matches and "count" not in assertion and "min_count" not in assertion:
            problems.append("no matching journal entry")
        return CheckResult(description, not problems, "; ".join(problems))

    if kind == "journal-absent":
        matches = _matching_entries(engine, assertion.get("kind"), assertion.get("where", {}))
        return CheckResult(description, not matches, f"found {len(matches)} forbidden entries")

    if kind == "mode":
        ok = engine.mode == assertion["expected"]
        return CheckResult(description, ok, f"mode {engine.mode}")

    if kind == "instance-state":
        state = engine.instance_state(assertion["instance"])
        ok = state == assertion["expected"]
        return CheckResult(description, ok, f"state {state}")

    if kind == "authorizations-open":
        open_requests = engine.open_authorizations(assertion.get("party"))
        expected = int(assertion["count"])
        ok = len(open_requests) == expected
        return CheckResult(description, ok, f"{len(open_requests)} open, expected {expected}")

    if kind == "pipeline-ordering":
        return check_pipeline_ordering(engine, description)

    if kind == "subjective-gating":
        return check_subjective_gating(engine, description)

    return CheckResult(description, False, f"unknown assertion kind {kind!r}")


def check_pipeline_ordering(engine: Engine, description: str) -> CheckResult:
    """Observation < Determination < Action by journal seq, per event."""
    obs_seq: dict[str, int] = {}
    det_seq: dict[str, int] = {}  # event id -> creation seq
    event_obs: dict[str, list[str]] = {}
    act_seq: dict[str, int] = {}
    for entry in engine.journal.entries:
        if entry.kind == "observation":
            obs_seq[entry.payload["observation_id"]] = entry.seq
        elif entry.kind == "determination" and entry.payload.get("outcome") == "event-created":
            event_id = entry.payload["event_id"]
            det_seq[event_id] = entry.seq
            event_obs[event_id] = entry.payload.get("observation_ids", [])
        elif entry.kind in ("action", "authorization"):
            event_id = (entry.payload.get("event_id")
                        or (entry.payload.get("context") or {}).get("event_id"))
            if event_id and event_id not in act_seq:
                act_seq[event_id] = entry.seq
    problems = []
    for event_id, created in det_seq.items():
        for obs_id in event_obs.get(event_id, []):
            if obs_id in obs_seq and not obs_seq[obs_id] < created:
                problems.append(f"{event_id}: observation {obs_id} not before determination")
        if event_id in act_seq and not created < act_seq[event_id]:
            problems.append(f"{event_id}: action not after determination")
    return CheckResult(description, not problems, "; ".join(problems))


def check_subjective_gating(engine: Engine, description: str) -> CheckResult:
    """No subjective event record exists without a journaled authorization."""
    subjective_kinds = {
        spec.kind for spec in engine.master.event_specs.values() if spec.subjective
    }
    problems = []
    for entry in engine.journal.entries:
        if entry.kind != "determination" or entry.payload.get("outcome") != "event-created":
            continue
        if entry.payload.get("kind") in subjective_kinds and not entry.payload.get("via_authorization"):
            problems.append(entry.payload.get("event_id", "?"))
    ok = not problems
    return CheckResult(description, ok, f"ungated subjective events: {problems}" if problems else "")
