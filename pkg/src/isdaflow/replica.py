"""Replicated lockstep execution over a shared oracle ledger.

N identical engines consume one append-only, densely-numbered ledger of
external data. Only the sequence number orders execution; timestamp tags are
opaque labels. After every entry the harness compares journal digests, so a
single misbehaving replica (e.g. perturbed rounding) is caught at the first
ledger entry whose processing diverged, with a diff of the first divergent
journal entries. Human requests raised by all replicas are consolidated into
one outward question, and the single answer is published back onto the
ledger for all replicas to consume identically.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .engine import Engine, PendingAuthorization, STOPPED
from .errors import AlreadyStopped, DivergenceDetected, HarnessStopped
from .journal import canonical_json, to_wire


@dataclass(frozen=True)
class LedgerEntry:
    seq: int
    tag: str | None  # opaque label, never used for ordering
    datum: dict


class OracleLedger:
    """Single-writer, append-only sequence of external data."""

    def __init__(self):
        self.entries: list[LedgerEntry] = []
        self.stopped = False

    def publish(self, datum: dict, tag: str | None = None) -> int:
        if self.stopped:
            raise HarnessStopped("ledger is stopped")
        entry = LedgerEntry(seq=len(self.entries) + 1, tag=tag, datum=datum)
        self.entries.append(entry)
        if datum.get("type") == "stop":
            self.stopped = True
        return entry.seq

    def slice(self, after: int, through: int) -> list[LedgerEntry]:
        return [e for e in self.entries if after < e.seq <= through]

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.entries:
                fh.write(canonical_json(
                    {"seq": str(entry.seq), "tag": entry.tag, "datum": to_wire(entry.datum)}) + "\n")


def load_oracle_ledger(path: str | Path) -> OracleLedger:
    ledger = OracleLedger()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            ledger.publish(raw["datum"], tag=raw.get("tag"))
    return ledger


@dataclass
class ReplicaState:
    replica_id: int
    engine: Engine
    cursor: int = 0

    @property
    def digest(self) -> str:
        return self.engine.digest

    @property
    def mode(self) -> str:
        return self.engine.mode


def request_fingerprint(request: PendingAuthorization) -> str:
    body = canonical_json(to_wire({
        "request_id": request.request_id,
        "party": request.party,
        "question": request.question,
        "menu": list(request.menu),
        "context": request.context,
    }))
    return hashlib.sha256(body.encode()).hexdigest()


@dataclass(frozen=True)
class ConsolidatedRequest:
    request_id: str
    party: str
    question: str
    menu: tuple[str, ...]
    context: dict
    fingerprint: str
    replica_ids: tuple[int, ...]


@dataclass
class StepReport:
    consumed_through: int
    digests: dict[int, str] = field(default_factory=dict)
    halted_on_pause: bool = False
    halted_on_stop: bool = False


class ReplicaHarness:
    """Runs n engine replicas in lockstep against one oracle ledger."""

    def __init__(self, n: int, config: dict, fault_profiles: dict[int, str] | None = None):
        if n < 1:
            raise ValueError("need at least one replica")
        fault_profiles = fault_profiles or {}
        self.ledger = OracleLedger()
        self.replicas = [
            ReplicaState(replica_id=i, engine=Engine(config, fault=fault_profiles.get(i)))
            for i in range(n)
        ]

    @property
    def cursor(self) -> int:
        return self.replicas[0].cursor

    def genesis_digests(self) -> list[str]:
        return [r.digest for r in self.replicas]

    def publish(self, datum: dict, tag: str | None = None) -> int:
        return self.ledger.publish(datum, tag)

    def _check_equal_digests(self, seq: int) -> None:
        reference = self.replicas[0].digest
        divergent = [r.replica_id for r in self.replicas if r.digest != reference]
        if divergent:
            raise DivergenceDetected(divergent, seq, diff=self._journal_diff())

    def _journal_diff(self) -> list[dict]:
        """First journal entries at which any replica disagrees with replica 0."""
        reference = self.replicas[0].engine.journal.entries
        diffs = []
        for replica in self.replicas[1:]:
            entries = replica.engine.journal.entries
            for ref, other in zip(reference, entries):
                if ref.digest != other.digest:
                    diffs.append({
                        "replica_id": replica.replica_id,
                        "seq": ref.seq,
                        "reference": {"kind": ref.kind, "payload": ref.payload},
                        "divergent": {"kind": other.kind, "payload": other.payload},
                    })
                    break
            else:
                if len(entries) != len(reference):
                    diffs.append({
                        "replica_id": replica.replica_id,
                        "seq": min(len(entries), len(reference)) + 1,
                        "reference": None,
                        "divergent": None,
                    })
        return diffs

    def step_all(self, up_to: int | None = None) -> StepReport:
        """Feed ledger entries to every replica in lockstep.

        Stops early after a pause or stop entry: no replica processes any
        entry beyond it in this call. Digests are compared after every entry.
        """
        target = up_to if up_to is not None else len(self.ledger.entries)
        report = StepReport(consumed_through=self.cursor)
        while self.cursor < target:
            seq = self.cursor + 1
            entry = self.ledger.entries[seq - 1]
            kind = entry.datum.get("type")
            for replica in self.replicas:
                if replica.mode == STOPPED:
                    continue
                replica.engine.consume(entry.datum)
                replica.cursor = seq
            self._check_equal_digests(seq)
            report.consumed_through = seq
            report.digests = {r.replica_id: r.digest for r in self.replicas}
            if kind == "pause":
                report.halted_on_pause = True
                break
            if kind == "stop":
                report.halted_on_stop = True
                break
        if not report.digests:
            report.digests = {r.replica_id: r.digest for r in self.replicas}
        return report

    def consolidate_authorizations(self) -> list[ConsolidatedRequest]:
        """One outward request per identical fingerprint across all replicas."""
        running = [r for r in self.replicas if r.mode != STOPPED]
        if not running:
            return []
        per_replica = {
            r.replica_id: {req.request_id: request_fingerprint(req)
                           for req in r.engine.open_authorizations()}
            for r in running
        }
        reference_ids = sorted(per_replica[running[0].replica_id])
        for replica in running[1:]:
            if sorted(per_replica[replica.replica_id]) != reference_ids:
                raise DivergenceDetected([replica.replica_id], self.cursor, diff=self._journal_diff())
        consolidated = []
        for request_id in reference_ids:
            prints = {per_replica[r.replica_id][request_id] for r in running}
            if len(prints) != 1:
                raise DivergenceDetected(
                    [r.replica_id for r in running], self.cursor, diff=self._journal_diff())
            request = running[0].engine.pending_auth[request_id]
            consolidated.append(ConsolidatedRequest(
                request_id=request.request_id,
                party=request.party,
                question=request.question,
                menu=request.menu,
                context=request.context,
                fingerprint=prints.pop(),
                replica_ids=tuple(r.replica_id for r in running),
            ))
        return consolidated

    def answer(self, request_id: str, party: str, response: str) -> int:
        """Publish one human answer; all replicas consume it identically."""
        seq = self.publish({"type": "answer", "request_id": request_id,
                            "party": party, "response": response})
        self.step_all(seq)
        return seq

    def pause_all(self, reason: str | None = None) -> int:
        seq = self.publish({"type": "pause", "reason": reason})
        self.step_all(seq)
        return seq

    def resume_all(self) -> int:
        if any(r.mode == STOPPED for r in self.replicas):
            raise AlreadyStopped("harness is stopped")
        seq = self.publish({"type": "resume"})
        self.step_all(seq)
        return seq

    def stop_all(self, reason: str | None = None) -> int:
        seq = self.publish({"type": "stop", "reason": reason})
        self.step_all(seq)
        return seq
