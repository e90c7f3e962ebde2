"""Append-only journal with a SHA-256 digest chain.

Every externally visible state change in the engine is one journal entry;
replaying the journal rebuilds the exact state, and the chain-head digest is
the state digest replicas compare.

Entries are stored and hashed in "wire form": JSON-safe dicts with sorted
keys where every integer is a decimal string (so files survive readers with
53-bit numbers) and every date is an ISO string. One canonical byte encoding
feeds both the digest chain and the JSON-lines file, which is what makes
live execution and replay byte-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator

from .errors import ChainBroken
from .money import Money

GENESIS_DIGEST = hashlib.sha256(b"isdaflow-journal-genesis").hexdigest()

ENTRY_KINDS = (
    "command", "observation", "determination", "action",
    "settlement", "authorization", "control",
)


def to_wire(value: Any) -> Any:
    """Recursively convert a value into wire form.

    bool stays bool (it is an int subclass, so check it first); int becomes a
    decimal string; dates become ISO strings; Money and enums flatten.
    """
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        raise TypeError("floats are forbidden in journal payloads")
    if isinstance(value, Money):
        return {"currency": value.currency, "amount": str(value.amount)}
    if isinstance(value, date):
        return value.isoformat()
    if isinstance(value, Enum):
        return to_wire(value.value)
    if isinstance(value, dict):
        return {str(k): to_wire(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, set, frozenset)):
        items = list(value)
        if isinstance(value, (set, frozenset)):
            items = sorted(items, key=lambda x: json.dumps(to_wire(x), sort_keys=True))
        return [to_wire(v) for v in items]
    if value is None or isinstance(value, str):
        return value
    raise TypeError(f"cannot journal value of type {type(value).__name__}")


def canonical_json(value: Any) -> str:
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def wire_int(value: Any) -> int:
    """Parse an integer back out of wire form."""
    if isinstance(value, bool):
        raise TypeError("expected integer, got bool")
    return int(value)


def wire_money(value: Any) -> Money:
    return Money(value["currency"], wire_int(value["amount"]))


def wire_date(value) -> date:
    if isinstance(value, date):
        return value
    return date.fromisoformat(value)


@dataclass(frozen=True)
class JournalEntry:
    seq: int
    kind: str
    payload: dict
    digest: str

    def to_json_line(self) -> str:
        return canonical_json(
            {"seq": str(self.seq), "kind": self.kind, "payload": self.payload, "digest": self.digest}
        )


def _chain_digest(prev_digest: str, seq: int, kind: str, payload: dict) -> str:
    body = canonical_json({"seq": str(seq), "kind": kind, "payload": payload})
    return hashlib.sha256((prev_digest + "\n" + body).encode("utf-8")).hexdigest()


class Journal:
    """In-memory append-only journal; optionally mirrored to a JSON-lines file."""

    def __init__(self):
        self.entries: list[JournalEntry] = []

    @property
    def head_digest(self) -> str:
        return self.entries[-1].digest if self.entries else GENESIS_DIGEST

    @property
    def next_seq(self) -> int:
        return len(self.entries) + 1

    def append(self, kind: str, payload: dict) -> JournalEntry:
        if kind not in ENTRY_KINDS:
            raise ValueError(f"unknown journal entry kind: {kind}")
        wire_payload = to_wire(payload)
        seq = self.next_seq
        digest = _chain_digest(self.head_digest, seq, kind, wire_payload)
        entry = JournalEntry(seq=seq, kind=kind, payload=wire_payload, digest=digest)
        self.entries.append(entry)
        return entry

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[JournalEntry]:
        return iter(self.entries)

    def since(self, seq: int) -> list[JournalEntry]:
        """Entries with seq strictly greater than the given cursor."""
        return self.entries[seq:]

    def verify_chain(self) -> None:
        prev = GENESIS_DIGEST
        for position, entry in enumerate(self.entries, start=1):
            # report the position where density or the digest fails, not the
            # (possibly corrupted) recorded seq
            if entry.seq != position:
                raise ChainBroken(position)
            expect = _chain_digest(prev, entry.seq, entry.kind, entry.payload)
            if expect != entry.digest:
                raise ChainBroken(position)
            prev = entry.digest

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for entry in self.entries:
                fh.write(entry.to_json_line() + "\n")


def load_journal(path: str | Path) -> Journal:
    """Read a JSON-lines journal file; chain is NOT verified here."""
    journal = Journal()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            journal.entries.append(
                JournalEntry(
                    seq=int(raw["seq"]),
                    kind=raw["kind"],
                    payload=raw["payload"],
                    digest=raw["digest"],
                )
            )
    return journal


def journal_from_entries(entries: Iterable[JournalEntry]) -> Journal:
    journal = Journal()
    journal.entries = list(entries)
    return journal
