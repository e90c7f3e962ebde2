"""Parties and their branches (offices)."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Branch:
    branch_id: str
    party_id: str
    office_location: str
    designated_multibranch: bool = False


@dataclass(frozen=True)
class Party:
    party_id: str
    name: str
    jurisdiction: str
    incorporation_status: str = "Valid"  # Valid | Unknown | Lapsed
    branches: tuple[Branch, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.branches:
            # Every party has at least a head office.
            object.__setattr__(
                self,
                "branches",
                (Branch(f"{self.party_id}-head", self.party_id, self.jurisdiction),),
            )

    @property
    def head_office(self) -> Branch:
        return self.branches[0]

    def branch(self, branch_id: str) -> Branch | None:
        for b in self.branches:
            if b.branch_id == branch_id:
                return b
        return None


def party_from_dict(raw: dict) -> Party:
    branches = tuple(
        Branch(
            branch_id=b["branch_id"],
            party_id=raw["party_id"],
            office_location=b.get("office_location", raw.get("jurisdiction", "")),
            designated_multibranch=bool(b.get("designated_multibranch", False)),
        )
        for b in raw.get("branches", [])
    )
    return Party(
        party_id=raw["party_id"],
        name=raw.get("name", raw["party_id"]),
        jurisdiction=raw.get("jurisdiction", ""),
        incorporation_status=raw.get("incorporation_status", "Valid"),
        branches=branches,
    )
