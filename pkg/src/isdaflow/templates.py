"""Three-stage contract template pipeline with document precedence.

Master template (pre-printed form, placeholders enumerated) -> Schedule
elections applied (agreement template, copy semantics) -> Confirmation bound
(per-transaction contract instance, fully resolved term table).

Templates are data: term tables, election flags and event-spec records -
interpreted by the engine, not generated source code. Precedence on term
lookup is Confirmation over Schedule over Master, always.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any

from .errors import (
    DuplicateTerm,
    IllegalOverride,
    MissingStandardEvent,
    ProductMismatch,
    UnknownTerm,
    UnresolvedPlaceholder,
)
from .events import EventSpec, GraceSpec, STANDARD_EVENT_KINDS, standard_event_specs
from .journal import canonical_json, to_wire
from .money import Money

PLACEHOLDER = "__placeholder__"

PROVENANCE_MASTER = "Master"
PROVENANCE_SCHEDULE = "Schedule"
PROVENANCE_CONFIRMATION = "Confirmation"

# Instance lifecycle states (Paused/Stopped mirror the engine mode)
ACTIVE = "Active"
PAUSED = "Paused"
STOPPED = "Stopped"
TERMINATED = "Terminated"


@dataclass(frozen=True)
class TermDef:
    name: str
    default: Any = PLACEHOLDER
    overridable: bool = True
    scope: str = "agreement"  # "transaction" placeholders wait for the Confirmation

    @property
    def is_placeholder(self) -> bool:
        return self.default == PLACEHOLDER


@dataclass(frozen=True)
class MasterTemplate:
    version_tag: str
    terms: dict[str, TermDef]
    event_specs: dict[str, EventSpec]

    @property
    def placeholders(self) -> tuple[str, ...]:
        return tuple(sorted(n for n, t in self.terms.items() if t.is_placeholder))

    def canonical(self) -> str:
        """Byte-stable serialization; identical input compiles identically."""
        return canonical_json(to_wire({
            "version_tag": self.version_tag,
            "terms": {
                n: {"default": t.default, "overridable": t.overridable}
                for n, t in self.terms.items()
            },
            "events": {
                k: {
                    "class": s.event_class,
                    "grace": {"basis": s.grace.basis, "days": s.grace.days, "calendar_id": s.grace.calendar_id},
                    "subjective": s.subjective,
                    "threshold": s.threshold,
                }
                for k, s in self.event_specs.items()
            },
        }))


def standard_2002_terms() -> list[dict]:
    """Desk-scale pre-printed term set for the 2002-form master."""
    return [
        {"name": "multiple-transaction-payment-netting", "default": False},
        {"name": "cross-default-threshold", "placeholder": True},
        {"name": "automatic-early-termination", "default": False},
        {"name": "default-interest-rate", "default": 100_000},  # 10%/yr in micro-units
        {"name": "interest-day-count-denominator", "default": 360},
        {"name": "business-day-convention", "default": "following", "overridable": False},
        {"name": "default-calendar", "default": None},
        {"name": "metavante-mode", "default": False},
        {"name": "hierarchy-precedence", "default": ["Illegality", "ForceMajeure"]},
        {"name": "escalation-threshold", "default": 3},
        {"name": "rate-fallback-policy", "default": {"policy": "use-last-published", "max_age_business_days": 5}},
        {"name": "grace-curable-on-deadline", "default": True},
    ]


def compile_master(
    version_tag: str,
    term_definitions: list[dict] | None = None,
    event_specs: dict[str, EventSpec] | None = None,
) -> MasterTemplate:
    """Compile the pre-printed form into a template with enumerated placeholders.

    Raises DuplicateTerm on a repeated term name and MissingStandardEvent if
    any standard Event of Default / Termination Event is absent.
    """
    definitions = term_definitions if term_definitions is not None else standard_2002_terms()
    terms: dict[str, TermDef] = {}
    for raw in definitions:
        name = raw["name"]
        if name in terms:
            raise DuplicateTerm(name)
        default = PLACEHOLDER if raw.get("placeholder") else raw.get("default")
        terms[name] = TermDef(name=name, default=default, overridable=raw.get("overridable", True),
                              scope=raw.get("scope", "agreement"))
    specs = dict(event_specs) if event_specs is not None else standard_event_specs()
    for kind in STANDARD_EVENT_KINDS:
        if kind not in specs:
            raise MissingStandardEvent(kind)
    return MasterTemplate(version_tag=version_tag, terms=dict(sorted(terms.items())), event_specs=specs)


@dataclass(frozen=True)
class ScheduleElections:
    """Part-by-part elections negotiated into the Schedule."""

    multiple_transaction_payment_netting: bool = False
    netting_groups: dict[str, str] = field(default_factory=dict)  # transaction-id -> group name
    specified_entities: dict[str, tuple[str, ...]] = field(default_factory=dict)  # party -> entity ids
    cross_default_threshold: Any = None  # wire-form money
    additional_termination_events: tuple[dict, ...] = ()
    automatic_early_termination: bool = False
    multibranch: dict[str, tuple[str, ...]] = field(default_factory=dict)  # party -> designated branch ids
    grace_overrides: dict[str, dict] = field(default_factory=dict)  # event kind -> grace spec dict
    tax_rules: tuple[dict, ...] = ()
    term_overrides: dict[str, Any] = field(default_factory=dict)

    def schedule_terms(self) -> dict[str, Any]:
        """Flatten structured elections plus free-form overrides into one layer."""
        terms = dict(self.term_overrides)
        terms["multiple-transaction-payment-netting"] = self.multiple_transaction_payment_netting
        terms["automatic-early-termination"] = self.automatic_early_termination
        if self.cross_default_threshold is not None:
            terms["cross-default-threshold"] = self.cross_default_threshold
        return terms

    @classmethod
    def from_dict(cls, raw: dict) -> "ScheduleElections":
        return cls(
            multiple_transaction_payment_netting=bool(raw.get("multiple_transaction_payment_netting", False)),
            netting_groups=dict(raw.get("netting_groups", {})),
            specified_entities={p: tuple(v) for p, v in raw.get("specified_entities", {}).items()},
            cross_default_threshold=raw.get("cross_default_threshold"),
            additional_termination_events=tuple(raw.get("additional_termination_events", ())),
            automatic_early_termination=bool(raw.get("automatic_early_termination", False)),
            multibranch={p: tuple(v) for p, v in raw.get("multibranch", {}).items()},
            grace_overrides=dict(raw.get("grace_overrides", {})),
            tax_rules=tuple(raw.get("tax_rules", ())),
            term_overrides=dict(raw.get("term_overrides", {})),
        )


@dataclass(frozen=True)
class AgreementTemplate:
    master: MasterTemplate
    elections: ScheduleElections
    parties: tuple[str, str]  # party ids, stable order as negotiated
    remaining_placeholders: tuple[str, ...]

    @property
    def validation_status(self) -> str:
        return "complete" if not self.remaining_placeholders else "placeholders-remaining"

    def event_spec(self, kind: str) -> EventSpec | None:
        spec = self.master.event_specs.get(kind)
        if spec is None:
            for ate in self.elections.additional_termination_events:
                if ate["name"] == kind:
                    spec = EventSpec(
                        kind=kind,
                        event_class=ate.get("class", "TerminationEvent"),
                        grace=GraceSpec.from_dict(ate.get("grace")),
                        subjective=bool(ate.get("subjective", False)),
                        standard=False,
                    )
            return spec
        grace = spec.grace
        override = self.elections.grace_overrides.get(kind)
        if override is not None:
            grace = GraceSpec.from_dict(override)
        threshold = spec.threshold
        if kind == "CrossDefault" and self.elections.cross_default_threshold is not None:
            raw = self.elections.cross_default_threshold
            threshold = Money(raw["currency"], int(raw["amount"]))
        if grace is not spec.grace or threshold is not spec.threshold:
            spec = EventSpec(
                kind=spec.kind,
                event_class=spec.event_class,
                grace=grace,
                subjective=spec.subjective,
                threshold=threshold,
                standard=spec.standard,
            )
        return spec


def apply_schedule(
    master: MasterTemplate,
    elections: ScheduleElections,
    parties: tuple[str, str],
) -> AgreementTemplate:
    """Copy the master and apply Schedule elections; master is never mutated.

    Raises UnknownTerm for an override naming no declared term and
    IllegalOverride for an override targeting a non-overridable term.
    """
    if len(parties) != 2 or parties[0] == parties[1]:
        raise ValueError("an agreement has exactly two distinct parties")
    for name in elections.schedule_terms():
        term = master.terms.get(name)
        if term is None:
            raise UnknownTerm(name)
        if not term.overridable:
            raise IllegalOverride(name)
    schedule_layer = elections.schedule_terms()
    remaining = tuple(
        sorted(
            name
            for name, term in master.terms.items()
            if term.is_placeholder and term.scope == "agreement" and name not in schedule_layer
        )
    )
    return AgreementTemplate(
        master=master,
        elections=copy.deepcopy(elections),
        parties=tuple(parties),
        remaining_placeholders=remaining,
    )


@dataclass(frozen=True)
class Confirmation:
    transaction_id: str
    product_type: str
    economics: dict
    term_overrides: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "Confirmation":
        return cls(
            transaction_id=raw["transaction_id"],
            product_type=raw["product_type"],
            economics=dict(raw.get("economics", {})),
            term_overrides=dict(raw.get("term_overrides", {})),
        )


# Product registry: template id -> (product type, required economics fields).
# Open for extension; one product ships at desk scale.
PRODUCT_TEMPLATES: dict[str, dict] = {
    "irs-fixed-float": {
        "product_type": "interest-rate-swap",
        "required": ("notional", "currency", "legs"),
    },
}


@dataclass
class ContractInstance:
    instance_id: str
    agreement: AgreementTemplate
    confirmation: Confirmation
    resolved_terms: dict[str, tuple[Any, str]]  # name -> (value, provenance)
    state: str = ACTIVE

    def term(self, name: str) -> Any:
        value, _ = resolve_term(self, name)
        return value


def _validate_irs(confirmation: Confirmation) -> None:
    legs = confirmation.economics.get("legs") or []
    if len(legs) != 2:
        raise ProductMismatch("irs-fixed-float requires exactly two legs")
    kinds = sorted(leg.get("rate_type", "") for leg in legs)
    if kinds != ["fixed", "floating"]:
        raise ProductMismatch("irs-fixed-float requires one fixed and one floating leg")
    currencies = {leg.get("currency") for leg in legs}
    if len(currencies) != 1:
        raise ProductMismatch("irs-fixed-float legs must share one currency")


def instantiate(
    agreement: AgreementTemplate,
    confirmation: Confirmation,
    product_template_id: str,
) -> ContractInstance:
    """Bind a Confirmation to the agreement template, resolving every term."""
    if agreement.remaining_placeholders:
        raise UnresolvedPlaceholder(agreement.remaining_placeholders)
    product = PRODUCT_TEMPLATES.get(product_template_id)
    if product is None:
        raise ProductMismatch(f"no product template {product_template_id!r}")
    if product["product_type"] != confirmation.product_type:
        raise ProductMismatch(
            f"{confirmation.product_type!r} confirmation cannot instantiate {product_template_id!r}"
        )
    missing = [f for f in product["required"] if not confirmation.economics.get(f)]
    if missing:
        raise UnresolvedPlaceholder(missing)
    if product_template_id == "irs-fixed-float":
        _validate_irs(confirmation)

    schedule_layer = agreement.elections.schedule_terms()
    resolved: dict[str, tuple[Any, str]] = {}
    for name, term in agreement.master.terms.items():
        if name in confirmation.term_overrides:
            resolved[name] = (confirmation.term_overrides[name], PROVENANCE_CONFIRMATION)
        elif name in schedule_layer:
            resolved[name] = (schedule_layer[name], PROVENANCE_SCHEDULE)
        elif not term.is_placeholder:
            resolved[name] = (term.default, PROVENANCE_MASTER)
        else:
            raise UnresolvedPlaceholder([name])
    # Confirmation may introduce transaction-only terms unknown to the master.
    for name, value in confirmation.term_overrides.items():
        if name not in resolved:
            resolved[name] = (value, PROVENANCE_CONFIRMATION)

    return ContractInstance(
        instance_id=confirmation.transaction_id,
        agreement=agreement,
        confirmation=confirmation,
        resolved_terms=dict(sorted(resolved.items())),
    )


def resolve_term(instance: ContractInstance, name: str) -> tuple[Any, str]:
    """Value plus provenance layer; Confirmation > Schedule > Master."""
    try:
        return instance.resolved_terms[name]
    except KeyError:
        raise UnknownTerm(name) from None
