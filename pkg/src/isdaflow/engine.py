"""The deterministic contract engine.

One engine instance is a pure function of its input sequence: a genesis
configuration followed by journaled commands (observations, fixings,
payments, answers, control) and day-step triggers. Every state change it
makes is one journal entry, the journal chain-head digest is the state
digest, and re-feeding the journaled inputs into a fresh engine reproduces
the journal byte for byte. That property is what the replica harness checks.

The daily pipeline is fixed: ingest queued commands -> generate obligations
-> event tick (grace lapses) -> netting -> condition-precedent check and
settlement -> interest proposals -> notices and actions.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from datetime import date

from . import events as ev, netting, templates
from .calendars import CalendarSet, load_calendar
from .cashflows import (
    DEFERRED,
    DISCHARGED,
    DUE,
    DeliveryObligation,
    FallbackPolicy,
    FixingStore,
    Obligation,
    ORIGIN_GROSS,
    ORIGIN_GROSS_UP,
    ORIGIN_INTEREST,
    ORIGIN_NET,
    PAID,
    RateFixing,
    SCHEDULED,
    SUSPENDED,
    generate_obligations,
)
from .errors import (
    AlreadyCured,
    AlreadyStopped,
    ChainBroken,
    ConflictingFixing,
    EngineStopped,
    OutOfOrderDate,
    ReplayMismatch,
    UnknownEvent,
    UnknownParty,
)
from .journal import Journal, JournalEntry, canonical_json, to_wire, wire_date, wire_int
from .money import Money, ROUND_HALF_AWAY, ROUND_HALF_TOWARD
from .parties import Party, party_from_dict
from .settlement import (
    IncomingPayment,
    InterestCharge,
    SuspensionLedger,
    TaxRule,
    accrue_default_interest,
    apply_withholding,
    check_condition_precedent,
    match_incoming,
    validate_branch,
)
from .templates import (
    Confirmation,
    ContractInstance,
    ScheduleElections,
    apply_schedule,
    compile_master,
    instantiate,
)

RUNNING = "Running"
PAUSED = "Paused"
STOPPED = "Stopped"

BLOCK_INDEFINITELY = "BlockIndefinitely"

FAULT_PROFILES = {
    None: ROUND_HALF_AWAY,
    "perturb-rounding": ROUND_HALF_TOWARD,
}


@dataclass
class PendingAuthorization:
    request_id: str
    party: str
    question: str
    menu: tuple[str, ...]
    context: dict
    created_seq: int
    status: str = "Open"  # Open | Answered
    answer: str | None = None
    answered_by: str | None = None
    answer_seq: int | None = None
    deadline_policy: str = BLOCK_INDEFINITELY

    def snapshot(self) -> dict:
        return {
            "request_id": self.request_id,
            "party": self.party,
            "question": self.question,
            "menu": list(self.menu),
            "context": self.context,
            "created_seq": self.created_seq,
            "status": self.status,
            "answer": self.answer,
            "answered_by": self.answered_by,
        }


@dataclass
class DayReport:
    day: date
    commands_applied: int = 0
    generated: list[str] = field(default_factory=list)
    nets: list[str] = field(default_factory=list)
    settled: list[str] = field(default_factory=list)
    suspended: list[str] = field(default_factory=list)
    deferred: list[str] = field(default_factory=list)
    resumed: list[str] = field(default_factory=list)
    notices: int = 0
    requests_opened: list[str] = field(default_factory=list)


class Engine:
    """Event-sourced engine for one agreement and its transactions."""

    def __init__(self, config: dict, fault: str | None = None):
        self.config = config
        self.rounding = FAULT_PROFILES.get(fault, ROUND_HALF_AWAY)
        self.journal = Journal()
        self.mode = RUNNING
        self.last_step_date: date | None = None
        self.current_date: date | None = None

        master_cfg = config.get("master", {})
        self.master = compile_master(
            version_tag=master_cfg.get("version_tag", "2002"),
            term_definitions=master_cfg.get("terms"),
        )
        self.elections = ScheduleElections.from_dict(config.get("elections", {}))
        self.parties: dict[str, Party] = {}
        for raw in config.get("parties", []):
            party = party_from_dict(raw)
            self.parties[party.party_id] = party
        party_ids = tuple(p["party_id"] for p in config.get("parties", []))
        if len(party_ids) != 2:
            raise UnknownParty("an agreement needs exactly two parties")
        self.agreement = apply_schedule(self.master, self.elections, party_ids)

        self.calendars = CalendarSet()
        for raw in config.get("calendars", []):
            self.calendars.add(load_calendar(raw))

        self.instances: dict[str, ContractInstance] = {}
        self.group_ledger = netting.GroupLedger(self.elections)
        for raw in config.get("confirmations", []):
            confirmation = Confirmation.from_dict(raw)
            instance = instantiate(
                self.agreement, confirmation, raw.get("product_template", "irs-fixed-float")
            )
            self.instances[instance.instance_id] = instance
        for transaction_id in sorted(self.instances):
            self.group_ledger.assign_group(transaction_id, set(self.instances))

        self.accounts: dict[tuple[str, str], int] = {}
        for party_id, currencies in sorted(config.get("accounts", {}).items()):
            for currency, amount in sorted(currencies.items()):
                self.accounts[(party_id, currency)] = wire_int(amount)
        self.credit: dict[tuple[str, str], int] = {}

        policy_cfg = config.get("policy", {})
        self.policy = ev.ActionPolicy(
            choices=dict(policy_cfg.get("choices", {})),
            escalation_threshold=int(policy_cfg.get("escalation_threshold", self._term("escalation-threshold") or 3)),
        )
        self.tax_rules = [TaxRule.from_dict(raw) for raw in self.elections.tax_rules]

        self.fixings = FixingStore()
        self.obligations: dict[str, Obligation] = {}
        self.deliveries: dict[str, DeliveryObligation] = {}
        self.generated_ids: set[str] = set()
        self.net_records: dict[str, netting.NetObligation] = {}
        self.observations: dict[str, ev.ObservationRecord] = {}
        self.events: dict[str, ev.EventRecord] = {}
        self.suspensions = SuspensionLedger()
        self.charges: dict[str, InterestCharge] = {}
        self.pending_auth: dict[str, PendingAuthorization] = {}
        self.cross_default_totals: dict[tuple[str, str], int] = {}
        self.escalation_counts: dict[str, int] = {}
        self.terminated: set[str] = set()
        self.acted_events: set[str] = set()
        self.noticed_events: set[str] = set()
        self._pending: list[tuple[int, dict]] = []
        self._answers_by_seq: dict[int, str] = {}  # answer command seq -> request id
        self._last_report: DayReport | None = None

        self.journal.append("control", {"command": "genesis", "config": config})

    # -- helpers ------------------------------------------------------------

    def _term(self, name: str):
        term = self.master.terms.get(name)
        if term is None:
            return None
        schedule = self.elections.schedule_terms()
        if name in schedule:
            return schedule[name]
        return None if term.is_placeholder else term.default

    def counterparty(self, party_id: str) -> str:
        first, second = self.agreement.parties
        if party_id == first:
            return second
        if party_id == second:
            return first
        raise UnknownParty(party_id)

    @property
    def digest(self) -> str:
        return self.journal.head_digest

    def instance_state(self, instance_id: str) -> str:
        if instance_id in self.terminated:
            return templates.TERMINATED
        if self.mode == STOPPED:
            return templates.STOPPED
        if self.mode == PAUSED:
            return templates.PAUSED
        return templates.ACTIVE

    def _metavante(self) -> bool:
        return bool(self._term("metavante-mode"))

    def _live_events(self) -> list[ev.EventRecord]:
        return [self.events[k] for k in sorted(self.events) if self.events[k].live]

    def _lenient_for(self, party_id: str) -> bool:
        return self.escalation_counts.get(party_id, 0) < self.policy.escalation_threshold

    # -- input --------------------------------------------------------------

    def consume(self, datum: dict) -> JournalEntry:
        """Apply one external input; everything funnels through here."""
        kind = datum.get("type")
        if self.mode == STOPPED:
            if kind == "resume":
                raise AlreadyStopped("engine is stopped")
            raise EngineStopped("engine is stopped")
        if kind in ("pause", "resume", "stop"):
            return self._control(kind, datum)
        if kind == "step-day":
            return self._step_entry(datum)
        return self._command(datum)

    def _control(self, kind: str, datum: dict) -> JournalEntry:
        entry = self.journal.append("control", {"command": kind, "reason": datum.get("reason")})
        if kind == "pause":
            self.mode = PAUSED
        elif kind == "resume":
            self.mode = RUNNING
        elif kind == "stop":
            self.mode = STOPPED
        return entry

    def _step_entry(self, datum: dict) -> JournalEntry:
        day = wire_date(datum["date"])
        if self.mode == PAUSED:
            return self.journal.append("control", {"command": "step-day", "date": day, "skipped": True})
        if self.last_step_date is not None and day <= self.last_step_date:
            raise OutOfOrderDate(f"{day} is not after {self.last_step_date}")
        entry = self.journal.append("control", {"command": "step-day", "date": day, "skipped": False})
        self._run_day(day)
        return entry

    def _command(self, datum: dict) -> JournalEntry:
        entry = self.journal.append("command", {"datum": datum})
        if datum.get("type") == "answer":
            self._register_answer(entry.seq, datum)
        self._pending.append((entry.seq, datum))
        return entry

    def _resolve_answer_target(self, datum: dict) -> str | None:
        if datum.get("request_id"):
            return datum["request_id"]
        match = datum.get("match")
        if not match:
            return None
        # scripted answers address the first open request matching the context
        for request_id in sorted(self.pending_auth):
            request = self.pending_auth[request_id]
            if request.status != "Open" or request.party != datum.get("party"):
                continue
            if all(str(request.context.get(k)) == str(v) for k, v in match.items()):
                return request_id
        return None

    def _register_answer(self, seq: int, datum: dict) -> None:
        request = self.pending_auth.get(self._resolve_answer_target(datum) or "")
        if request is None or request.status != "Open":
            return
        if datum.get("party") != request.party or datum.get("response") not in request.menu:
            return
        request.status = "Answered"
        request.answer = datum["response"]
        request.answered_by = datum["party"]
        request.answer_seq = seq
        self._answers_by_seq[seq] = request.request_id

    def answer_precheck(self, request_id: str, party: str, response: str) -> str | None:
        """Validation for the API edge: None when acceptable, else a reason."""
        request = self.pending_auth.get(request_id)
        if request is None:
            return "unknown-request"
        if request.status != "Open":
            return "already-answered"
        if request.party != party:
            return "wrong-party"
        if response not in request.menu:
            return "response-not-in-menu"
        return None

    # -- authorization requests ----------------------------------------------

    def _request_auth(self, request_id: str, party: str, question: str,
                      menu: tuple[str, ...], context: dict) -> PendingAuthorization | None:
        if request_id in self.pending_auth:
            return None
        request = PendingAuthorization(
            request_id=request_id,
            party=party,
            question=question,
            menu=menu,
            context=context,
            created_seq=self.journal.next_seq,
        )
        self.pending_auth[request_id] = request
        self.journal.append("authorization", {"event": "request", **request.snapshot()})
        if self._last_report is not None:
            self._last_report.requests_opened.append(request_id)
        return request

    # -- day pipeline ---------------------------------------------------------

    def _run_day(self, day: date) -> None:
        self.current_date = day
        report = DayReport(day=day)
        self._last_report = report
        incoming: list[tuple[int, dict]] = []

        pending, self._pending = self._pending, []
        for seq, datum in pending:
            report.commands_applied += 1
            kind = datum.get("type")
            if kind == "fixing":
                self._apply_fixing(seq, datum)
            elif kind == "fund-account":
                self._apply_funding(datum)
            elif kind == "payment":
                incoming.append((seq, datum))
            elif kind == "observation":
                self._apply_observation(seq, datum)
            elif kind == "cure":
                self._apply_cure_command(seq, datum)
            elif kind == "answer":
                self._apply_answer(seq, datum)
            elif kind == "retire-transaction":
                self._apply_retire(seq, datum)
            else:
                self.journal.append("control", {"event": "command-rejected", "command_seq": seq,
                                                "reason": "unknown-command-type"})

        self._generate(report)
        self._tick(report)
        self._net(report)
        self._settle(report, incoming)
        self._propose_interest(report)
        self._notices_and_actions(report)
        self._remind(report)
        self.last_step_date = day

    # -- stage: command application -------------------------------------------

    def _apply_fixing(self, seq: int, datum: dict) -> None:
        fixing = RateFixing(
            source=datum["source"],
            fixing_date=wire_date(datum["date"]),
            value=wire_int(datum["value"]),
        )
        try:
            self.fixings.ingest(fixing)
        except ConflictingFixing:
            self.journal.append("control", {"event": "command-rejected", "command_seq": seq,
                                            "reason": "conflicting-fixing"})

    def _apply_funding(self, datum: dict) -> None:
        key = (datum["party"], datum["currency"])
        self.accounts[key] = self.accounts.get(key, 0) + wire_int(datum["amount"])
        self.journal.append("settlement", {
            "event": "account-funded", "party": datum["party"],
            "currency": datum["currency"], "amount": wire_int(datum["amount"]),
            "balance": self.accounts[key],
        })

    def _apply_retire(self, seq: int, datum: dict) -> None:
        transaction_id = datum["transaction_id"]
        outstanding = [ob for ob in self.obligations.values()
                       if ob.instance_id == transaction_id and ob.origin == ORIGIN_GROSS]
        try:
            group = self.group_ledger.retire_transaction(
                transaction_id, outstanding, force=bool(datum.get("force")), reason=datum.get("reason"))
        except Exception as exc:  # journaled rejection keeps replicas aligned
            self.journal.append("control", {"event": "command-rejected", "command_seq": seq,
                                            "reason": type(exc).__name__})
            return
        self.journal.append("settlement", {
            "event": "transaction-retired", "transaction_id": transaction_id,
            "group_id": group.group_id, "remaining_members": sorted(group.members),
        })

    # -- stage: observation & determination -------------------------------------

    def _apply_observation(self, seq: int, datum: dict) -> None:
        kinds = datum.get("kinds") or [datum.get("kind", ev.UNCLASSIFIED)]
        created: list[ev.EventRecord] = []
        obs_ids = []
        for kind in kinds:
            spec = self.agreement.event_spec(kind)
            recognized = spec is not None
            obs_id = f"obs-{self.journal.next_seq}"
            record = ev.ObservationRecord(
                observation_id=obs_id,
                source=datum.get("source", ev.PARTY_NOTICE if datum.get("notifier") else ev.ORACLE),
                level=ev.classify_level(kind if recognized else ev.UNCLASSIFIED, datum.get("level")),
                kind=kind if recognized else ev.UNCLASSIFIED,
                party=datum.get("party"),
                notifier=datum.get("notifier"),
                payload={k: v for k, v in sorted(datum.items()) if k not in ("type",)},
                seq=self.journal.next_seq,
            )
            self.observations[obs_id] = record
            obs_ids.append(obs_id)
            self.journal.append("observation", {
                "observation_id": obs_id, "source": record.source, "level": record.level,
                "kind": record.kind, "party": record.party, "notifier": record.notifier,
                "command_seq": seq, "original_kind": kind,
            })
            outcome = self._determine(record, datum, spec)
            if outcome is not None:
                created.append(outcome)
        if len(created) > 1:
            self._resolve_concurrent(created)

    def _determine(self, obs: ev.ObservationRecord, datum: dict,
                   spec: ev.EventSpec | None) -> ev.EventRecord | None:
        """Mechanical determination; subjective criteria go to a human."""
        if spec is None:
            self.journal.append("determination", {
                "observation_id": obs.observation_id, "outcome": "escalate-unclassified",
            })
            for party_id in self.agreement.parties:
                self._request_auth(
                    request_id=f"auth-uncl-{obs.observation_id}-{party_id}",
                    party=party_id,
                    question=f"Unclassified observation {obs.observation_id}: review and classify",
                    menu=("acknowledge",),
                    context={"kind": "unclassified-observation", "observation_id": obs.observation_id},
                )
            return None

        if spec.subjective:
            self.journal.append("determination", {
                "observation_id": obs.observation_id, "outcome": "authorization-required",
                "kind": spec.kind, "question": "materially weaker?",
            })
            decider = self.counterparty(obs.party) if obs.party else self.agreement.parties[0]
            self._request_auth(
                request_id=f"auth-subj-{obs.observation_id}",
                party=decider,
                question=f"{spec.kind}: materially weaker?",
                menu=("yes-trigger", "no"),
                context={"kind": "subjective-event", "observation_id": obs.observation_id,
                         "event_kind": spec.kind, "party": obs.party,
                         "transaction_ids": list(datum.get("transaction_ids", []))},
            )
            return None

        if spec.kind == ev.CROSS_DEFAULT:
            return self._determine_cross_default(obs, datum)

        affected = self._affected_parties(datum, obs)
        record = self._create_event(spec, affected, obs, tuple(datum.get("transaction_ids", [])))
        return record

    def _affected_parties(self, datum: dict, obs: ev.ObservationRecord) -> tuple[str, ...]:
        if datum.get("affected") == "both" or len(datum.get("parties", [])) == 2:
            return tuple(sorted(self.agreement.parties))
        return (obs.party,) if obs.party else (self.agreement.parties[0],)

    def _determine_cross_default(self, obs: ev.ObservationRecord, datum: dict) -> ev.EventRecord | None:
        """Aggregate third-party defaults against the Schedule threshold."""
        threshold = self.agreement.event_spec(ev.CROSS_DEFAULT).threshold
        debtor = datum.get("party")
        monitored = debtor
        for party_id, entities in self.elections.specified_entities.items():
            if debtor in entities:
                monitored = party_id
        amount = wire_int(datum.get("amount", 0))
        currency = datum.get("currency", threshold.currency if threshold else "USD")
        key = (monitored, currency)
        if datum.get("resolved"):
            self.cross_default_totals[key] = 0
            self.journal.append("determination", {
                "observation_id": obs.observation_id, "outcome": "cross-default-resolved",
                "party": monitored, "currency": currency,
            })
            return None
        self.cross_default_totals[key] = self.cross_default_totals.get(key, 0) + amount
        total = self.cross_default_totals[key]
        triggered = (
            threshold is not None
            and currency == threshold.currency
            and total > threshold.amount
        )
        already_live = any(
            record.kind == ev.CROSS_DEFAULT and monitored in record.affected_parties and record.live
            for record in self.events.values()
        )
        if not triggered or already_live:
            self.journal.append("determination", {
                "observation_id": obs.observation_id, "outcome": "no-event",
                "kind": ev.CROSS_DEFAULT, "party": monitored,
                "aggregate": total, "currency": currency,
                "threshold": threshold.amount if threshold else None,
            })
            return None
        spec = self.agreement.event_spec(ev.CROSS_DEFAULT)
        return self._create_event(spec, (monitored,), obs, (), aggregate=total)

    def _create_event(self, spec: ev.EventSpec, affected: tuple[str, ...],
                      obs: ev.ObservationRecord | None, transaction_ids: tuple[str, ...],
                      linked_obligation: str | None = None, via_authorization: str | None = None,
                      aggregate: int | None = None) -> ev.EventRecord:
        event_id = f"ev-{self.journal.next_seq}"
        has_grace = spec.grace.basis != "none"
        deadline = ev.grace_deadline(spec, self.current_date, self.calendars) if has_grace else None
        record = ev.EventRecord(
            event_id=event_id,
            kind=spec.kind,
            event_class=spec.event_class,
            affected_parties=tuple(sorted(affected)),
            status=ev.POTENTIAL_PENDING_GRACE if has_grace else ev.OCCURRED,
            grace_deadline=deadline,
            observation_ids=(obs.observation_id,) if obs else (),
            transaction_ids=transaction_ids,
            linked_obligation=linked_obligation,
            occurred_on=None if has_grace else self.current_date,
        )
        self.events[event_id] = record
        if record.status == ev.OCCURRED and record.event_class == ev.EVENT_OF_DEFAULT:
            for party_id in record.affected_parties:
                self.escalation_counts[party_id] = self.escalation_counts.get(party_id, 0) + 1
        payload = {
            "outcome": "event-created", **record.snapshot(),
            "via_authorization": via_authorization,
        }
        if aggregate is not None:
            payload["aggregate"] = aggregate
        self.journal.append("determination", payload)
        return record

    def _resolve_concurrent(self, created: list[ev.EventRecord]) -> None:
        precedence = self._term("hierarchy-precedence") or None
        governing, superseded = ev.resolve_hierarchy(created, precedence)
        for loser in superseded:
            loser.status = ev.SUPERSEDED
            self.journal.append("determination", {
                "outcome": "superseded", "event_id": loser.event_id,
                "governing_event_id": governing.event_id, "kind": loser.kind,
            })

    # -- stage: cure ------------------------------------------------------------

    def _apply_cure_command(self, seq: int, datum: dict) -> None:
        event_id = datum.get("event_id")
        if event_id is None:
            # select by (kind, party) so scripts need not predict event ids
            matches = [
                record.event_id for record in self._live_events()
                if record.kind == datum.get("kind")
                and (datum.get("party") is None or datum["party"] in record.affected_parties)
            ]
            event_id = matches[0] if matches else "<no-match>"
        try:
            self._cure(event_id, via=f"command-{seq}")
        except (UnknownEvent, AlreadyCured) as exc:
            self.journal.append("control", {"event": "command-rejected", "command_seq": seq,
                                            "reason": type(exc).__name__})

    def _cure(self, event_id: str, via: str) -> list[str]:
        record = self.events.get(event_id)
        if record is None:
            raise UnknownEvent(event_id)
        if record.status == ev.CURED:
            raise AlreadyCured(event_id)
        record.status = ev.CURED
        record.cured_on = self.current_date
        freed = self.suspensions.release_event(event_id)
        self.journal.append("determination", {
            "outcome": "cured", "event_id": event_id, "kind": record.kind,
            "via": via, "resumed_obligations": freed,
        })
        for ob_id in freed:
            self._resume_obligation(ob_id)
        return freed

    def _resume_obligation(self, ob_id: str) -> None:
        obligation = self.obligations.get(ob_id)
        if obligation is not None:
            obligation.transition(DUE)
            self.journal.append("settlement", {
                "event": "resumed", "obligation_id": ob_id,
                "amount": obligation.amount, "original_due": obligation.due_date,
            })
        else:
            delivery = self.deliveries[ob_id]
            delivery.transition(DUE)
            self.journal.append("settlement", {
                "event": "resumed", "obligation_id": ob_id, "delivery": True,
                "quantity": delivery.quantity, "original_due": delivery.due_date,
            })
        if self._last_report is not None:
            self._last_report.resumed.append(ob_id)

    # -- stage: answers -----------------------------------------------------------

    def _apply_answer(self, seq: int, datum: dict) -> None:
        request = self.pending_auth.get(self._answers_by_seq.get(seq, ""))
        if request is None or request.answer_seq != seq:
            self.journal.append("control", {"event": "command-rejected", "command_seq": seq,
                                            "reason": "stale-or-invalid-answer"})
            return
        self.journal.append("authorization", {
            "event": "answer-applied", "request_id": request.request_id,
            "party": request.answered_by, "response": request.answer,
            "context": request.context, "command_seq": seq,
        })
        context_kind = request.context.get("kind")
        response = request.answer
        if context_kind == "interest-charge":
            self._apply_interest_answer(request, response)
        elif context_kind == "eod-action":
            self._apply_eod_action(request, response)
        elif context_kind == "te-action":
            self._apply_te_action(request, response)
        elif context_kind == "subjective-event":
            self._apply_subjective_answer(request, response)
        # acknowledge-only contexts (deferred-funds, rate-escalation,
        # unclassified-observation) need no further effect.

    def _apply_interest_answer(self, request: PendingAuthorization, response: str) -> None:
        charge = self.charges.get(request.context.get("charge_id", ""))
        if charge is None or charge.status != "Proposed":
            return
        if response == "waive":
            charge.status = "Waived"
            self.journal.append("settlement", {"event": "interest-waived", "charge_id": charge.charge_id})
            return
        charge.status = "Authorized"
        obligation = Obligation(
            obligation_id=f"payint-{charge.charge_id}",
            instance_id=charge.obligation_id,
            payer=charge.payer,
            payee=charge.payee,
            amount=charge.amount,
            due_date=self.current_date,
            status=DUE,
            origin=ORIGIN_INTEREST,
            taxable=False,
        )
        self.obligations[obligation.obligation_id] = obligation
        self.journal.append("settlement", {
            "event": "interest-applied", "charge_id": charge.charge_id,
            "obligation_id": obligation.obligation_id, "amount": charge.amount,
        })

    def _apply_eod_action(self, request: PendingAuthorization, response: str) -> None:
        event_id = request.context.get("event_id", "")
        record = self.events.get(event_id)
        if record is None:
            return
        if response == "ignore":
            record.waived = True
            freed = self.suspensions.release_event(event_id)
            self.journal.append("action", {"event": "event-waived", "event_id": event_id,
                                           "by": request.answered_by, "resumed_obligations": freed})
            for ob_id in freed:
                self._resume_obligation(ob_id)
        elif response == "terminate-relationship":
            self._terminate_instances(sorted(self.instances), f"answer-{request.request_id}")
        else:  # "suspend": the condition precedent already gates settlement
            self.journal.append("action", {"event": "suspension-acknowledged", "event_id": event_id,
                                           "by": request.answered_by})

    def _apply_te_action(self, request: PendingAuthorization, response: str) -> None:
        event_id = request.context.get("event_id", "")
        record = self.events.get(event_id)
        if record is None:
            return
        if response == "terminate-affected":
            affected = list(record.transaction_ids) or sorted(self.instances)
            self._terminate_instances(affected, f"answer-{request.request_id}")
        else:
            self.journal.append("action", {"event": "wait-elected", "event_id": event_id,
                                           "by": request.answered_by})

    def _apply_subjective_answer(self, request: PendingAuthorization, response: str) -> None:
        context = request.context
        if response != "yes-trigger":
            self.journal.append("determination", {
                "outcome": "no-event", "kind": context.get("event_kind"),
                "observation_id": context.get("observation_id"),
                "via_authorization": request.request_id,
            })
            return
        spec = self.agreement.event_spec(context["event_kind"])
        obs = self.observations.get(context.get("observation_id", ""))
        self._create_event(
            spec,
            (context.get("party") or self.agreement.parties[0],),
            obs,
            tuple(context.get("transaction_ids", [])),
            via_authorization=request.request_id,
        )

    def _terminate_instances(self, instance_ids: list[str], via: str) -> None:
        newly = [i for i in instance_ids if i not in self.terminated]
        if not newly:
            return
        self.terminated.update(newly)
        self.journal.append("action", {"event": "instances-terminated", "instances": sorted(newly), "via": via})

    # -- stage: generation ----------------------------------------------------------

    def _generate(self, report: DayReport) -> None:
        for instance_id in sorted(self.instances):
            if instance_id in self.terminated:
                continue
            instance = self.instances[instance_id]
            calendar = self.calendars.get(instance.term("default-calendar"))
            result = generate_obligations(
                instance,
                self.current_date,
                self.fixings,
                calendar,
                self.generated_ids,
                policy=FallbackPolicy.from_term(instance.term("rate-fallback-policy")),
                rounding=self.rounding,
            )
            fallback_by_id = dict(result.fallbacks)
            for obligation in result.obligations:
                self.obligations[obligation.obligation_id] = obligation
                payload = {
                    "event": "obligation-generated", "obligation_id": obligation.obligation_id,
                    "instance_id": instance_id, "payer": obligation.payer, "payee": obligation.payee,
                    "amount": obligation.amount, "due_date": obligation.due_date,
                }
                rate = fallback_by_id.get(obligation.obligation_id)
                if rate is not None:
                    payload["fallback_applied"] = True
                    payload["fallback_fixed_from"] = rate.fixed_from
                self.journal.append("settlement", payload)
                report.generated.append(obligation.obligation_id)
            for delivery in result.deliveries:
                self.deliveries[delivery.obligation_id] = delivery
                self.journal.append("settlement", {
                    "event": "delivery-generated", "obligation_id": delivery.obligation_id,
                    "instance_id": instance_id, "deliverer": delivery.deliverer,
                    "recipient": delivery.recipient, "asset_id": delivery.asset_id,
                    "quantity": delivery.quantity, "due_date": delivery.due_date,
                })
                report.generated.append(delivery.obligation_id)
            for escalation in result.escalations:
                for party_id in self.agreement.parties:
                    self._request_auth(
                        request_id=f"auth-rate-{escalation.source}-{escalation.fixing_date}-{party_id}",
                        party=party_id,
                        question=(f"Rate {escalation.source} unpublished for {escalation.fixing_date} "
                                  "beyond the fallback window"),
                        menu=("acknowledge",),
                        context={"kind": "rate-escalation", "source": escalation.source,
                                 "fixing_date": escalation.fixing_date.isoformat()},
                    )

    # -- stage: event tick ---------------------------------------------------------

    def _tick(self, report: DayReport) -> None:
        curable_on_deadline = self._term("grace-curable-on-deadline")
        curable_on_deadline = True if curable_on_deadline is None else bool(curable_on_deadline)
        for event_id in sorted(self.events):
            record = self.events[event_id]
            if record.status == ev.OCCURRED and record.occurred_on is not None \
                    and record.occurred_on < self.current_date:
                record.status = ev.CONTINUING
                self.journal.append("determination", {"outcome": "continuing", "event_id": event_id})
        for event_id in sorted(self.events):
            record = self.events[event_id]
            if record.status != ev.POTENTIAL_PENDING_GRACE or record.grace_deadline is None:
                continue
            lapsed = (record.grace_deadline < self.current_date if curable_on_deadline
                      else record.grace_deadline <= self.current_date)
            if lapsed:
                record.status = ev.OCCURRED
                record.occurred_on = self.current_date
                if record.event_class == ev.EVENT_OF_DEFAULT:
                    for party_id in record.affected_parties:
                        self.escalation_counts[party_id] = self.escalation_counts.get(party_id, 0) + 1
                self.journal.append("determination", {
                    "outcome": "grace-lapsed", "event_id": event_id, "kind": record.kind,
                    "deadline": record.grace_deadline,
                })

    # -- stage: netting -------------------------------------------------------------

    def _net(self, report: DayReport) -> None:
        nettable = [
            ob for ob in self.obligations.values()
            if ob.origin == ORIGIN_GROSS and ob.status == SCHEDULED and ob.due_date <= self.current_date
        ]
        batches: dict[tuple[date, str], list[Obligation]] = {}
        for ob in nettable:
            group_id = self.group_ledger.group_of(ob.instance_id)
            if group_id is None:
                continue  # force-retired with leftovers; they stay Scheduled for audit
            batches.setdefault((ob.due_date, group_id), []).append(ob)
        for (value_date, group_id) in sorted(batches):
            group = self.group_ledger.groups[group_id]
            nets = netting.net_day(group, value_date, batches[(value_date, group_id)], self.agreement.parties)
            for net in nets:
                self.net_records[net.obligation_id] = net
                self.journal.append("settlement", {
                    "event": "netted", "net_id": net.obligation_id, "group_id": group_id,
                    "value_date": net.value_date, "currency": net.currency,
                    "payer": net.payer, "payee": net.payee, "amount": net.amount,
                    "constituents": list(net.constituents),
                })
                report.nets.append(net.obligation_id)
                payment = netting.as_payment_obligation(net)
                if payment is not None:
                    self.obligations[payment.obligation_id] = payment
        for delivery_id in sorted(self.deliveries):
            delivery = self.deliveries[delivery_id]
            if delivery.status == SCHEDULED and delivery.due_date <= self.current_date:
                delivery.transition(DUE)

    # -- stage: settlement ------------------------------------------------------------

    def _balance(self, party_id: str, currency: str) -> int | None:
        return self.accounts.get((party_id, currency))

    def _settle(self, report: DayReport, incoming: list[tuple[int, dict]]) -> None:
        for ob_id in sorted(self.obligations):
            obligation = self.obligations[ob_id]
            if obligation.status == DEFERRED:
                obligation.transition(DUE)

        for seq, datum in incoming:
            self._apply_incoming(seq, datum, report)

        # Settle in passes: a payment/discharge can cure an event, and the
        # cure frees suspended obligations that then settle the same day.
        attempted: set[str] = set()
        while True:
            self._auto_cure()
            for ob_id in list(attempted):
                if self.obligations[ob_id].status == DUE:
                    attempted.discard(ob_id)  # resumed by a cure; retry now
            queue = sorted(
                (ob for ob in self.obligations.values()
                 if ob.status == DUE and ob.due_date <= self.current_date
                 and ob.obligation_id not in attempted),
                key=lambda ob: (ob.due_date, ob.obligation_id),
            )
            if not queue:
                break
            index = 0
            while index < len(queue):
                obligation = queue[index]
                index += 1
                if obligation.status != DUE:
                    continue
                attempted.add(obligation.obligation_id)
                extra = self._settle_one(obligation, report)
                queue.extend(extra)

        for delivery_id in sorted(self.deliveries):
            delivery = self.deliveries[delivery_id]
            if delivery.status != DUE or delivery.due_date > self.current_date:
                continue
            check = check_condition_precedent(
                delivery.deliverer, self.counterparty(delivery.deliverer),
                self._live_events(), self._metavante())
            if not check.passed:
                self.suspensions.suspend(delivery, check.event_ids, self.current_date)
                self.journal.append("settlement", {
                    "event": "suspended", "obligation_id": delivery_id,
                    "suspending_events": list(check.event_ids), "delivery": True,
                })
                report.suspended.append(delivery_id)
                continue
            delivery.transition(PAID)
            self.journal.append("settlement", {
                "event": "delivered", "obligation_id": delivery_id,
                "asset_id": delivery.asset_id, "quantity": delivery.quantity,
            })
            report.settled.append(delivery_id)

    def _apply_incoming(self, seq: int, datum: dict, report: DayReport) -> None:
        payer = datum["party"]
        payment = IncomingPayment(
            payment_id=datum.get("payment_id", f"pay-{seq}"),
            payer=payer,
            branch_id=datum["branch"],
            amount=Money(datum["currency"], wire_int(datum["amount"])),
            value_date=self.current_date,
        )
        party = self.parties.get(payer)
        if party is None:
            self.journal.append("control", {"event": "command-rejected", "command_seq": seq,
                                            "reason": "UnknownParty"})
            return
        designated = self.elections.multibranch.get(payer, ())
        try:
            validate_branch(payment, party, designated)
        except Exception as exc:
            self.journal.append("control", {"event": "command-rejected", "command_seq": seq,
                                            "reason": type(exc).__name__})
            return
        credit_key = (payer, payment.amount.currency)
        candidates = [ob for ob in self.obligations.values()
                      if ob.status == DUE and ob.due_date <= self.current_date]
        result = match_incoming(payment, candidates, extra_credit=self.credit.get(credit_key, 0))
        self.credit[credit_key] = result.unapplied
        self.journal.append("settlement", {
            "event": "payment-received", "payment_id": payment.payment_id,
            "party": payer, "branch": payment.branch_id, "amount": payment.amount,
            "matched": [{"obligation_id": ob_id, "applied": applied} for ob_id, applied in result.matched],
            "unapplied_credit": result.unapplied,
        })
        for ob_id, applied in result.matched:
            payee_key = (self.obligations[ob_id].payee, payment.amount.currency)
            if payee_key in self.accounts:
                self.accounts[payee_key] += applied
            if self.obligations[ob_id].status == DISCHARGED:
                report.settled.append(ob_id)

    def _auto_cure(self) -> None:
        for event_id in sorted(self.events):
            record = self.events[event_id]
            if not record.live or record.linked_obligation is None:
                continue
            obligation = self.obligations.get(record.linked_obligation)
            if obligation is not None and obligation.status in (PAID, DISCHARGED):
                self._cure(event_id, via="payment-of-linked-obligation")

    def _settle_one(self, obligation: Obligation, report: DayReport) -> list[Obligation]:
        """Settle one Due obligation; may spawn a gross-up obligation."""
        check = check_condition_precedent(
            obligation.payer, self.counterparty(obligation.payer),
            self._live_events(), self._metavante())
        if not check.passed:
            self.suspensions.suspend(obligation, check.event_ids, self.current_date)
            self.journal.append("settlement", {
                "event": "suspended", "obligation_id": obligation.obligation_id,
                "amount": obligation.amount, "suspending_events": list(check.event_ids),
            })
            report.suspended.append(obligation.obligation_id)
            return []

        credit_key = (obligation.payer, obligation.currency)
        available_credit = self.credit.get(credit_key, 0)
        if available_credit > 0:
            applied = min(available_credit, obligation.outstanding)
            obligation.outstanding -= applied
            self.credit[credit_key] = available_credit - applied
            self.journal.append("settlement", {
                "event": "credit-applied", "obligation_id": obligation.obligation_id,
                "applied": applied, "remaining_credit": self.credit[credit_key],
            })
            if obligation.outstanding == 0:
                obligation.transition(DISCHARGED)
                report.settled.append(obligation.obligation_id)
                return []

        rule = self._applicable_tax_rule(obligation)
        outgoing = obligation.outstanding
        balance = self._balance(obligation.payer, obligation.currency)
        if balance is not None and balance < outgoing:
            obligation.transition(DEFERRED)
            if obligation.suspended_since is None:
                obligation.suspended_since = self.current_date
            self.journal.append("settlement", {
                "event": "deferred", "obligation_id": obligation.obligation_id,
                "amount": obligation.amount, "reason": "insufficient-funds",
                "balance": balance,
            })
            report.deferred.append(obligation.obligation_id)
            self._request_auth(
                request_id=f"auth-def-{obligation.obligation_id}",
                party=obligation.payer,
                question=(f"Insufficient designated funds for {obligation.obligation_id} "
                          f"({obligation.amount.currency} {obligation.amount.amount}); how to proceed?"),
                menu=("acknowledge",),
                context={"kind": "deferred-funds", "obligation_id": obligation.obligation_id},
            )
            self._observe_missed_payment(obligation)
            return []

        gross = Money(obligation.currency, outgoing)
        withheld = None
        net_paid = gross
        gross_up_obligation = None
        if rule is not None and obligation.taxable:
            result = apply_withholding(gross, rule, self.current_date)
            withheld = result.withheld
            net_paid = result.net_paid
            if result.gross_up is not None:
                gross_up_obligation = Obligation(
                    obligation_id=f"gup-{obligation.obligation_id}",
                    instance_id=obligation.instance_id,
                    payer=obligation.payer,
                    payee=obligation.payee,
                    amount=result.gross_up,
                    due_date=self.current_date,
                    status=DUE,
                    origin=ORIGIN_GROSS_UP,
                    taxable=False,
                )

        if balance is not None:
            self.accounts[(obligation.payer, obligation.currency)] = balance - outgoing
        payee_key = (obligation.payee, obligation.currency)
        if payee_key in self.accounts:
            self.accounts[payee_key] += net_paid.amount
        obligation.outstanding = 0
        obligation.transition(PAID)
        payload = {
            "event": "paid", "obligation_id": obligation.obligation_id,
            "payer": obligation.payer, "payee": obligation.payee,
            "amount": gross, "origin": obligation.origin,
        }
        if withheld is not None and withheld.amount > 0:
            payload["withheld"] = withheld
            payload["net_paid"] = net_paid
            payload["tax_rule"] = rule.rule_id
            payload["indemnifiable"] = rule.indemnifiable
            if gross_up_obligation is not None:
                payload["gross_up_obligation"] = gross_up_obligation.obligation_id
        self.journal.append("settlement", payload)
        report.settled.append(obligation.obligation_id)
        if obligation.origin == ORIGIN_INTEREST:
            charge = self.charges.get(obligation.obligation_id.removeprefix("payint-"))
            if charge is not None:
                charge.status = "Paid"
        if gross_up_obligation is not None:
            self.obligations[gross_up_obligation.obligation_id] = gross_up_obligation
            self.journal.append("settlement", {
                "event": "gross-up-created", "obligation_id": gross_up_obligation.obligation_id,
                "for": obligation.obligation_id, "amount": gross_up_obligation.amount,
            })
            return [gross_up_obligation]
        return []

    def _applicable_tax_rule(self, obligation: Obligation) -> TaxRule | None:
        if obligation.origin != ORIGIN_NET or not obligation.taxable:
            return None
        for rule in self.tax_rules:
            if rule.payer is not None and rule.payer != obligation.payer:
                continue
            if rule.effective_on(self.current_date) and rule.rate > 0:
                return rule
        return None

    def _observe_missed_payment(self, obligation: Obligation) -> None:
        already = any(
            record.linked_obligation == obligation.obligation_id and record.live
            for record in self.events.values()
        )
        if already:
            return
        obs_id = f"obs-{self.journal.next_seq}"
        record = ev.ObservationRecord(
            observation_id=obs_id,
            source=ev.ON_PLATFORM,
            level=ev.LEVEL_TRANSACTION,
            kind=ev.FAILURE_TO_PAY,
            party=obligation.payer,
            notifier=None,
            payload={"obligation_id": obligation.obligation_id},
            seq=self.journal.next_seq,
        )
        self.observations[obs_id] = record
        self.journal.append("observation", {
            "observation_id": obs_id, "source": record.source, "level": record.level,
            "kind": record.kind, "party": obligation.payer,
            "obligation_id": obligation.obligation_id, "notifier": None,
        })
        spec = self.agreement.event_spec(ev.FAILURE_TO_PAY)
        self._create_event(spec, (obligation.payer,), record, (obligation.instance_id,),
                           linked_obligation=obligation.obligation_id)

    # -- stage: interest ---------------------------------------------------------------

    def _propose_interest(self, report: DayReport) -> None:
        rate = self._term("default-interest-rate")
        denominator = self._term("interest-day-count-denominator") or 360
        if not rate:
            return
        for ob_id in sorted(self.obligations):
            obligation = self.obligations[ob_id]
            if obligation.status not in (PAID, DISCHARGED):
                continue
            if obligation.suspended_since is None:
                continue
            charge_id = f"int-{ob_id}"
            if charge_id in self.charges:
                continue
            if obligation.suspended_since >= self.current_date:
                continue
            charge = accrue_default_interest(
                obligation, wire_int(rate), obligation.suspended_since, self.current_date,
                wire_int(denominator))
            if charge.amount.is_zero:
                continue
            self.charges[charge.charge_id] = charge
            self.journal.append("settlement", {
                "event": "interest-proposed", "charge_id": charge.charge_id,
                "obligation_id": ob_id, "payer": charge.payer, "payee": charge.payee,
                "window_start": charge.window_start, "window_end": charge.window_end,
                "rate": charge.rate, "denominator": charge.denominator,
                "amount": charge.amount,
            })
            self._request_auth(
                request_id=f"auth-{charge.charge_id}",
                party=charge.payee,
                question=(f"Apply default interest {charge.amount.currency} {charge.amount.amount} "
                          f"on {ob_id} for {charge.window_start}..{charge.window_end}, or waive?"),
                menu=("apply", "waive"),
                context={"kind": "interest-charge", "charge_id": charge.charge_id},
            )

    # -- stage: notices & actions --------------------------------------------------------

    def _notices_and_actions(self, report: DayReport) -> None:
        for event_id in sorted(self.events):
            record = self.events[event_id]
            if record.status not in (ev.OCCURRED, ev.CONTINUING) or record.waived:
                continue
            if event_id not in self.noticed_events:
                for notice in ev.build_notices(record, self.agreement.parties):
                    self.journal.append("action", {
                        "event": "notice", "notice_id": notice.notice_id,
                        "sender": notice.sender, "recipient": notice.recipient,
                        "event_id": event_id, "kind": notice.kind,
                        "affected_transactions": list(notice.affected_transactions),
                    })
                    report.notices += 1
                self.noticed_events.add(event_id)
            if event_id in self.acted_events:
                continue
            self.acted_events.add(event_id)
            self._act(record)

    def _act(self, record: ev.EventRecord) -> None:
        spec = self.agreement.event_spec(record.kind)
        aet = bool(self._term("automatic-early-termination"))
        if record.kind == ev.BANKRUPTCY and aet:
            self.journal.append("action", {
                "event": "automatic-early-termination", "event_id": record.event_id,
                "instances": sorted(self.instances),
            })
            self._terminate_instances(sorted(self.instances), f"aet-{record.event_id}")
            return
        choice = self.policy.choice_for(spec) if spec else ev.ESCALATE_TO_HUMAN
        if choice == ev.IGNORE:
            self.journal.append("action", {"event": "record-only", "event_id": record.event_id})
            return
        if choice == ev.SUSPEND:
            self.journal.append("action", {
                "event": "suspend-payments", "event_id": record.event_id,
                "payer_view": [p for p in self.agreement.parties if p not in record.affected_parties],
            })
            return
        if record.event_class == ev.EVENT_OF_DEFAULT:
            defaulting = record.affected_parties[0]
            decider = self.counterparty(defaulting)
            menu = ev.action_menu(record.event_class, self._lenient_for(defaulting))
            self._request_auth(
                request_id=f"auth-act-{record.event_id}",
                party=decider,
                question=f"{record.kind} occurred against {defaulting}: choose a response",
                menu=menu,
                context={"kind": "eod-action", "event_id": record.event_id},
            )
        else:
            deciders = (
                tuple(sorted(self.agreement.parties))
                if len(record.affected_parties) == 2
                else (self.counterparty(record.affected_parties[0]),)
            )
            for decider in deciders:
                self._request_auth(
                    request_id=f"auth-act-{record.event_id}-{decider}",
                    party=decider,
                    question=f"{record.kind} occurred (affected: {', '.join(record.affected_parties)}): choose a response",
                    menu=ev.action_menu(record.event_class, True),
                    context={"kind": "te-action", "event_id": record.event_id},
                )

    # -- stage: reminders ------------------------------------------------------------------

    def _remind(self, report: DayReport) -> None:
        for request_id in sorted(self.pending_auth):
            request = self.pending_auth[request_id]
            if request.status != "Open":
                continue
            if request.created_seq >= self._day_start_seq():
                continue
            self.journal.append("authorization", {
                "event": "reminder", "request_id": request_id, "party": request.party,
            })

    def _day_start_seq(self) -> int:
        for entry in reversed(self.journal.entries):
            if entry.kind == "control" and entry.payload.get("command") == "step-day":
                return entry.seq
        return 0

    # -- views -------------------------------------------------------------------------------

    @property
    def last_report(self) -> DayReport | None:
        return self._last_report

    def open_authorizations(self, party: str | None = None) -> list[PendingAuthorization]:
        items = [r for r in self.pending_auth.values() if r.status == "Open"]
        if party is not None:
            items = [r for r in items if r.party == party]
        return sorted(items, key=lambda r: r.request_id)

    def state_view(self) -> dict:
        return {
            "mode": self.mode,
            "last_step_date": self.last_step_date.isoformat() if self.last_step_date else None,
            "journal_seq": len(self.journal),
            "digest": self.digest,
            "instances": {
                instance_id: {"state": self.instance_state(instance_id),
                              "product_type": self.instances[instance_id].confirmation.product_type}
                for instance_id in sorted(self.instances)
            },
            "accounts": {
                f"{party}:{currency}": str(balance)
                for (party, currency), balance in sorted(self.accounts.items())
            },
            "parties": list(self.agreement.parties),
            "open_authorizations": len(self.open_authorizations()),
        }

    def obligations_view(self, status: str | None = None) -> list[dict]:
        rows = []
        for ob_id in sorted(self.obligations):
            ob = self.obligations[ob_id]
            if status and ob.status != status:
                continue
            rows.append({
                "obligation_id": ob_id, "instance_id": ob.instance_id,
                "payer": ob.payer, "payee": ob.payee,
                "currency": ob.currency, "amount": str(ob.amount.amount),
                "outstanding": str(ob.outstanding), "due_date": ob.due_date.isoformat(),
                "status": ob.status, "origin": ob.origin,
                "netted_into": ob.netted_into,
            })
        for d_id in sorted(self.deliveries):
            delivery = self.deliveries[d_id]
            if status and delivery.status != status:
                continue
            rows.append({
                "obligation_id": d_id, "instance_id": delivery.instance_id,
                "payer": delivery.deliverer, "payee": delivery.recipient,
                "currency": delivery.asset_id, "amount": str(delivery.quantity),
                "outstanding": str(delivery.quantity), "due_date": delivery.due_date.isoformat(),
                "status": delivery.status, "origin": "Delivery",
                "netted_into": None,
            })
        return rows

    def events_view(self) -> list[dict]:
        rows = []
        for event_id in sorted(self.events):
            record = self.events[event_id]
            row = dict(to_wire(record.snapshot()))
            rows.append(row)
        return rows


def replicate_config(config: dict) -> str:
    """Digest of the wire-form config; equal configs mean equal genesis."""
    return hashlib.sha256(canonical_json(to_wire(config)).encode()).hexdigest()


def replay(journal: Journal) -> Engine:
    """Rebuild an engine by re-executing a journal's inputs.

    The chain is verified first (tampering -> ChainBroken); the regenerated
    journal must then reproduce the original head digest exactly.
    """
    journal.verify_chain()
    if not journal.entries:
        raise ChainBroken(0)
    genesis = journal.entries[0]
    if genesis.kind != "control" or genesis.payload.get("command") != "genesis":
        raise ChainBroken(1)
    engine = Engine(genesis.payload["config"])
    for entry in journal.entries[1:]:
        if entry.kind == "command":
            engine.consume(entry.payload["datum"])
        elif entry.kind == "control":
            command = entry.payload.get("command")
            if command == "step-day":
                engine.consume({"type": "step-day", "date": entry.payload["date"]})
            elif command in ("pause", "resume", "stop"):
                engine.consume({"type": command, "reason": entry.payload.get("reason")})
    if engine.digest != journal.head_digest:
        raise ReplayMismatch(
            f"replayed digest {engine.digest[:12]} != recorded {journal.head_digest[:12]}"
        )
    return engine
