"""Exception hierarchy shared across the engine.

Every error the engine can raise deliberately derives from EngineError so
callers (CLI, API, harness) can distinguish contract violations from bugs.
"""

from __future__ import annotations


class EngineError(Exception):
    """Base class for all deliberate engine errors."""


# -- domain model -----------------------------------------------------------

class CurrencyMismatch(EngineError):
    pass


class CalendarRangeExceeded(EngineError):
    pass


class UnknownParty(EngineError):
    pass


# -- templates --------------------------------------------------------------

class MissingStandardEvent(EngineError):
    pass


class DuplicateTerm(EngineError):
    pass


class IllegalOverride(EngineError):
    pass


class UnknownTerm(EngineError):
    pass


class UnresolvedPlaceholder(EngineError):
    def __init__(self, names):
        self.names = tuple(sorted(names))
        super().__init__(f"unresolved placeholders: {', '.join(self.names)}")


class ProductMismatch(EngineError):
    pass


# -- cashflows --------------------------------------------------------------

class ConflictingFixing(EngineError):
    pass


class FixingUnavailable(EngineError):
    def __init__(self, source, fixing_date):
        self.source = source
        self.fixing_date = fixing_date
        super().__init__(f"no fixing for {source} on {fixing_date} and fallback escalates")


# -- netting ----------------------------------------------------------------

class UnknownTransaction(EngineError):
    pass


class MixedGroup(EngineError):
    pass


class OutstandingObligations(EngineError):
    pass


# -- events -----------------------------------------------------------------

class NotATerminationEvent(EngineError):
    pass


class UnknownEvent(EngineError):
    pass


class AlreadyCured(EngineError):
    pass


# -- settlement -------------------------------------------------------------

class EmptyWindow(EngineError):
    pass


class UnknownBranch(EngineError):
    pass


class UndesignatedBranch(EngineError):
    pass


class RuleExpired(EngineError):
    pass


# -- journal / engine / harness ---------------------------------------------

class OutOfOrderDate(EngineError):
    pass


class ChainBroken(EngineError):
    def __init__(self, seq):
        self.seq = seq
        super().__init__(f"journal digest chain broken at seq {seq}")


class ReplayMismatch(EngineError):
    pass


class EngineStopped(EngineError):
    pass


class HarnessStopped(EngineError):
    pass


class AlreadyStopped(EngineError):
    pass


class DivergenceDetected(EngineError):
    def __init__(self, replica_ids, seq, diff=None):
        self.replica_ids = tuple(replica_ids)
        self.seq = seq
        self.diff = diff or []
        super().__init__(f"replicas {list(self.replica_ids)} diverged at ledger seq {seq}")


class ScenarioParseError(EngineError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
