"""Exception hierarchy shared across the runtime."""

from __future__ import annotations


class MasError(Exception):
    """Base class for all runtime errors."""


class MalformedEvent(MasError):
    """A serialized trace event line is truncated or violates the schema."""


class TopologyInvalid(MasError):
    """A run was requested over a topology whose validation reported errors."""

    def __init__(self, report):
        self.report = report
        super().__init__(f"topology invalid: {[v.rule for v in report.violations]}")


class EngineUnavailable(MasError):
    """A remote reasoning engine stayed unreachable after the retry budget."""


class IllegalDecision(MasError):
    """An engine named a tool or handoff target that is not offered to it."""


class DecisionParseError(MasError):
    """No parseable decision object found in an engine completion."""


class UnknownKind(DecisionParseError):
    """Decision object carries a type outside the known set."""


class UnknownTool(MasError):
    pass


class ArgSchemaViolation(MasError):
    pass


class UnknownDataset(MasError):
    pass


class UnknownColumn(MasError):
    pass


class QuerySyntax(MasError):
    pass


class EmptyStore(MasError):
    pass


class RoutingError(MasError):
    """Handoff target is not reachable from the current agent."""


class NotAwaiting(MasError):
    """A resume was submitted for a run that is not awaiting approval."""


class DecisionAlreadyRecorded(MasError):
    """A second decision arrived for an approval request already decided."""


class AlreadyTerminal(MasError):
    """An interrupt targeted a run that already reached a terminal status."""


class UnknownRun(MasError):
    pass


class UnknownRequest(MasError):
    """Approval request id is unknown or the request has been voided."""


class HopBudget(MasError):
    """A handoff would exceed the run's hop budget."""


class Divergence(Exception):
    """Replayed execution produced an event differing from the recorded one.

    Deliberately not a MasError: agent loops absorb domain errors into the
    run log, but a divergence must unwind to the replay driver untouched.
    """

    def __init__(self, seq: int, expected, actual):
        self.seq = seq
        self.expected = expected
        self.actual = actual
        super().__init__(f"divergence at seq {seq}")
