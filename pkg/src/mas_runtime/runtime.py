"""Run lifecycle management: creation, background execution, approvals,
interrupts, event feeds, and crash recovery over a data directory.

This is the in-process authority every surface (CLI, HTTP API, harness)
talks to. One manager owns one data directory; after a restart a new manager
over the same directory picks up persisted runs and their open approvals.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass
from typing import Any, Iterator

from .documents import load_document
from .errors import AlreadyTerminal, MasError, NotAwaiting, TopologyInvalid, UnknownRun
from .hitl import ApprovalGateway, ApprovalRequest
from .model import CheckpointLocation, EventKind, RunStatus, TraceEvent
from .orchestrator import (
    TERMINAL_STATUSES,
    ReplayReport,
    RunController,
    RunOutcome,
    now_ms,
    replay_events,
    run_metrics,
)
from .runstore import RunStore
from .topology import validate_topology


@dataclass
class _Handle:
    run_id: str
    lock: threading.Lock
    controller: RunController | None = None
    thread: threading.Thread | None = None
    driving: bool = False


class RunManager:
    def __init__(self, data_dir, clock=now_ms):
        self.store = RunStore(data_dir)
        self.gateway = ApprovalGateway()
        self._clock = clock
        self._handles: dict[str, _Handle] = {}
        self._lock = threading.Lock()
        self._recover()

    def _recover(self) -> None:
        """Re-register open approval requests of persisted awaiting runs."""
        for run_id in self.store.list_runs():
            try:
                snapshot = self.store.read_state(run_id)
            except (UnknownRun, ValueError):
                continue
            if snapshot.get("status") == RunStatus.AWAITING_APPROVAL.value and snapshot.get("pending"):
                self.gateway.register(ApprovalRequest.from_dict(snapshot["pending"]))

    def _handle(self, run_id: str) -> _Handle:
        with self._lock:
            if run_id not in self._handles:
                self._handles[run_id] = _Handle(run_id=run_id, lock=threading.Lock())
            return self._handles[run_id]

    # -- run creation -----------------------------------------------------------

    def create_run(
        self,
        document: dict[str, Any],
        query: str,
        base_dir: str = ".",
        engine_override: str | None = None,
        limits_override: dict[str, Any] | None = None,
        run_id: str | None = None,
        background: bool = True,
    ) -> str:
        """Validate, persist, and start a run; returns its id.

        Raises TopologyInvalid when validation reports error-class findings
        (warnings are allowed through).
        """
        loaded = load_document(
            document, base_dir=base_dir, engine_override=engine_override, limits_override=limits_override
        )
        report = validate_topology(loaded.topology)
        if not report.passed:
            raise TopologyInvalid(report)
        run_id = run_id or uuid.uuid4().hex[:12]
        controller = RunController(
            run_id=run_id,
            topology=loaded.topology,
            engines=loaded.engines,
            registry=loaded.registry,
            limits=loaded.limits,
            store=self.store,
            gateway=self.gateway,
            clock=self._clock,
            snapshot_extra={
                "document": loaded.document,
                "base_dir": loaded.base_dir,
                "engine_override": engine_override,
            },
        )
        handle = self._handle(run_id)
        with handle.lock:
            handle.controller = controller
            handle.driving = True
        self.store.write_state(run_id, controller.snapshot())

        def _run():
            try:
                controller.drive(query)
            finally:
                with handle.lock:
                    handle.driving = False

        if background:
            thread = threading.Thread(target=_run, name=f"run-{run_id}", daemon=True)
            handle.thread = thread
            thread.start()
        else:
            _run()
        return run_id

    # -- inspection ---------------------------------------------------------------

    def snapshot(self, run_id: str) -> dict[str, Any]:
        return self.store.read_state(run_id)

    def status(self, run_id: str) -> RunStatus:
        return RunStatus(self.snapshot(run_id)["status"])

    def events(self, run_id: str, after: int = -1) -> list[TraceEvent]:
        return [e for e in self.store.read_events(run_id) if e.seq > after]

    def outcome(self, run_id: str) -> RunOutcome:
        snapshot = self.snapshot(run_id)
        trace = self.store.read_events(run_id)
        status = RunStatus(snapshot["status"])
        return RunOutcome(
            run_id=run_id,
            status=status,
            answer=snapshot.get("answer") if status is RunStatus.COMPLETED else None,
            trace=trace,
            metrics=run_metrics(trace),
        )

    def wait(self, run_id: str, timeout: float = 30.0, poll: float = 0.01) -> RunStatus:
        """Block until the run leaves RUNNING (terminal or awaiting approval)."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            status = self.status(run_id)
            if status is not RunStatus.RUNNING:
                return status
            time.sleep(poll)
        raise TimeoutError(f"run {run_id} still running after {timeout}s")

    def subscribe(self, run_id: str, after: int = -1, poll: float = 0.05) -> Iterator[TraceEvent]:
        """Yield events with seq > after, then follow live appends until terminal.

        Strictly read-only over the persisted log; consuming the feed can
        never mutate the run.
        """
        cursor = after
        if not self.store.has_run(run_id):
            raise UnknownRun(f"no run {run_id!r}")
        while True:
            for event in self.events(run_id, cursor):
                cursor = event.seq
                yield event
            if self.status(run_id) in TERMINAL_STATUSES:
                for event in self.events(run_id, cursor):
                    cursor = event.seq
                    yield event
                return
            time.sleep(poll)

    # -- approvals -------------------------------------------------------------------

    def list_open_requests(self) -> list[ApprovalRequest]:
        return self.gateway.list_open()

    def submit_decision(self, request_id: str, decision: dict[str, Any]) -> RunStatus:
        """Record a decision and resume the suspended run with it.

        Intake is idempotent: the decision is recorded atomically before the
        resume, so a duplicate submission fails with DecisionAlreadyRecorded
        no matter how the resume itself fares.
        """
        request = self.gateway.claim(request_id)
        kind = decision.get("decision")
        if kind not in ("approve", "reject", "edit"):
            raise MasError(f"decision must be approve, reject, or edit, got {kind!r}")
        if kind == "edit" and request.location is not CheckpointLocation.FINAL_REVIEW:
            raise MasError("edit decisions are only valid at final_review checkpoints")
        snapshot = self.snapshot(request.run_id)
        if snapshot.get("status") != RunStatus.AWAITING_APPROVAL.value:
            raise NotAwaiting(f"run {request.run_id} is not awaiting approval")
        self.gateway.mark_decided(request_id, decision)
        self._resume(request.run_id, snapshot, request_id, decision)
        return self.status(request.run_id)

    def _resume(self, run_id: str, snapshot: dict[str, Any], request_id: str, decision: dict[str, Any]) -> None:
        """Re-drive the run over its recorded prefix, injecting the decision."""
        loaded = load_document(
            snapshot["document"],
            base_dir=snapshot.get("base_dir", "."),
            engine_override=snapshot.get("engine_override"),
        )
        tape = self.store.read_events(run_id)
        controller = RunController(
            run_id=run_id,
            topology=loaded.topology,
            engines=loaded.engines,
            registry=loaded.registry,
            limits=loaded.limits,
            store=self.store,
            gateway=self.gateway,
            clock=self._clock,
            tape=tape,
            injected_decisions={request_id: decision},
            snapshot_extra={
                "document": loaded.document,
                "base_dir": loaded.base_dir,
                "engine_override": snapshot.get("engine_override"),
            },
        )
        handle = self._handle(run_id)
        with handle.lock:
            handle.controller = controller
            handle.driving = True
        try:
            controller.drive(snapshot.get("query", ""))
        finally:
            with handle.lock:
                handle.driving = False

    # -- interrupts ---------------------------------------------------------------------

    def interrupt(self, run_id: str) -> RunStatus:
        """Stop a run: no further engine or tool calls will happen.

        A live driving thread is signalled and appends the interrupt event at
        its next boundary; a suspended (or orphaned) run is interrupted
        directly and its open approval requests are voided.
        """
        handle = self._handle(run_id)
        with handle.lock:
            status = RunStatus(self.snapshot(run_id)["status"])
            if status in TERMINAL_STATUSES:
                raise AlreadyTerminal(f"run {run_id} already {status.value}")
            if handle.driving and handle.controller is not None:
                handle.controller.request_interrupt()
                return RunStatus.RUNNING
            self._interrupt_directly(run_id)
            return RunStatus.INTERRUPTED

    def _interrupt_directly(self, run_id: str) -> None:
        trace = self.store.read_events(run_id)
        event = TraceEvent(
            seq=len(trace),
            run_id=run_id,
            agent_id="operator",
            kind=EventKind.INTERRUPT,
            payload={"reason": "operator"},
            timestamp=self._clock(),
        )
        self.store.append_event(run_id, event)
        self.gateway.void_for_run(run_id)
        snapshot = self.snapshot(run_id)
        snapshot["status"] = RunStatus.INTERRUPTED.value
        snapshot["pending"] = None
        snapshot["updated_at"] = self._clock()
        snapshot["last_seq"] = event.seq
        self.store.write_state(run_id, snapshot)

    # -- replay ------------------------------------------------------------------------

    def replay(self, run_id: str) -> ReplayReport:
        snapshot = self.snapshot(run_id)
        loaded = load_document(
            snapshot["document"],
            base_dir=snapshot.get("base_dir", "."),
            engine_override=snapshot.get("engine_override"),
        )
        events = self.store.read_events(run_id)
        return replay_events(events, loaded.topology, loaded.engines, loaded.registry, loaded.limits)
