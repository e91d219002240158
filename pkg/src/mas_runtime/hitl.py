"""Approval queue for human-in-the-loop checkpoints.

Requests are created when a run suspends at a blocking checkpoint and hold
the full pending action so a reviewer can judge it. Intake is strictly
idempotent per request id; requests belonging to interrupted runs are voided
rather than left dangling.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Any

from .errors import DecisionAlreadyRecorded, UnknownRequest
from .model import CheckpointLocation


@dataclass
class ApprovalRequest:
    request_id: str
    run_id: str
    agent_id: str
    location: CheckpointLocation
    pending: dict[str, Any]
    created_at: int
    state: str = "open"  # open | decided | voided
    decision: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "request_id": self.request_id,
            "run_id": self.run_id,
            "agent_id": self.agent_id,
            "location": self.location.value,
            "pending": self.pending,
            "created_at": self.created_at,
            "state": self.state,
            "decision": self.decision,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ApprovalRequest":
        return cls(
            request_id=data["request_id"],
            run_id=data["run_id"],
            agent_id=data["agent_id"],
            location=CheckpointLocation(data["location"]),
            pending=dict(data["pending"]),
            created_at=data["created_at"],
            state=data.get("state", "open"),
            decision=data.get("decision"),
        )


class ApprovalGateway:
    """In-memory queue of approval requests, serialised per request."""

    def __init__(self):
        self._requests: dict[str, ApprovalRequest] = {}
        self._lock = threading.Lock()

    def register(self, request: ApprovalRequest) -> None:
        with self._lock:
            self._requests[request.request_id] = request

    def get(self, request_id: str) -> ApprovalRequest:
        with self._lock:
            if request_id not in self._requests:
                raise UnknownRequest(f"no approval request {request_id!r}")
            return self._requests[request_id]

    def list_open(self) -> list[ApprovalRequest]:
        with self._lock:
            open_requests = [r for r in self._requests.values() if r.state == "open"]
        return sorted(open_requests, key=lambda r: (r.created_at, r.request_id))

    def claim(self, request_id: str) -> ApprovalRequest:
        """Validate that a decision may be taken for the request.

        Voided requests answer UnknownRequest: the run they belonged to is
        gone, so the id no longer names anything decidable.
        """
        with self._lock:
            request = self._requests.get(request_id)
            if request is None or request.state == "voided":
                raise UnknownRequest(f"no open approval request {request_id!r}")
            if request.state == "decided":
                raise DecisionAlreadyRecorded(f"request {request_id!r} already decided")
            return request

    def mark_decided(self, request_id: str, decision: dict[str, Any]) -> None:
        with self._lock:
            request = self._requests.get(request_id)
            if request is None:
                raise UnknownRequest(f"no approval request {request_id!r}")
            if request.state == "decided":
                raise DecisionAlreadyRecorded(f"request {request_id!r} already decided")
            request.state = "decided"
            request.decision = dict(decision)

    def void_for_run(self, run_id: str) -> list[str]:
        """Void every open request of a run; returns the voided ids."""
        voided = []
        with self._lock:
            for request in self._requests.values():
                if request.run_id == run_id and request.state == "open":
                    request.state = "voided"
                    voided.append(request.request_id)
        return voided
