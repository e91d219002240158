"""HTTP surface over the run manager: lifecycle, event pages, SSE, approvals.

Everything the API serves is read back from the persisted log and snapshots,
so a restarted process answers identically for completed work and suspended
runs stay resumable.
"""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .documents import DocumentError
from .errors import (
    AlreadyTerminal,
    DecisionAlreadyRecorded,
    MasError,
    NotAwaiting,
    TopologyInvalid,
    UnknownRequest,
    UnknownRun,
)
from .events import encode_event
from .runtime import RunManager

DEFAULT_BIND = "127.0.0.1:7411"


class RunRequest(BaseModel):
    topology_name: Optional[str] = None
    topology: Optional[dict] = None
    query: str = ""
    limits: Optional[dict] = None
    engine: Optional[str] = None


class DecisionBody(BaseModel):
    decision: str
    reason: Optional[str] = None
    text: Optional[str] = None


def resolve_named_topology(name: str, data_dir: str | Path) -> tuple[dict, str]:
    """Look up a named topology: data-dir ``topologies/`` first, then the
    packaged case-study fixtures."""
    candidate = Path(data_dir) / "topologies" / f"{name}.json"
    if candidate.exists():
        return json.loads(candidate.read_text(encoding="utf-8")), str(candidate.parent)
    from .harness import fixture_dir  # local import: harness pulls in fixtures

    fixtures = fixture_dir(name)
    if fixtures is not None:
        doc_path = fixtures / "topology.json"
        if doc_path.exists():
            return json.loads(doc_path.read_text(encoding="utf-8")), str(fixtures)
    raise DocumentError(f"no topology named {name!r}")


def create_app(data_dir: str | Path) -> FastAPI:
    app = FastAPI(title="mas-runtime", version="0.1.0")
    # the operator console is served from its own origin at desk scale
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    manager = RunManager(data_dir)
    app.state.manager = manager
    app.state.data_dir = str(data_dir)

    @app.exception_handler(MasError)
    def _mas_error(_request: Request, exc: MasError):
        status = 400
        if isinstance(exc, (UnknownRun, UnknownRequest)):
            status = 404
        elif isinstance(exc, (DecisionAlreadyRecorded, AlreadyTerminal, NotAwaiting)):
            status = 409
        body: dict[str, Any] = {"error": type(exc).__name__, "detail": str(exc)}
        if isinstance(exc, TopologyInvalid):
            body["report"] = exc.report.to_dict()
        return JSONResponse(status_code=status, content=body)

    @app.post("/runs", status_code=202)
    def create_run(body: RunRequest):
        if bool(body.topology_name) == bool(body.topology is not None):
            return JSONResponse(
                status_code=400,
                content={"error": "BadRequest", "detail": "provide exactly one of topology_name or topology"},
            )
        if body.topology is not None:
            document, base_dir = body.topology, app.state.data_dir
        else:
            document, base_dir = resolve_named_topology(body.topology_name, app.state.data_dir)
        run_id = manager.create_run(
            document,
            body.query,
            base_dir=base_dir,
            engine_override=body.engine,
            limits_override=body.limits,
        )
        return {"run_id": run_id}

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        snapshot = manager.snapshot(run_id)
        outcome = manager.outcome(run_id)
        return {
            "run_id": run_id,
            "status": snapshot["status"],
            "answer": outcome.answer,
            "metrics": outcome.metrics,
            "last_seq": snapshot.get("last_seq", -1),
            "pending": snapshot.get("pending"),
        }

    @app.get("/runs")
    def list_runs():
        out = []
        for run_id in manager.store.list_runs():
            try:
                snapshot = manager.snapshot(run_id)
            except UnknownRun:
                continue
            out.append({"run_id": run_id, "status": snapshot["status"], "query": snapshot.get("query", "")})
        return {"runs": out}

    @app.get("/runs/{run_id}/events")
    def get_events(run_id: str, after: int = -1):
        events = manager.events(run_id, after)
        next_cursor = events[-1].seq if events else after
        return {"events": [e.to_dict() for e in events], "next": next_cursor}

    @app.get("/runs/{run_id}/events/stream")
    def stream_events(run_id: str, after: int = -1):
        if not manager.store.has_run(run_id):
            raise UnknownRun(f"no run {run_id!r}")

        def _feed():
            for event in manager.subscribe(run_id, after):
                yield f"id: {event.seq}\ndata: {encode_event(event)}\n\n"

        return StreamingResponse(_feed(), media_type="text/event-stream")

    @app.get("/approvals")
    def list_approvals():
        return {"approvals": [r.to_dict() for r in manager.list_open_requests()]}

    @app.post("/approvals/{request_id}/decision")
    def post_decision(request_id: str, body: DecisionBody):
        decision: dict[str, Any] = {"decision": body.decision}
        if body.reason is not None:
            decision["reason"] = body.reason
        if body.text is not None:
            decision["text"] = body.text
        status = manager.submit_decision(request_id, decision)
        return {"request_id": request_id, "run_status": status.value}

    @app.post("/runs/{run_id}/interrupt")
    def post_interrupt(run_id: str):
        status = manager.interrupt(run_id)
        return {"run_id": run_id, "status": status.value}

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    return app


def parse_bind(bind: str | None = None) -> tuple[str, int]:
    bind = bind or os.environ.get("MAS_BIND", DEFAULT_BIND)
    host, _, port = bind.rpartition(":")
    return host or "127.0.0.1", int(port)


def serve(data_dir: str | Path, bind: str | None = None) -> None:
    import uvicorn

    host, port = parse_bind(bind)
    uvicorn.run(create_app(data_dir), host=host, port=port, log_level="warning")
