"""Command-line entry point: validate, run, replay, serve, case."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .documents import DocumentError, load_document_file
from .errors import MasError
from .events import encode_event
from .harness import CASE_NAMES, run_case
from .model import RunStatus
from .runtime import RunManager
from .topology import validate_topology

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_PARSE = 2
EXIT_RUN_FAILED = 3


def _default_data_dir(value: str | None) -> str:
    return value or os.environ.get("MAS_DATA_DIR", "./mas-data")


def _limits_override(args) -> dict:
    out = {}
    if getattr(args, "max_steps", None) is not None:
        out["max_steps"] = args.max_steps
    if getattr(args, "hop_budget", None) is not None:
        out["hop_budget"] = args.hop_budget
    return out


def cmd_validate(args) -> int:
    try:
        loaded = load_document_file(args.path)
    except DocumentError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    report = validate_topology(loaded.topology)
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        for violation in report.violations:
            print(f"[{violation.severity}] {violation.rule}: {violation.message} ({violation.subject})")
        if report.ok:
            print("topology ok")
        elif report.passed:
            print("topology ok with warnings")
    return EXIT_OK if report.passed else EXIT_VIOLATIONS


def cmd_run(args) -> int:
    data_dir = _default_data_dir(args.data_dir)
    try:
        document = json.loads(Path(args.path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    manager = RunManager(data_dir)
    try:
        run_id = manager.create_run(
            document,
            args.query,
            base_dir=str(Path(args.path).parent),
            engine_override=None if args.engine == "scripted" else args.engine,
            limits_override=_limits_override(args),
            background=False,
        )
    except MasError as exc:
        print(f"run rejected: {exc}", file=sys.stderr)
        return EXIT_PARSE
    outcome = manager.outcome(run_id)
    if args.trace:
        for event in outcome.trace:
            print(encode_event(event))
    if args.format == "json":
        print(
            json.dumps(
                {
                    "run_id": run_id,
                    "status": outcome.status.value,
                    "answer": outcome.answer,
                    "metrics": outcome.metrics,
                    "events_path": str(manager.store.events_path(run_id)),
                },
                indent=2,
            )
        )
    else:
        print(f"run {run_id}: {outcome.status.value}")
        if outcome.answer is not None:
            print(outcome.answer)
        print(
            f"(decide_calls={outcome.metrics['decide_calls']} tool_calls={outcome.metrics['tool_calls']} "
            f"handoffs={outcome.metrics['handoffs']})"
        )
    if outcome.status is RunStatus.COMPLETED:
        return EXIT_OK
    if outcome.status is RunStatus.AWAITING_APPROVAL:
        print("run is awaiting approval; decide via the service API or console", file=sys.stderr)
        return EXIT_OK
    return EXIT_RUN_FAILED


def cmd_replay(args) -> int:
    log_path = Path(args.path)
    if not log_path.exists():
        print(f"no such log: {log_path}", file=sys.stderr)
        return EXIT_PARSE
    run_id = log_path.name[: -len(".jsonl")] if log_path.name.endswith(".jsonl") else log_path.stem
    manager = RunManager(log_path.parent)
    try:
        report = manager.replay(run_id)
    except MasError as exc:
        print(f"replay error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    elif report.ok:
        print(f"replay ok ({report.status.value})")
    else:
        if report.divergence:
            print(f"divergence at seq {report.divergence['seq']}")
            print(f"  expected: {json.dumps(report.divergence['expected'])}")
            print(f"  actual:   {json.dumps(report.divergence['actual'])}")
        if report.error:
            print(f"error: {report.error}")
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def cmd_serve(args) -> int:
    from .service import serve

    serve(_default_data_dir(args.data_dir), bind=args.bind)
    return EXIT_OK


def cmd_case(args) -> int:
    try:
        if args.name == "cs3" and not args.auto_approve:
            from .harness.cases import run_cs3

            report = run_cs3(
                data_dir=args.data_dir,
                auto_approve=False,
                engine_override=None if args.engine == "scripted" else args.engine,
            )
        else:
            report = run_case(
                args.name,
                data_dir=args.data_dir,
                engine_override=None if args.engine == "scripted" else args.engine,
            )
    except MasError as exc:
        print(f"case failed: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILED
    if args.format == "json":
        print(json.dumps(report.to_dict(), indent=2))
    else:
        print(report.render_table())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mas", description="Multi-agent orchestration runtime")
    sub = parser.add_subparsers(dest="command", required=True)

    validate = sub.add_parser("validate", help="validate a topology document")
    validate.add_argument("path")
    validate.add_argument("--format", choices=("text", "json"), default="text")
    validate.set_defaults(fn=cmd_validate)

    run = sub.add_parser("run", help="execute a query over a topology document")
    run.add_argument("path")
    run.add_argument("query")
    run.add_argument("--trace", action="store_true", help="print the labelled event log")
    run.add_argument("--format", choices=("text", "json"), default="text")
    run.add_argument("--data-dir")
    run.add_argument("--engine", choices=("scripted", "remote"), default="scripted")
    run.add_argument("--max-steps", type=int)
    run.add_argument("--hop-budget", type=int)
    run.set_defaults(fn=cmd_run)

    replay = sub.add_parser("replay", help="re-execute a recorded run log and verify it")
    replay.add_argument("path")
    replay.add_argument("--format", choices=("text", "json"), default="text")
    replay.set_defaults(fn=cmd_replay)

    serve = sub.add_parser("serve", help="start the HTTP run service")
    serve.add_argument("--bind", help="host:port (default MAS_BIND or 127.0.0.1:7411)")
    serve.add_argument("--data-dir")
    serve.set_defaults(fn=cmd_serve)

    case = sub.add_parser("case", help="run a case-study scenario")
    case.add_argument("name", choices=CASE_NAMES)
    case.add_argument("--format", choices=("text", "json"), default="text")
    case.add_argument("--data-dir")
    case.add_argument("--engine", choices=("scripted", "remote"), default="scripted")
    case.add_argument(
        "--no-auto-approve",
        dest="auto_approve",
        action="store_false",
        help="leave cs3 drafts suspended at final review instead of approving them",
    )
    case.set_defaults(fn=cmd_case, auto_approve=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
