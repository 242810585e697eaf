"""Command-line interface.

All audit state lives in a single JSON file selected with --state.
Exit codes: 0 = all contests accepted/complete, 2 = escalation still
open, 1 = error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .election import load_manifest
from .orchestrator import (
    AUDITING,
    AuditError,
    AuditState,
    canonical_json,
    close_round,
    draw_additional,
    export_bytes,
    load_config,
    plan_report,
    record_interpretations,
    replay_audit_record,
    selections_report,
    start_audit,
    status_report,
)
from .planner import project_workload
from .orchestrator import _contest_view  # CLI-only workload projection
from .bayes import derive_generator
from .prng import AuditSeed, global_ballot_order


def _load_state(path: str) -> AuditState:
    return AuditState.from_json(json.loads(Path(path).read_text()))


def _save_state(state: AuditState, path: str):
    Path(path).write_text(json.dumps(state.to_json(), indent=2) + "\n")


def _emit(obj):
    json.dump(obj, sys.stdout, indent=2)
    sys.stdout.write("\n")


def _exit_code(state: AuditState) -> int:
    open_contests = [c for c, s in state.status.items() if s == AUDITING]
    return 2 if open_contests else 0


def cmd_seed(args) -> int:
    seed = AuditSeed(args.digits, args.provenance)
    doc = {"digits": seed.digits, "provenance": seed.provenance}
    if args.out:
        Path(args.out).write_text(json.dumps(doc, indent=2) + "\n")
    _emit(doc)
    return 0


def cmd_init(args) -> int:
    config_doc = json.loads(Path(args.config).read_text())
    if args.seed:
        config_doc["seed"] = {"digits": args.seed, "provenance": args.seed_provenance}
    config = load_config(config_doc, base_dir=Path(args.config).parent)
    state = start_audit(config)
    _save_state(state, args.state)
    _emit(selections_report(state))
    return 2


def cmd_select(args) -> int:
    state = _load_state(args.state)
    _emit(selections_report(state))
    return _exit_code(state)


def cmd_record(args) -> int:
    state = _load_state(args.state)
    doc = json.loads(Path(args.entries).read_text())
    entries = doc["entries"] if isinstance(doc, dict) else doc
    record_interpretations(state, entries)
    _save_state(state, args.state)
    _emit({"recorded": len(entries), "open": len(state.open_selections())})
    return 0


def cmd_round_close(args) -> int:
    state = _load_state(args.state)
    decisions = close_round(state)
    _save_state(state, args.state)
    _emit({"decisions": decisions, "status": dict(state.status)})
    return _exit_code(state)


def cmd_status(args) -> int:
    state = _load_state(args.state)
    _emit(status_report(state))
    return _exit_code(state)


def cmd_export(args) -> int:
    state = _load_state(args.state)
    data = export_bytes(state)
    if args.out:
        Path(args.out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
    return 0


def cmd_replay(args) -> int:
    bundle = json.loads(Path(args.bundle).read_text())
    report = replay_audit_record(bundle)
    _emit(report)
    return 0 if report["ok"] else 1


def cmd_draw(args) -> int:
    state = _load_state(args.state)
    before = len(state.replay_log)
    selections = draw_additional(state, args.contest, args.count)
    _save_state(state, args.state)
    log_path = args.log or args.state + ".replay.jsonl"
    with open(log_path, "a") as f:
        for event in state.replay_log[before:]:
            f.write(canonical_json(event) + "\n")
    _emit({"selections": selections})
    return 0


def cmd_order(args) -> int:
    seed = AuditSeed(args.seed)
    manifests = [load_manifest(path) for path in args.manifests]
    _emit({"order": global_ballot_order(manifests, seed)})
    return 0


def cmd_plan(args) -> int:
    state = _load_state(args.state)
    if args.contest:
        contest = state.config.contest(args.contest)
        view = _contest_view(state, contest)
        if args.risk_limit is not None:
            view = type(view)(view.contest, args.risk_limit, view.strata)
        sizes = [int(s) for s in args.grid.split(",")] if args.grid else None
        if not sizes:
            current = view.sample_size()
            sizes = sorted({min(view.population(), max(current, int(current * g)))
                            for g in (1.0, 1.3, 1.69, 2.2)})
        rng = derive_generator(state.seed.digits, "plan-cli", args.contest)
        projection = project_workload(view, sizes, args.inner_reps, rng)
        _emit(projection.to_json())
        return 0
    _emit(plan_report(state, confidence=args.confidence))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    host, _, port = args.bind.partition(":")
    ui = args.ui
    if ui is None and Path("frontend/dist/index.html").exists():
        ui = "frontend/dist"
    app = create_app(args.state, operator_token=args.operator_token, frontend_dir=ui)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8400))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="audit", description="Bayesian tabulation audit engine"
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("seed", help="record a ceremony seed")
    p.add_argument("digits", help="decimal seed digits (20+ recommended)")
    p.add_argument("--provenance", default="", help="how the seed was produced")
    p.add_argument("--out", help="write the seed record to this file")
    p.set_defaults(func=cmd_seed)

    p = sub.add_parser("init", help="validate config and draw the first sample")
    p.add_argument("config")
    p.add_argument("--state", required=True)
    p.add_argument("--seed", help="ceremony seed digits (overrides config)")
    p.add_argument("--seed-provenance", default="")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("select", help="print the open pull list")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("record", help="record hand interpretations")
    p.add_argument("entries", help="JSON file with {entries: [...]}")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_record)

    p = sub.add_parser("round-close", help="measure risk and decide per contest")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_round_close)

    p = sub.add_parser("status", help="per-contest status summary")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_status)

    p = sub.add_parser("export", help="export the public audit record")
    p.add_argument("--state", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("replay", help="verify an exported audit record")
    p.add_argument("bundle")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("draw", help="manually draw extra ballots for a contest")
    p.add_argument("--contest", required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--log", help="replay log JSONL (default: <state>.replay.jsonl)")
    p.set_defaults(func=cmd_draw)

    p = sub.add_parser("order", help="print the global ballot order for a seed")
    p.add_argument("--seed", required=True)
    p.add_argument("manifests", nargs="+")
    p.set_defaults(func=cmd_order)

    p = sub.add_parser("plan", help="workload projection / allocation plan")
    p.add_argument("--state", required=True)
    p.add_argument("--contest", help="project workload for one contest")
    p.add_argument("--grid", help="comma-separated future sample sizes")
    p.add_argument("--risk-limit", type=float)
    p.add_argument("--confidence", type=float, default=0.9)
    p.add_argument("--inner-reps", type=int, default=20)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("serve", help="serve the HTTP API over a state file")
    p.add_argument("--state", required=True)
    p.add_argument("--bind", default="127.0.0.1:8400")
    p.add_argument("--operator-token")
    p.add_argument("--ui", help="static dashboard directory (default: frontend/dist if present)")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (AuditError, ValueError, FileNotFoundError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
