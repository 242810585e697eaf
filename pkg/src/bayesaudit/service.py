"""Thin HTTP layer over the orchestrator.

Every endpoint is a facade over one orchestrator operation; the service
computes no statistics of its own, so dashboards and independent
observers see exactly what the CLI sees.  Long-running computations
(round close, planning) return a job id to poll, and the state file is
swapped atomically when the job completes.

Reads are open.  Mutations require the configured operator token in the
``X-Operator-Token`` header; with no token configured the service is
read-only.  State lives solely in the orchestrator's JSON file, so the
service is stateless across restarts (pending job results excepted).
"""

from __future__ import annotations

import json
import threading
import uuid
from pathlib import Path

from fastapi import Body, FastAPI, Header, HTTPException, Response

from .orchestrator import (
    AuditError,
    AuditState,
    close_round,
    export_bytes,
    plan_report,
    record_interpretations,
    selections_report,
    status_report,
)


def create_app(state_path: str, operator_token: str | None = None,
               frontend_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="bayesaudit", docs_url="/docs")
    state_file = Path(state_path)
    write_lock = threading.Lock()
    jobs: dict[str, dict] = {}

    def load() -> AuditState:
        try:
            return AuditState.from_json(json.loads(state_file.read_text()))
        except FileNotFoundError:
            raise HTTPException(status_code=503, detail="audit state file not found")

    def save(state: AuditState):
        tmp = state_file.with_suffix(state_file.suffix + ".tmp")
        tmp.write_text(json.dumps(state.to_json(), indent=2) + "\n")
        tmp.replace(state_file)

    def require_operator(token: str | None):
        if operator_token is None or token != operator_token:
            raise HTTPException(status_code=403, detail="operator token required")

    def structured(exc: Exception) -> HTTPException:
        return HTTPException(
            status_code=400,
            detail={"type": type(exc).__name__, "message": str(exc)},
        )

    def run_job(worker) -> str:
        job_id = uuid.uuid4().hex
        jobs[job_id] = {"status": "pending"}

        def body():
            try:
                result = worker()
                jobs[job_id] = {"status": "done", "result": result}
            except Exception as exc:  # surfaced to the poller
                jobs[job_id] = {
                    "status": "failed",
                    "error": {"type": type(exc).__name__, "message": str(exc)},
                }

        threading.Thread(target=body, daemon=True).start()
        return job_id

    @app.get("/status")
    def get_status():
        return status_report(load())

    @app.get("/selections")
    def get_selections():
        # open pull list only; reported CVR choices are never included
        return selections_report(load())

    @app.post("/interpretations")
    def post_interpretations(
        payload: dict = Body(...),
        x_operator_token: str | None = Header(default=None),
    ):
        require_operator(x_operator_token)
        entries = payload.get("entries", [])
        with write_lock:
            state = load()
            try:
                record_interpretations(state, entries)
            except (AuditError, ValueError) as exc:
                raise structured(exc)
            save(state)
            return {"recorded": len(entries), "open": len(state.open_selections())}

    @app.post("/round/close")
    def post_round_close(x_operator_token: str | None = Header(default=None)):
        require_operator(x_operator_token)

        def worker():
            with write_lock:
                state = load()
                decisions = close_round(state)
                save(state)
                return {"decisions": decisions, "status": dict(state.status)}

        return {"jobId": run_job(worker)}

    @app.post("/plan")
    def post_plan(
        payload: dict = Body(default={}),
        x_operator_token: str | None = Header(default=None),
    ):
        require_operator(x_operator_token)
        confidence = float(payload.get("confidence", 0.9))

        def worker():
            return plan_report(load(), confidence=confidence)

        return {"jobId": run_job(worker)}

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        return job

    @app.get("/export")
    def get_export():
        # byte-for-byte identical to `audit export`
        return Response(content=export_bytes(load()), media_type="application/json")

    if frontend_dir and Path(frontend_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=frontend_dir, html=True), name="ui")

    return app
