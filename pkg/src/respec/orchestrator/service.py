"""HTTP review API: session listing, detail, decisions, and event streams.

JSON-over-HTTP with an explicit schema_version in every payload; the event
stream is server-sent events so the browser console updates without
polling. Review writes are serialized per session.
"""

from __future__ import annotations

import asyncio
import json
import threading
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel, Field

from respec import SCHEMA_VERSION
from respec.config import RespecConfig
from respec.core.model import bug_case_from_json
from respec.orchestrator.engine import PipelineContext, SessionRunner
from respec.orchestrator.session import (
    ReviewAction,
    ReviewDecision,
    ReviewSubject,
    SessionState,
    WrongState,
    replay_events,
)
from respec.orchestrator.store import SessionStore
from respec.runner import build_context


class ReviewPayload(BaseModel):
    schema_version: int = Field(default=SCHEMA_VERSION)
    subject: str
    action: str
    reviewer: str = "anonymous"
    text: str = ""


class ReviewService:
    def __init__(self, store_root: str | Path, config: RespecConfig):
        self.config = config
        self.context: PipelineContext = build_context(config, store_root)
        self.store: SessionStore = self.context.store
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    def _lock(self, case_id: str) -> threading.Lock:
        with self._locks_guard:
            if case_id not in self._locks:
                self._locks[case_id] = threading.Lock()
            return self._locks[case_id]

    def _view(self, case_id: str):
        if not self.store.has_session(case_id):
            raise HTTPException(status_code=404, detail=f"unknown session {case_id}")
        return replay_events(case_id, self.store.read_events(case_id))

    def _runner(self, case_id: str) -> SessionRunner:
        case = bug_case_from_json(self.store.get_case(case_id))
        return self.context.make_runner(case)

    def _artifact(self, case_id: str, artifact_id: str):
        return self.store.get_artifact(case_id, artifact_id)

    def session_summary(self, case_id: str) -> dict:
        view = self._view(case_id)
        case_doc = self.store.get_case(case_id)
        summary = {}
        if "review-summary" in view.artifacts:
            summary = self._artifact(case_id, view.artifacts["review-summary"])
        category = None
        for event in view.events:
            if event["type"] == "transition" and event["data"].get("category"):
                category = event["data"]["category"]
        return {
            "case_id": case_id,
            "state": view.state.value,
            "closed_outcome": view.closed_outcome.value if view.closed_outcome else None,
            "category": category or (case_doc.get("category")),
            "needs_review": view.state is SessionState.AWAITING_REVIEW,
            "plausible_patch_id": summary.get("plausible_patch_id"),
            "overfit_suspected": bool(summary.get("overfit_suspected")),
            "event_count": len(view.events),
        }

    def session_detail(self, case_id: str) -> dict:
        view = self._view(case_id)
        case_doc = self.store.get_case(case_id)
        spec_history = []
        for label in sorted(
            (l for l in view.artifacts if l.startswith("spec-attempt-")),
            key=lambda l: int(l.rsplit("-", 1)[1]),
        ):
            spec_history.append(self._artifact(case_id, view.artifacts[label]))
        spec_final = None
        if "spec-final" in view.artifacts:
            spec_final = self._artifact(case_id, view.artifacts["spec-final"])
        candidates = []
        for label in sorted(view.artifacts):
            if not label.startswith("candidate-"):
                continue
            patch_id = label[len("candidate-"):]
            candidate = self._artifact(case_id, view.artifacts[label])
            verdict_label = f"verdict-{patch_id}"
            verdict = (
                self._artifact(case_id, view.artifacts[verdict_label])
                if verdict_label in view.artifacts
                else None
            )
            candidates.append({"candidate": candidate, "verdict": verdict})
        detail = self.session_summary(case_id)
        detail.update(
            {
                "report_text": case_doc.get("report_text", ""),
                "spec_history": spec_history,
                "spec_final": spec_final,
                "candidates": candidates,
                "events": view.events,
                "decisions": view.decisions,
            }
        )
        return detail

    def submit_review(self, case_id: str, payload: ReviewPayload) -> dict:
        try:
            subject = ReviewSubject(payload.subject)
            action = ReviewAction(payload.action)
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        try:
            decision = ReviewDecision(
                session_id=case_id,
                subject=subject,
                action=action,
                reviewer=payload.reviewer,
                new_text=payload.text,
            )
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        with self._lock(case_id):
            runner = self._runner(case_id)
            try:
                state = runner.submit_review(decision)
            except WrongState as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            except ValueError as exc:
                raise HTTPException(status_code=422, detail=str(exc)) from exc
        return {"schema_version": SCHEMA_VERSION, "case_id": case_id, "state": state.value}


def create_app(store_root: str | Path, config: RespecConfig | None = None) -> FastAPI:
    service = ReviewService(store_root, config or RespecConfig())
    app = FastAPI(title="respec review console API")
    app.state.service = service

    @app.get("/sessions")
    def list_sessions():
        sessions = [service.session_summary(cid) for cid in service.store.list_sessions()]
        return JSONResponse(
            {"schema_version": SCHEMA_VERSION, "sessions": sessions},
            headers={"X-Schema-Version": str(SCHEMA_VERSION)},
        )

    @app.get("/sessions/{case_id}")
    def session_detail(case_id: str):
        detail = service.session_detail(case_id)
        detail["schema_version"] = SCHEMA_VERSION
        return JSONResponse(detail, headers={"X-Schema-Version": str(SCHEMA_VERSION)})

    @app.post("/sessions/{case_id}/review")
    def post_review(case_id: str, payload: ReviewPayload):
        service._view(case_id)  # 404 before validation errors
        return JSONResponse(
            service.submit_review(case_id, payload),
            headers={"X-Schema-Version": str(SCHEMA_VERSION)},
        )

    @app.get("/sessions/{case_id}/events")
    async def event_stream(case_id: str, follow: bool = True):
        """Replays the event log as SSE, then (with follow) tails new events
        until the session closes. follow=false stops after the replay."""
        service._view(case_id)  # 404 on unknown session

        async def generate():
            sent = 0
            while True:
                events = service.store.read_events(case_id)
                fresh = events[sent:]
                for event in fresh:
                    body = json.dumps(event, sort_keys=True, ensure_ascii=False)
                    yield f"id: {event['seq']}\nevent: session\ndata: {body}\n\n"
                sent += len(fresh)
                closed = any(
                    e.get("type") == "transition" and e.get("to") == SessionState.CLOSED.value
                    for e in events
                )
                if closed or not follow:
                    return
                await asyncio.sleep(0.15)

        return StreamingResponse(
            generate(),
            media_type="text/event-stream",
            headers={
                "Cache-Control": "no-cache",
                "X-Schema-Version": str(SCHEMA_VERSION),
            },
        )

    return app
