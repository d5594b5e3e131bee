"""Local HTTP + JSON API over guidance sessions.

Endpoints:
    POST /models                     load a model document -> model id
    GET  /models                     list loaded models
    POST /models/{id}/sessions       open a session -> session id
    GET  /sessions/{id}/options      suggestions + can-finish marker
    POST /sessions/{id}/step         {"label":..,"params":[..],"combined":..}
    POST /sessions/{id}/undo
    GET  /sessions/{id}/script       the accumulated proof script
    GET  /models/{id}/graph          ?format=dot | adjacency JSON

Errors are JSON objects {"error": ..., "available": [...]} with explicit
status codes. Sessions are in-memory and expire after an idle TTL.
"""

from __future__ import annotations

import threading
import time
import uuid
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse

from .efsm import Efsm, ModelError, export_dot, import_json
from .guidance import DEFAULT_SESSION_TTL, GuidanceError, GuidanceSession, open_session
from .traces import ParamVector, TraceError


def _error(status: int, message: str, available: list[str] | None = None) -> JSONResponse:
    return JSONResponse(
        status_code=status,
        content={"error": message, "available": available or []},
    )


def model_summary(model_id: str, model: Efsm) -> dict:
    return {
        "modelId": model_id,
        "states": len(model.states),
        "transitions": len(model.transitions),
        "accepting": sorted(model.accepting),
        "initial": model.initial,
        "hasGuards": model.guards is not None,
    }


def graph_adjacency(model: Efsm) -> dict:
    return {
        "states": [
            {
                "id": s,
                "accepting": s in model.accepting,
                "initial": s == model.initial,
            }
            for s in sorted(model.states)
        ],
        "edges": [
            {
                "source": t.source,
                "target": t.target,
                "label": t.label,
                "witnesses": [
                    {"params": list(v.params), "combined": v.combined,
                     "count": t.witnesses[v]}
                    for v in t.ranked_witnesses()
                ],
            }
            for t in sorted(model.transitions, key=lambda t: (t.source, t.label, t.target))
        ],
    }


def _suggestion_doc(suggestion) -> dict:
    return {
        "label": suggestion.label,
        "displayName": suggestion.display_name,
        "parameterCandidates": [
            {"params": list(v.params), "combined": v.combined}
            for v in suggestion.parameter_candidates
        ],
        "combinedHint": suggestion.combined_hint,
        "leadsToAccepting": suggestion.leads_to_accepting,
    }


def _session_state(session: GuidanceSession) -> dict:
    return {
        "sessionId": session.id,
        "cursor": session.cursor,
        "accepting": session.can_finish,
        "historyLength": len(session.history),
        "warnings": session.last_warnings,
    }


class _Stores:
    def __init__(self, ttl: float, clock: Callable[[], float]):
        self.ttl = ttl
        self.clock = clock
        self.lock = threading.Lock()
        self.models: dict[str, Efsm] = {}
        self.sessions: dict[str, GuidanceSession] = {}
        self.last_access: dict[str, float] = {}

    def expire_idle(self) -> None:
        now = self.clock()
        stale = [sid for sid, ts in self.last_access.items() if now - ts > self.ttl]
        for sid in stale:
            self.sessions.pop(sid, None)
            self.last_access.pop(sid, None)

    def add_model(self, model: Efsm) -> str:
        model_id = uuid.uuid4().hex[:12]
        with self.lock:
            self.models[model_id] = model
        return model_id

    def get_session(self, session_id: str) -> GuidanceSession | None:
        with self.lock:
            self.expire_idle()
            session = self.sessions.get(session_id)
            if session is not None:
                self.last_access[session_id] = self.clock()
            return session


def create_app(
    initial_model: Efsm | None = None,
    ttl: float = DEFAULT_SESSION_TTL,
    clock: Callable[[], float] = time.monotonic,
) -> FastAPI:
    app = FastAPI(title="proofminer guidance service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    stores = _Stores(ttl, clock)
    app.state.stores = stores
    if initial_model is not None:
        stores.add_model(initial_model)

    @app.get("/models")
    def list_models():
        with stores.lock:
            return {
                "models": [
                    model_summary(mid, m) for mid, m in sorted(stores.models.items())
                ]
            }

    @app.post("/models", status_code=201)
    async def load_model(request: Request):
        body = await request.body()
        try:
            model = import_json(body)
        except (ModelError, TraceError) as exc:
            return _error(400, f"model rejected: {exc}")
        model_id = stores.add_model(model)
        return model_summary(model_id, stores.models[model_id])

    @app.get("/models/{model_id}")
    def get_model(model_id: str):
        model = stores.models.get(model_id)
        if model is None:
            return _error(404, f"unknown model {model_id}")
        return model_summary(model_id, model)

    @app.get("/models/{model_id}/graph")
    def get_graph(model_id: str, format: str = "adjacency"):
        model = stores.models.get(model_id)
        if model is None:
            return _error(404, f"unknown model {model_id}")
        if format == "dot":
            return PlainTextResponse(export_dot(model))
        if format == "adjacency":
            return graph_adjacency(model)
        return _error(400, f"unknown graph format {format!r}", ["adjacency", "dot"])

    @app.post("/models/{model_id}/sessions", status_code=201)
    def create_session(model_id: str):
        model = stores.models.get(model_id)
        if model is None:
            return _error(404, f"unknown model {model_id}")
        try:
            session = open_session(model)
        except GuidanceError as exc:
            return _error(400, str(exc))
        with stores.lock:
            stores.sessions[session.id] = session
            stores.last_access[session.id] = stores.clock()
        return _session_state(session)

    @app.get("/sessions/{session_id}/options")
    def get_options(session_id: str):
        session = stores.get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id}")
        with session.lock:
            return {
                "suggestions": [_suggestion_doc(s) for s in session.options()],
                "canFinish": session.can_finish,
                "cursor": session.cursor,
            }

    @app.post("/sessions/{session_id}/step")
    async def post_step(session_id: str, request: Request):
        session = stores.get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id}")
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body must be JSON")
        label = body.get("label")
        params = body.get("params", [])
        combined = bool(body.get("combined", False))
        if not isinstance(label, str) or not isinstance(params, list):
            return _error(400, "step body needs a label string and a params list")
        try:
            values = ParamVector(tuple(str(p) for p in params), combined)
        except TraceError as exc:
            return _error(400, str(exc))
        with session.lock:
            try:
                session.step(label, values)
            except GuidanceError as exc:
                return _error(400, str(exc), available=exc.available)
            return _session_state(session)

    @app.post("/sessions/{session_id}/undo")
    def post_undo(session_id: str):
        session = stores.get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id}")
        with session.lock:
            try:
                session.undo()
            except GuidanceError as exc:
                return _error(400, str(exc))
            return _session_state(session)

    @app.get("/sessions/{session_id}/script")
    def get_script(session_id: str):
        session = stores.get_session(session_id)
        if session is None:
            return _error(404, f"unknown session {session_id}")
        with session.lock:
            return {"script": session.render_script(),
                    "accepting": session.can_finish}

    return app
