"""Local HTTP service exposing one repair session to the browser UI.

One process serves one session over a small JSON API.  Session-mutating
requests are serialized behind a lock; reads take the same lock briefly
so every response reflects a consistent session snapshot.  All error
bodies have the shape {"error": string}.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from gramata.examples import ContradictionError
from gramata.grammar import Grammar, serialize_grammar
from gramata.session import RepairSession, SessionError


class AnswerBody(BaseModel):
    choice: int


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


def create_app(
    grammar: Grammar,
    intersect_mode: str = "default",
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="gramata", docs_url=None, redoc_url=None)
    state = {"session": RepairSession(grammar, intersect_mode=intersect_mode)}
    lock = threading.Lock()

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(request, exc):
        return _error(exc.status_code, str(exc.detail))

    @app.exception_handler(RequestValidationError)
    async def _bad_request(request, exc):
        return _error(400, "invalid request body")

    def _session_view() -> dict:
        s = state["session"]
        return {
            "round": s.round,
            "verdict": s.verdict,
            "pending": len(s.pending),
            "history": list(s.history),
            "residual_conflicts": len(s.conflicts),
            "notes": list(s.notes),
        }

    @app.get("/api/session")
    def get_session() -> dict:
        with lock:
            return _session_view()

    @app.get("/api/prompts/next")
    def next_prompt():
        with lock:
            p = state["session"].next_prompt()
            if p is None:
                return _error(404, "no pending prompt")
            return p.to_json()

    @app.post("/api/prompts/{prompt_id}/answer")
    def answer(prompt_id: int, body: AnswerBody):
        with lock:
            try:
                state["session"].answer(prompt_id, body.choice)
            except ContradictionError as exc:
                return _error(409, str(exc))
            except SessionError as exc:
                return _error(409, str(exc))
            return _session_view()

    @app.post("/api/step")
    def step():
        with lock:
            try:
                state["session"].step()
            except SessionError as exc:
                return _error(409, str(exc))
            return _session_view()

    @app.get("/api/grammar/current")
    def current_grammar() -> PlainTextResponse:
        with lock:
            text = serialize_grammar(state["session"].current)
        return PlainTextResponse(text)

    @app.get("/api/report")
    def report() -> dict:
        with lock:
            return state["session"].report().to_json()

    @app.post("/api/reset")
    def reset() -> dict:
        with lock:
            state["session"] = RepairSession(
                grammar, intersect_mode=intersect_mode
            )
            return _session_view()

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
