"""FastAPI application factory wrapping a loaded model."""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from ..errors import UnknownServiceError
from ..goalvec import infer_goal_vector
from ..recommender import PartialWorkflow, recommend_next
from ..serialization import TrainedModel
from .schemas import (
    AddServiceRequest,
    Candidate,
    EdgeOut,
    HealthResponse,
    RecommendRequest,
    RecommendResponse,
    ServiceOut,
    SessionCreateRequest,
    SessionCreateResponse,
    SessionStateResponse,
)
from .sessions import CompositionConflict, Session, SessionNotFound, SessionStore


def create_app(
    model: TrainedModel,
    fingerprint: str = "",
    session_ttl: float = 3600.0,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="flowrec", version="0.1.0")
    store = SessionStore(ttl_seconds=session_ttl)
    vocabulary = set(model.params.vocabulary)

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"detail": exc.errors()})

    @app.exception_handler(SessionNotFound)
    async def not_found(request: Request, exc: SessionNotFound):
        return JSONResponse(status_code=404, content={"detail": str(exc.args[0])})

    @app.exception_handler(CompositionConflict)
    async def conflict(request: Request, exc: CompositionConflict):
        return JSONResponse(
            status_code=422, content={"detail": exc.detail, "cycle": exc.cycle}
        )

    @app.exception_handler(UnknownServiceError)
    async def unknown_service(request: Request, exc: UnknownServiceError):
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    def _state(session: Session) -> SessionStateResponse:
        services, edges = session.snapshot()
        return SessionStateResponse(
            session_id=session.id,
            goal=session.goal,
            services=[
                ServiceOut(id=sid, name=model.service_names.get(sid, sid))
                for sid in services
            ],
            edges=[EdgeOut(source=u, sink=v) for u, v in edges],
        )

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(
            status="ok",
            model_fingerprint=fingerprint,
            services=len(model.params.vocabulary),
        )

    @app.get("/services", response_model=list[ServiceOut])
    def services() -> list[ServiceOut]:
        return [
            ServiceOut(id=sid, name=model.service_names.get(sid, sid))
            for sid in model.params.vocabulary
        ]

    @app.post("/sessions", response_model=SessionCreateResponse)
    def create_session(body: SessionCreateRequest) -> SessionCreateResponse:
        # goal vector computed once per session; recomputed only on goal change
        goal_vector = (
            infer_goal_vector(model.goal_embedder, body.goal)
            if body.goal.strip()
            else np.zeros(model.params.d)
        )
        session = store.create(goal=body.goal, goal_vector=goal_vector)
        return SessionCreateResponse(session_id=session.id)

    @app.get("/sessions/{session_id}", response_model=SessionStateResponse)
    def get_session(session_id: str) -> SessionStateResponse:
        return _state(store.get(session_id))

    @app.post("/sessions/{session_id}/services", response_model=SessionStateResponse)
    def add_service(session_id: str, body: AddServiceRequest) -> SessionStateResponse:
        session = store.get(session_id)
        if body.service_id not in vocabulary:
            raise UnknownServiceError(f"unknown service '{body.service_id}'")
        session.add(body.service_id, body.source_id)
        return _state(session)

    @app.post("/sessions/{session_id}/recommend", response_model=RecommendResponse)
    def recommend(session_id: str, body: RecommendRequest) -> RecommendResponse:
        session = store.get(session_id)
        services, edges = session.snapshot()
        if body.anchor_id not in services:
            raise UnknownServiceError(
                f"anchor '{body.anchor_id}' is not part of the session workflow"
            )
        pw = PartialWorkflow(services=services, edges=edges, goal=session.goal)
        rec = recommend_next(
            model, pw, body.anchor_id, body.k, goal_vector=session.goal_vector
        )
        return RecommendResponse(
            anchor_id=body.anchor_id,
            k=body.k,
            candidates=[
                Candidate(
                    service_id=sid,
                    name=model.service_names.get(sid, sid),
                    probability=prob,
                )
                for sid, prob in rec.candidates
            ],
        )

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
