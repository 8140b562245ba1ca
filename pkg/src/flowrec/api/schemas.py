"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class SessionCreateRequest(BaseModel):
    goal: str = ""


class SessionCreateResponse(BaseModel):
    session_id: str


class EdgeOut(BaseModel):
    source: str
    sink: str


class ServiceOut(BaseModel):
    id: str
    name: str


class SessionStateResponse(BaseModel):
    session_id: str
    goal: str
    services: list[ServiceOut]
    edges: list[EdgeOut]


class AddServiceRequest(BaseModel):
    service_id: str
    source_id: str | None = None


class RecommendRequest(BaseModel):
    anchor_id: str
    k: int = Field(default=5, ge=1)


class Candidate(BaseModel):
    service_id: str
    name: str
    probability: float


class RecommendResponse(BaseModel):
    anchor_id: str
    k: int
    candidates: list[Candidate]


class HealthResponse(BaseModel):
    status: str
    model_fingerprint: str
    services: int
