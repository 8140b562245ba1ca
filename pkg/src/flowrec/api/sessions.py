"""In-memory composition sessions with TTL eviction.

Each session holds one workflow under construction. Mutations are
serialized per session so a concurrent recommend never observes a
half-applied change; the model itself is immutable and shared.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field

import numpy as np

from ..provenance import find_cycle


class SessionNotFound(KeyError):
    pass


class CompositionConflict(ValueError):
    """The mutation would violate a session DAG invariant (cycle/duplicate)."""

    def __init__(self, detail: str, cycle: list[str] | None = None):
        super().__init__(detail)
        self.detail = detail
        self.cycle = cycle or []


@dataclass
class Session:
    id: str
    goal: str
    goal_vector: np.ndarray
    created_at: float
    touched_at: float
    services: list[str] = field(default_factory=list)
    edges: list[tuple[str, str]] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def snapshot(self) -> tuple[tuple[str, ...], tuple[tuple[str, str], ...]]:
        with self.lock:
            return tuple(self.services), tuple(self.edges)

    def add(self, service_id: str, source_id: str | None) -> None:
        """Add a node, or an edge when the node already exists.

        Raises CompositionConflict for duplicate nodes/edges and for edges
        that would close a directed cycle.
        """
        with self.lock:
            exists = service_id in self.services
            if source_id is None:
                if exists:
                    raise CompositionConflict(f"service '{service_id}' is already composed")
                self.services.append(service_id)
                return
            if source_id not in self.services:
                raise SessionNotFound(f"source service '{source_id}' is not composed")
            edge = (source_id, service_id)
            if edge in self.edges:
                raise CompositionConflict(f"edge {source_id} -> {service_id} already exists")
            candidate_services = self.services if exists else self.services + [service_id]
            cycle = find_cycle(list(candidate_services), self.edges + [edge])
            if cycle is not None:
                raise CompositionConflict(
                    f"edge would close a cycle: [{','.join(cycle)}]", cycle=cycle
                )
            if not exists:
                self.services.append(service_id)
            self.edges.append(edge)


class SessionStore:
    """Thread-safe registry of sessions with idle-TTL eviction."""

    def __init__(self, ttl_seconds: float = 3600.0, clock=time.monotonic):
        self._ttl = ttl_seconds
        self._clock = clock
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, goal: str, goal_vector: np.ndarray) -> Session:
        now = self._clock()
        session = Session(
            id=secrets.token_urlsafe(24),
            goal=goal,
            goal_vector=goal_vector,
            created_at=now,
            touched_at=now,
        )
        with self._lock:
            self._evict(now)
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        now = self._clock()
        with self._lock:
            self._evict(now)
            session = self._sessions.get(session_id)
            if session is None:
                raise SessionNotFound(f"unknown session '{session_id}'")
            session.touched_at = now
            return session

    def _evict(self, now: float) -> None:
        expired = [
            sid for sid, s in self._sessions.items() if now - s.touched_at > self._ttl
        ]
        for sid in expired:
            del self._sessions[sid]

    def __len__(self) -> int:
        return len(self._sessions)
