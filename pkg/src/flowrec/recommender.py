"""Online next-service recommendation for a workflow under construction.

For an anchor service, every maximal path of the partial workflow ending
at the anchor is encoded; the per-path selection distributions are
averaged into one distribution (a convex combination, so it still sums to
one), services already composed are removed, and the top K remaining
candidates are returned.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CycleError, UnknownServiceError
from .goalvec import infer_goal_vector
from .provenance import find_cycle
from .seqmodel import context_vector, encode_path, predict_probabilities
from .serialization import TrainedModel

__all__ = [
    "PartialWorkflow",
    "Recommendation",
    "extract_anchor_paths",
    "aggregate_distribution",
    "recommend_next",
]


@dataclass(frozen=True)
class PartialWorkflow:
    """The DAG composed so far plus the goal text being pursued."""

    services: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    goal: str = ""

    def __post_init__(self):
        declared = set(self.services)
        if len(declared) != len(self.services):
            raise ValueError("duplicate service in partial workflow")
        for u, v in self.edges:
            if u not in declared or v not in declared:
                raise ValueError(f"edge ({u}, {v}) references an undeclared service")
        if len(set(self.edges)) != len(self.edges):
            raise ValueError("duplicate edge in partial workflow")
        cycle = find_cycle(list(self.services), list(self.edges))
        if cycle is not None:
            raise CycleError(cycle)

    @property
    def service_set(self) -> frozenset[str]:
        return frozenset(self.services)

    def predecessors(self, service_id: str) -> tuple[str, ...]:
        return tuple(u for u, v in self.edges if v == service_id)


@dataclass(frozen=True)
class Recommendation:
    """Ranked next-service candidates for one anchor query."""

    anchor: str
    k: int
    candidates: tuple[tuple[str, float], ...]  # (service id, probability), descending

    def ids(self) -> tuple[str, ...]:
        return tuple(sid for sid, _ in self.candidates)


def extract_anchor_paths(
    pw: PartialWorkflow, anchor: str
) -> list[tuple[str, ...]]:
    """All maximal paths of the partial workflow terminating at the anchor.

    A path is maximal when its first service has no predecessor, so no
    suffix is double-counted when the per-path distributions are averaged.
    A lone anchor yields the singleton path. Output is sorted
    lexicographically by service-id sequence.
    """
    if anchor not in pw.service_set:
        raise UnknownServiceError(f"anchor '{anchor}' is not part of the partial workflow")

    paths: list[tuple[str, ...]] = []

    def backtrack(suffix: list[str]) -> None:
        preds = pw.predecessors(suffix[0])
        if not preds:
            paths.append(tuple(suffix))
            return
        for pred in preds:
            # the DAG guarantees no revisits, but guard for safety
            if pred in suffix:
                continue
            backtrack([pred] + suffix)

    backtrack([anchor])
    paths.sort()
    return paths


def aggregate_distribution(
    model: TrainedModel,
    pw: PartialWorkflow,
    anchor: str,
    goal_vector: np.ndarray | None = None,
) -> np.ndarray:
    """Mean of the per-anchor-path selection distributions, over the full
    vocabulary (aligned with ``model.params.vocabulary``). Sums to one."""
    params = model.params
    if goal_vector is None:
        goal_vector = (
            infer_goal_vector(model.goal_embedder, pw.goal)
            if pw.goal.strip()
            else np.zeros(params.d)
        )
    anchor_paths = extract_anchor_paths(pw, anchor)
    accumulated = np.zeros(len(params.vocabulary))
    for path in anchor_paths:
        hs = encode_path(params, path, goal_vector)
        excluded = pw.service_set - set(path)
        v = context_vector(params, hs, excluded)
        accumulated += predict_probabilities(params, v)
    return accumulated / len(anchor_paths)


def recommend_next(
    model: TrainedModel,
    pw: PartialWorkflow,
    anchor: str,
    k: int,
    goal_vector: np.ndarray | None = None,
) -> Recommendation:
    """Top-K next services after the anchor, excluding composed services.

    Deterministic: equal probabilities break ties by ascending service id.
    Returns at most min(K, number of eligible services) entries.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    params = model.params
    if anchor not in params.index:
        raise UnknownServiceError(f"anchor '{anchor}' is not in the model vocabulary")
    distribution = aggregate_distribution(model, pw, anchor, goal_vector)
    composed = pw.service_set
    ranked = sorted(
        (
            (sid, float(distribution[i]))
            for i, sid in enumerate(params.vocabulary)
            if sid not in composed
        ),
        key=lambda item: (-item[1], item[0]),
    )
    return Recommendation(anchor=anchor, k=k, candidates=tuple(ranked[:k]))
