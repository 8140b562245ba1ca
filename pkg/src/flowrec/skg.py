"""Service knowledge graph: historical service dependencies with counts.

The graph is a labeled multi-edge digraph. Each workflow edge contributes
one relationship (source, sink, workflow label); the occurrence count of a
node pair is the number of distinct workflows in which that dependency
appears. The graph is immutable after construction and safe for concurrent
readers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import UnknownServiceError
from .provenance import Repository, Service

__all__ = ["ServiceKnowledgeGraph", "build_skg", "transition_distribution", "dump_skg"]


@dataclass(frozen=True)
class ServiceKnowledgeGraph:
    """Multi-edge labeled digraph of service invocation dependencies."""

    nodes: dict[str, Service]
    relationships: tuple[tuple[str, str, str], ...]  # (source, sink, workflow label)
    occurrence: dict[tuple[str, str], int]
    out_total: dict[str, int]
    workflow_ids: frozenset[str]
    # successor ids per source, sorted, for deterministic traversal
    _successors: dict[str, tuple[str, ...]] = field(default_factory=dict)
    # label-restricted adjacency: workflow label -> {source -> sorted sinks}
    _label_adjacency: dict[str, dict[str, tuple[str, ...]]] = field(default_factory=dict)

    def successors(self, service_id: str) -> tuple[str, ...]:
        """Directed neighbor ids of ``service_id``, sorted."""
        if service_id not in self.nodes:
            raise UnknownServiceError(f"unknown service '{service_id}'")
        return self._successors.get(service_id, ())

    def label_successors(self, workflow_id: str, service_id: str) -> tuple[str, ...]:
        """Sinks of ``service_id`` along edges labeled with ``workflow_id``."""
        return self._label_adjacency.get(workflow_id, {}).get(service_id, ())

    def label_nodes(self, workflow_id: str) -> tuple[str, ...]:
        """All service ids incident to edges labeled ``workflow_id``, sorted."""
        adjacency = self._label_adjacency.get(workflow_id, {})
        nodes = set(adjacency)
        for sinks in adjacency.values():
            nodes.update(sinks)
        return tuple(sorted(nodes))


def build_skg(repo: Repository) -> ServiceKnowledgeGraph:
    """Construct the knowledge graph from a validated repository."""
    relationships: list[tuple[str, str, str]] = []
    occurrence: dict[tuple[str, str], int] = {}
    label_adjacency: dict[str, dict[str, list[str]]] = {}
    for wf in repo.workflows:
        per_label = label_adjacency.setdefault(wf.id, {})
        for u, v in wf.edges:
            relationships.append((u, v, wf.id))
            occurrence[(u, v)] = occurrence.get((u, v), 0) + 1
            per_label.setdefault(u, []).append(v)

    out_total: dict[str, int] = {}
    successors: dict[str, set[str]] = {}
    for (u, v), count in occurrence.items():
        out_total[u] = out_total.get(u, 0) + count
        successors.setdefault(u, set()).add(v)

    return ServiceKnowledgeGraph(
        nodes=dict(repo.services),
        relationships=tuple(relationships),
        occurrence=occurrence,
        out_total=out_total,
        workflow_ids=frozenset(repo.workflow_ids),
        _successors={u: tuple(sorted(vs)) for u, vs in successors.items()},
        _label_adjacency={
            label: {u: tuple(sorted(vs)) for u, vs in adj.items()}
            for label, adj in label_adjacency.items()
        },
    )


def transition_distribution(
    skg: ServiceKnowledgeGraph, service_id: str, uniform: bool = False
) -> dict[str, float]:
    """Probability of each directed neighbor being generated after ``service_id``.

    p(v|u) = exp(o_uv / o_u) / sum_n exp(o_un / o_u) over the directed
    neighbors of u. With ``uniform=True`` the walk degenerates to a plain
    random walk: every neighbor is equally likely. Returns an empty mapping
    for services without directed neighbors.
    """
    if service_id not in skg.nodes:
        raise UnknownServiceError(f"unknown service '{service_id}'")
    neighbors = skg.successors(service_id)
    if not neighbors:
        return {}
    if uniform:
        p = 1.0 / len(neighbors)
        return {v: p for v in neighbors}
    total = skg.out_total[service_id]
    weights = [math.exp(skg.occurrence[(service_id, v)] / total) for v in neighbors]
    norm = sum(weights)
    return {v: w / norm for v, w in zip(neighbors, weights)}


def dump_skg(skg: ServiceKnowledgeGraph) -> str:
    """Line-oriented dump ``source<TAB>sink<TAB>label``, sorted for diffing."""
    lines = sorted(f"{u}\t{v}\t{label}" for u, v, label in skg.relationships)
    return "\n".join(lines) + ("\n" if lines else "")
