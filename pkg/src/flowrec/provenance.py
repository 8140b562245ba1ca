"""Workflow repository parsing, validation, serialization, and splitting.

The canonical interchange format is a JSON document::

    {"workflows": [{"id": ..., "goal": ..., "services": [{"id", "name"}],
                    "edges": [{"source", "sink"}]}]}

Validation is strict: malformed documents are rejected, never repaired,
so that provenance statistics derived downstream stay trustworthy.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .errors import CycleError, RepositoryFormatError

__all__ = [
    "Service",
    "Workflow",
    "Repository",
    "parse_repository",
    "serialize_repository",
    "split_repository",
    "unseen_services",
    "find_cycle",
]


@dataclass(frozen=True)
class Service:
    """A reusable component appearing as a node in workflows."""

    id: str
    name: str


@dataclass(frozen=True)
class Workflow:
    """A DAG of services with a textual goal requirement.

    ``edges`` are (source id, sink id) pairs; endpoints must reference
    declared services and the edge set must be acyclic.
    """

    id: str
    goal: str
    services: tuple[Service, ...]
    edges: tuple[tuple[str, str], ...]

    @property
    def service_ids(self) -> frozenset[str]:
        return frozenset(s.id for s in self.services)

    def successors(self, service_id: str) -> tuple[str, ...]:
        return tuple(v for u, v in self.edges if u == service_id)

    def predecessors(self, service_id: str) -> tuple[str, ...]:
        return tuple(u for u, v in self.edges if v == service_id)


@dataclass(frozen=True)
class Repository:
    """A collection of workflows with a globally consistent service universe."""

    workflows: tuple[Workflow, ...]

    @property
    def services(self) -> dict[str, Service]:
        """Union of all declared services, keyed by id (insertion order)."""
        merged: dict[str, Service] = {}
        for wf in self.workflows:
            for svc in wf.services:
                merged.setdefault(svc.id, svc)
        return merged

    @property
    def workflow_ids(self) -> tuple[str, ...]:
        return tuple(wf.id for wf in self.workflows)

    def workflow(self, workflow_id: str) -> Workflow:
        for wf in self.workflows:
            if wf.id == workflow_id:
                return wf
        raise KeyError(workflow_id)


def find_cycle(nodes: list[str], edges: list[tuple[str, str]]) -> list[str] | None:
    """Return one directed cycle as a node list, or None if the graph is acyclic.

    Iterative DFS with an explicit stack; nodes are visited in declaration
    order and neighbors in edge order, so the reported cycle is deterministic.
    """
    adjacency: dict[str, list[str]] = {n: [] for n in nodes}
    for u, v in edges:
        adjacency[u].append(v)

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {n: WHITE for n in nodes}
    for root in nodes:
        if color[root] != WHITE:
            continue
        path: list[str] = []
        stack: list[tuple[str, int]] = [(root, 0)]
        while stack:
            node, child_idx = stack[-1]
            if child_idx == 0:
                color[node] = GRAY
                path.append(node)
            if child_idx < len(adjacency[node]):
                stack[-1] = (node, child_idx + 1)
                child = adjacency[node][child_idx]
                if color[child] == GRAY:
                    return path[path.index(child):]
                if color[child] == WHITE:
                    stack.append((child, 0))
            else:
                color[node] = BLACK
                path.pop()
                stack.pop()
    return None


def _validate_workflow(raw: dict, registry: dict[str, str]) -> Workflow:
    for key in ("id", "goal", "services", "edges"):
        if key not in raw:
            raise RepositoryFormatError(f"workflow is missing field '{key}'")
    wf_id = raw["id"]
    if not isinstance(wf_id, str) or not wf_id:
        raise RepositoryFormatError("workflow id must be a non-empty string")
    if not isinstance(raw["goal"], str):
        raise RepositoryFormatError(f"workflow '{wf_id}': goal must be a string")

    services: list[Service] = []
    seen_ids: set[str] = set()
    for entry in raw["services"]:
        if not isinstance(entry, dict) or "id" not in entry or "name" not in entry:
            raise RepositoryFormatError(f"workflow '{wf_id}': malformed service entry")
        sid, name = entry["id"], entry["name"]
        if not isinstance(sid, str) or not sid:
            raise RepositoryFormatError(f"workflow '{wf_id}': service id must be a non-empty string")
        if not isinstance(name, str) or not name:
            raise RepositoryFormatError(f"workflow '{wf_id}': service '{sid}' has an empty name")
        if sid in seen_ids:
            raise RepositoryFormatError(f"workflow '{wf_id}': duplicate service id '{sid}'")
        if sid in registry and registry[sid] != name:
            raise RepositoryFormatError(
                f"service id '{sid}' is declared with conflicting names "
                f"('{registry[sid]}' vs '{name}')"
            )
        seen_ids.add(sid)
        registry[sid] = name
        services.append(Service(id=sid, name=name))

    edges: list[tuple[str, str]] = []
    edge_set: set[tuple[str, str]] = set()
    for entry in raw["edges"]:
        if not isinstance(entry, dict) or "source" not in entry or "sink" not in entry:
            raise RepositoryFormatError(f"workflow '{wf_id}': malformed edge entry")
        pair = (entry["source"], entry["sink"])
        for endpoint in pair:
            if endpoint not in seen_ids:
                raise RepositoryFormatError(
                    f"workflow '{wf_id}': edge references unknown service '{endpoint}'"
                )
        if pair in edge_set:
            raise RepositoryFormatError(
                f"workflow '{wf_id}': duplicate edge {pair[0]} -> {pair[1]}"
            )
        edge_set.add(pair)
        edges.append(pair)

    cycle = find_cycle([s.id for s in services], edges)
    if cycle is not None:
        raise CycleError(cycle, workflow_id=wf_id)

    return Workflow(id=wf_id, goal=raw["goal"], services=tuple(services), edges=tuple(edges))


def parse_repository(document: bytes | str) -> Repository:
    """Parse and validate a canonical repository document.

    Rejects (never repairs) malformed input: unknown service references,
    duplicate workflow ids, duplicate edges, inconsistent service names,
    and cyclic edge sets all raise :class:`RepositoryFormatError`.
    """
    if isinstance(document, bytes):
        document = document.decode("utf-8")
    try:
        data = json.loads(document)
    except json.JSONDecodeError as exc:
        raise RepositoryFormatError(f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "workflows" not in data:
        raise RepositoryFormatError("document must be an object with a 'workflows' array")
    if not isinstance(data["workflows"], list):
        raise RepositoryFormatError("'workflows' must be an array")

    registry: dict[str, str] = {}
    workflows: list[Workflow] = []
    seen_wf: set[str] = set()
    for raw in data["workflows"]:
        wf = _validate_workflow(raw, registry)
        if wf.id in seen_wf:
            raise RepositoryFormatError(f"duplicate workflow id '{wf.id}'")
        seen_wf.add(wf.id)
        workflows.append(wf)
    return Repository(workflows=tuple(workflows))


def serialize_repository(repo: Repository) -> bytes:
    """Serialize to the canonical document format (UTF-8, fixed key order)."""
    payload = {
        "workflows": [
            {
                "id": wf.id,
                "goal": wf.goal,
                "services": [{"id": s.id, "name": s.name} for s in wf.services],
                "edges": [{"source": u, "sink": v} for u, v in wf.edges],
            }
            for wf in repo.workflows
        ]
    }
    return (json.dumps(payload, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def split_repository(
    repo: Repository, train_fraction: float, seed: int
) -> tuple[Repository, Repository]:
    """Randomly partition workflows into train and test repositories.

    The partition is disjoint, covers every workflow, and is deterministic
    for a fixed seed. Workflow order within each part follows the original
    repository order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    n = len(repo.workflows)
    if n < 2:
        raise ValueError("repository must contain at least 2 workflows to split")
    n_train = round(train_fraction * n)
    n_train = min(max(n_train, 1), n - 1)

    indices = list(range(n))
    random.Random(seed).shuffle(indices)
    train_idx = sorted(indices[:n_train])
    test_idx = sorted(indices[n_train:])
    train = Repository(workflows=tuple(repo.workflows[i] for i in train_idx))
    test = Repository(workflows=tuple(repo.workflows[i] for i in test_idx))
    return train, test


def unseen_services(train: Repository, test: Repository) -> dict[str, frozenset[str]]:
    """Flag, per test workflow, the services absent from the training repository.

    Composition paths touching these services cannot be scored by a model
    trained on ``train`` and are held out by the evaluation harness.
    """
    known = set(train.services)
    return {
        wf.id: frozenset(sid for sid in wf.service_ids if sid not in known)
        for wf in test.workflows
    }
