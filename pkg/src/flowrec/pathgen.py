"""Composition-path corpus generation from the service knowledge graph.

Two strategies produce service sequences ("sentences" for the sequence
model): the intra-workflow strategy enumerates every maximal path inside a
single workflow's labeled edges, while the inter-workflow strategy runs
probabilistic walks across workflow boundaries. Paths shorter than two
services carry no transition and are dropped.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np

from .errors import UnknownWorkflowError
from .provenance import Workflow
from .skg import ServiceKnowledgeGraph

__all__ = [
    "CompositionPath",
    "TrainingInstance",
    "generate_intra_paths",
    "generate_inter_paths",
    "compute_excluded_set",
    "deduplicate",
    "make_training_instance",
]

MIN_PATH_SERVICES = 2


@dataclass(frozen=True)
class CompositionPath:
    """An edge-chained, acyclic sequence of services.

    ``labels[k]`` is the workflow label of the step services[k] -> services[k+1].
    Intra-workflow paths carry their source workflow id and a single label.
    """

    services: tuple[str, ...]
    labels: tuple[str, ...]
    origin: str  # "intra" | "inter"
    source_workflow: str | None = None

    def __post_init__(self):
        if len(self.labels) != len(self.services) - 1:
            raise ValueError("labels must have one entry per step")
        if len(set(self.services)) != len(self.services):
            raise ValueError(f"path revisits a service: {self.services}")
        if self.origin == "intra":
            if self.source_workflow is None:
                raise ValueError("intra paths must name their source workflow")
            if any(label != self.source_workflow for label in self.labels):
                raise ValueError("intra path labels must equal the source workflow")


@dataclass(frozen=True)
class TrainingInstance:
    """One supervised example: predict ``target`` after the ``context`` prefix.

    ``excluded`` is the workflow-level context (services barred from being
    the next selection); it never overlaps the context or the target.
    ``goal`` is the originating workflow's goal vector (zeros for inter
    paths, which cross workflow boundaries and have no single goal text).
    """

    context: tuple[str, ...]
    target: str
    excluded: frozenset[str]
    goal: np.ndarray

    def __post_init__(self):
        if self.target in self.context:
            raise ValueError("target must not appear in the context")
        if self.target in self.excluded:
            raise ValueError("target must not appear in the excluded set")
        if self.excluded & set(self.context):
            raise ValueError("excluded set must be disjoint from the context")


def generate_intra_paths(
    skg: ServiceKnowledgeGraph, workflow_id: str
) -> list[CompositionPath]:
    """Enumerate every maximal path along edges labeled with ``workflow_id``.

    For each service of the workflow, every path starting there and ending
    at a service with no successor under the label is emitted, in
    lexicographic order of the service-id sequence. Single-service paths
    are dropped.
    """
    if workflow_id not in skg.workflow_ids:
        raise UnknownWorkflowError(f"unknown workflow '{workflow_id}'")

    sequences: list[tuple[str, ...]] = []

    def extend(prefix: list[str]) -> None:
        nexts = skg.label_successors(workflow_id, prefix[-1])
        if not nexts:
            if len(prefix) >= MIN_PATH_SERVICES:
                sequences.append(tuple(prefix))
            return
        for nxt in nexts:
            prefix.append(nxt)
            extend(prefix)
            prefix.pop()

    for start in skg.label_nodes(workflow_id):
        extend([start])

    sequences.sort()
    return [
        CompositionPath(
            services=seq,
            labels=(workflow_id,) * (len(seq) - 1),
            origin="intra",
            source_workflow=workflow_id,
        )
        for seq in sequences
    ]


def _walk_tables(
    skg: ServiceKnowledgeGraph, uniform: bool
) -> dict[str, tuple[tuple[str, ...], tuple[float, ...]]]:
    """Per-node neighbor lists with unnormalized transition weights."""
    tables = {}
    for u in skg.nodes:
        neighbors = skg.successors(u)
        if not neighbors:
            continue
        if uniform:
            weights = (1.0,) * len(neighbors)
        else:
            total = skg.out_total[u]
            weights = tuple(math.exp(skg.occurrence[(u, v)] / total) for v in neighbors)
        tables[u] = (neighbors, weights)
    return tables


def _smallest_labels(skg: ServiceKnowledgeGraph) -> dict[tuple[str, str], str]:
    """Lexicographically smallest workflow label per node pair."""
    smallest: dict[tuple[str, str], str] = {}
    for u, v, label in skg.relationships:
        if (u, v) not in smallest or label < smallest[(u, v)]:
            smallest[(u, v)] = label
    return smallest


def generate_inter_paths(
    skg: ServiceKnowledgeGraph,
    max_length: int,
    walks_per_service: int,
    mode: str = "probabilistic",
    seed: int = 0,
) -> list[CompositionPath]:
    """Generate walks across workflow boundaries.

    From every service, ``walks_per_service`` walks are started. Each step
    samples an unvisited directed neighbor with the transition distribution
    renormalized over the unvisited neighbors (or uniformly in ``uniform``
    mode); a walk stops when it reaches ``max_length`` services or runs out
    of unvisited neighbors. There is no restart on dead ends. Each start
    service owns an independent random stream derived from the seed and its
    rank, so output is deterministic.
    """
    if max_length < MIN_PATH_SERVICES:
        raise ValueError(f"max_length must be >= {MIN_PATH_SERVICES}, got {max_length}")
    if walks_per_service < 1:
        raise ValueError(f"walks_per_service must be >= 1, got {walks_per_service}")
    if mode not in ("probabilistic", "uniform"):
        raise ValueError(f"mode must be 'probabilistic' or 'uniform', got '{mode}'")

    tables = _walk_tables(skg, uniform=(mode == "uniform"))
    step_labels = _smallest_labels(skg)
    paths: list[CompositionPath] = []

    for start_index, start in enumerate(sorted(skg.nodes)):
        if start not in tables:
            continue  # walks of length 1 would be filtered anyway
        rng = random.Random(seed ^ start_index)
        for _ in range(walks_per_service):
            sequence = [start]
            visited = {start}
            while len(sequence) < max_length:
                entry = tables.get(sequence[-1])
                if entry is None:
                    break
                neighbors, weights = entry
                choices = [
                    (v, w) for v, w in zip(neighbors, weights) if v not in visited
                ]
                if not choices:
                    break
                total = sum(w for _, w in choices)
                pick = rng.random() * total
                acc = 0.0
                nxt = choices[-1][0]
                for v, w in choices:
                    acc += w
                    if pick < acc:
                        nxt = v
                        break
                sequence.append(nxt)
                visited.add(nxt)
            if len(sequence) < MIN_PATH_SERVICES:
                continue
            labels = tuple(
                step_labels[(u, v)] for u, v in zip(sequence, sequence[1:])
            )
            paths.append(
                CompositionPath(
                    services=tuple(sequence),
                    labels=labels,
                    origin="inter",
                )
            )
    return paths


def compute_excluded_set(
    path: CompositionPath, workflow: Workflow | None = None
) -> frozenset[str]:
    """Workflow-level context of a path: services barred from recommendation.

    Intra mode (``workflow`` given): the source workflow's services minus
    the path's own. Inter mode: the path's own services, since an
    inter-workflow path has no surrounding workflow.
    """
    if workflow is not None:
        return frozenset(workflow.service_ids) - set(path.services)
    return frozenset(path.services)


def deduplicate(paths: list[CompositionPath]) -> list[CompositionPath]:
    """Drop exact duplicates of the service-id sequence, keeping the first.

    Labels and origin are ignored for the duplicate check; order is stable.
    """
    seen: set[tuple[str, ...]] = set()
    kept: list[CompositionPath] = []
    for path in paths:
        if path.services in seen:
            continue
        seen.add(path.services)
        kept.append(path)
    return kept


def make_training_instance(
    path: CompositionPath,
    workflow: Workflow | None,
    goal: np.ndarray,
) -> TrainingInstance:
    """Slice a path into (context prefix, final target) plus its excluded set.

    For intra paths the excluded set is the source workflow's services not
    on the path. For inter paths the only composed services are the path's
    own, which the instance invariants already bar (they are the context
    and the target), so the excluded set is empty.
    """
    if len(path.services) < MIN_PATH_SERVICES:
        raise ValueError("a training instance needs a path of at least 2 services")
    context = path.services[:-1]
    target = path.services[-1]
    if workflow is not None:
        excluded = frozenset(workflow.service_ids) - set(path.services)
    else:
        excluded = frozenset()
    return TrainingInstance(
        context=context,
        target=target,
        excluded=excluded,
        goal=np.asarray(goal, dtype=np.float64),
    )
