"""End-to-end orchestration: repository -> paths -> instances -> model.

Shared by the CLI, the evaluation harness, and tests. Nothing here adds
behavior beyond wiring the per-module operations in the documented order.
"""

from __future__ import annotations

import hashlib
import logging

import numpy as np

from .goalvec import (
    GoalEmbedderConfig,
    empty_goal_embedder,
    preprocess_text,
    train_goal_embedder,
)
from .pathgen import (
    CompositionPath,
    TrainingInstance,
    deduplicate,
    generate_inter_paths,
    generate_intra_paths,
    make_training_instance,
)
from .provenance import Repository
from .seqmodel import TrainConfig, train
from .serialization import TrainedModel
from .skg import ServiceKnowledgeGraph, build_skg

logger = logging.getLogger(__name__)

__all__ = ["generate_corpus", "build_instances", "train_model", "corpus_fingerprint"]


def generate_corpus(
    skg: ServiceKnowledgeGraph, repo: Repository, config: TrainConfig
) -> list[CompositionPath]:
    """Produce the composition-path corpus for the configured strategy."""
    if config.strategy == "intra":
        paths: list[CompositionPath] = []
        for wf in repo.workflows:
            paths.extend(generate_intra_paths(skg, wf.id))
    elif config.strategy == "inter":
        paths = generate_inter_paths(
            skg,
            max_length=config.walk_length,
            walks_per_service=config.walks_per_service,
            mode=config.walk_mode,
            seed=config.seed,
        )
    else:
        raise ValueError(f"unknown strategy '{config.strategy}'")
    if config.dedup == "remove":
        paths = deduplicate(paths)
    elif config.dedup != "keep":
        raise ValueError(f"dedup must be 'keep' or 'remove', got '{config.dedup}'")
    logger.info("generated %d composition paths (%s)", len(paths), config.strategy)
    return paths


def build_instances(
    paths: list[CompositionPath],
    repo: Repository,
    goal_vectors: dict[str, np.ndarray],
    dim: int,
) -> list[TrainingInstance]:
    """Slice paths into training instances with their goal vectors.

    Intra paths use their source workflow's goal vector and excluded set;
    inter paths get a zero goal vector and an empty excluded set.
    """
    workflows = {wf.id: wf for wf in repo.workflows}
    zero = np.zeros(dim)
    instances = []
    for path in paths:
        if path.origin == "intra":
            wf = workflows[path.source_workflow]
            goal = goal_vectors.get(wf.id, zero)
            instances.append(make_training_instance(path, wf, goal))
        else:
            instances.append(make_training_instance(path, None, zero))
    return instances


def corpus_fingerprint(paths: list[CompositionPath]) -> str:
    digest = hashlib.sha256()
    for path in paths:
        digest.update(" ".join(path.services).encode("utf-8"))
        digest.update(b"\n")
    return digest.hexdigest()


def train_model(
    repo: Repository,
    config: TrainConfig,
    embedder_config: GoalEmbedderConfig | None = None,
) -> TrainedModel:
    """Train the full model (goal embedder + sequence model) on a repository."""
    skg = build_skg(repo)
    paths = generate_corpus(skg, repo, config)

    goal_corpus = [(wf.id, wf.goal) for wf in repo.workflows]
    if any(preprocess_text(text) for _, text in goal_corpus):
        embedder = train_goal_embedder(
            goal_corpus,
            dim=config.dim,
            config=embedder_config or GoalEmbedderConfig(),
            seed=config.seed,
        )
    else:
        logger.warning("no usable goal text in repository; goal vectors are zero")
        embedder = empty_goal_embedder(config.dim, seed=config.seed)
    goal_vectors = {
        doc_id: embedder.doc_matrix[:, col].copy()
        for col, doc_id in enumerate(embedder.doc_ids)
    }

    instances = build_instances(paths, repo, goal_vectors, config.dim)
    vocabulary = tuple(sorted(repo.services))
    params, history = train(instances, vocabulary, config)
    return TrainedModel(
        params=params,
        goal_embedder=embedder,
        service_names={sid: svc.name for sid, svc in repo.services.items()},
        train_config=config,
        corpus_fingerprint=corpus_fingerprint(paths),
        objective_history=tuple(history),
    )
