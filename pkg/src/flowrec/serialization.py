"""Canonical, round-trip-exact persistence of trained models.

The model file is a versioned JSON document holding the vocabulary (order
is significant), every parameter matrix as nested arrays, the goal-embedder
payload, the training configuration echo, and the training-corpus
fingerprint. Serialization is canonical: keys are sorted and floats use
the shortest round-trip decimal representation, so saving the same model
twice yields byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ModelFormatError
from .goalvec import GoalEmbedder, GoalEmbedderConfig, TextPipelineConfig
from .seqmodel import GATE_NAMES, ModelParameters, TrainConfig

FORMAT_VERSION = 1

__all__ = ["TrainedModel", "save_model", "load_model", "model_fingerprint", "FORMAT_VERSION"]


@dataclass
class TrainedModel:
    """Everything needed to serve recommendations: parameters, goal embedder,
    service names, and provenance metadata."""

    params: ModelParameters
    goal_embedder: GoalEmbedder
    service_names: dict[str, str]
    train_config: TrainConfig
    corpus_fingerprint: str
    objective_history: tuple[float, ...] = field(default_factory=tuple)


def _matrix(a: np.ndarray) -> list:
    return a.tolist()


def _embedder_payload(emb: GoalEmbedder) -> dict:
    return {
        "dim": emb.dim,
        "vocabulary": list(emb.vocabulary),
        "doc_ids": list(emb.doc_ids),
        "word_matrix": _matrix(emb.word_matrix),
        "ctx_matrix": _matrix(emb.ctx_matrix),
        "doc_matrix": _matrix(emb.doc_matrix),
        "config": asdict(emb.config),
        "pipeline": {
            "stopwords": sorted(emb.pipeline.stopwords),
            "min_token_length": emb.pipeline.min_token_length,
            "stemming": emb.pipeline.stemming,
        },
        "seed": emb.seed,
    }


def _embedder_from_payload(payload: dict) -> GoalEmbedder:
    return GoalEmbedder(
        dim=payload["dim"],
        vocabulary=tuple(payload["vocabulary"]),
        doc_ids=tuple(payload["doc_ids"]),
        word_matrix=np.array(payload["word_matrix"], dtype=np.float64),
        ctx_matrix=np.array(payload["ctx_matrix"], dtype=np.float64),
        doc_matrix=np.array(payload["doc_matrix"], dtype=np.float64),
        config=GoalEmbedderConfig(**payload["config"]),
        pipeline=TextPipelineConfig(
            stopwords=frozenset(payload["pipeline"]["stopwords"]),
            min_token_length=payload["pipeline"]["min_token_length"],
            stemming=payload["pipeline"]["stemming"],
        ),
        seed=payload["seed"],
    )


def save_model(model: TrainedModel) -> bytes:
    """Serialize to canonical JSON bytes (fixed key order, exact floats)."""
    p = model.params
    payload = {
        "format_version": FORMAT_VERSION,
        "d": p.d,
        "vocabulary": list(p.vocabulary),
        "service_names": {sid: model.service_names[sid] for sid in sorted(model.service_names)},
        "parameters": {
            "w_s": _matrix(p.w_s),
            **{f"w_x{g}": _matrix(p.w_x[g]) for g in GATE_NAMES},
            **{f"w_h{g}": _matrix(p.w_h[g]) for g in GATE_NAMES},
            **{f"b_{g}": _matrix(p.b[g]) for g in GATE_NAMES},
            "w_g": _matrix(p.w_g),
            "w_z": _matrix(p.w_z),
            "b_g": _matrix(p.b_g),
            "b_z": _matrix(p.b_z),
            "attention": _matrix(p.attention),
            "w_f": _matrix(p.w_f),
        },
        "goal_embedder": _embedder_payload(model.goal_embedder),
        "train_config": asdict(model.train_config),
        "corpus_fingerprint": model.corpus_fingerprint,
        "objective_history": list(model.objective_history),
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return (text + "\n").encode("utf-8")


def load_model(data: bytes | str) -> TrainedModel:
    """Parse a model file; predictions after a load are bit-exact."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        payload = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {version!r}")

    raw = payload["parameters"]
    d = payload["d"]
    params = ModelParameters(
        vocabulary=tuple(payload["vocabulary"]),
        d=d,
        w_s=np.array(raw["w_s"], dtype=np.float64),
        w_x={g: np.array(raw[f"w_x{g}"], dtype=np.float64) for g in GATE_NAMES},
        w_h={g: np.array(raw[f"w_h{g}"], dtype=np.float64) for g in GATE_NAMES},
        b={g: np.array(raw[f"b_{g}"], dtype=np.float64) for g in GATE_NAMES},
        w_g=np.array(raw["w_g"], dtype=np.float64),
        w_z=np.array(raw["w_z"], dtype=np.float64),
        b_g=np.array(raw["b_g"], dtype=np.float64),
        b_z=np.array(raw["b_z"], dtype=np.float64),
        attention=np.array(raw["attention"], dtype=np.float64),
        w_f=np.array(raw["w_f"], dtype=np.float64),
    )
    return TrainedModel(
        params=params,
        goal_embedder=_embedder_from_payload(payload["goal_embedder"]),
        service_names=dict(payload["service_names"]),
        train_config=TrainConfig(**payload["train_config"]),
        corpus_fingerprint=payload["corpus_fingerprint"],
        objective_history=tuple(payload["objective_history"]),
    )


def model_fingerprint(data: bytes) -> str:
    """sha256 of the serialized model file (reported by the health endpoint)."""
    return hashlib.sha256(data).hexdigest()
