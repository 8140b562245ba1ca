"""Goal-requirement text embedding via a small PV-DM paragraph-vector model.

Each workflow's goal text is treated as a document. Training predicts each
token from the average of its windowed context-word vectors plus the
document vector, optimized with negative sampling. A trained embedder is
immutable; inferring a vector for unseen text fits a fresh document vector
against the frozen word matrices.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DEFAULT_STOPWORDS",
    "TextPipelineConfig",
    "GoalEmbedderConfig",
    "GoalEmbedder",
    "preprocess_text",
    "train_goal_embedder",
    "infer_goal_vector",
]

# Fixed and versioned with the model: changing it invalidates trained vocabularies.
DEFAULT_STOPWORDS = frozenset(
    """a an and are as at be been by for from has have in into is it its of on
    or that the their there these this to was were which will with""".split()
)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class TextPipelineConfig:
    stopwords: frozenset[str] = DEFAULT_STOPWORDS
    min_token_length: int = 2
    stemming: bool = True


@dataclass(frozen=True)
class GoalEmbedderConfig:
    window: int = 5
    negatives: int = 5
    epochs: int = 40
    learning_rate: float = 0.025
    min_learning_rate: float = 1e-4
    inference_steps: int = 50


def _stem(token: str) -> str:
    """One pass of light suffix stripping (plural -s/-es, -ing, -ed)."""
    if token.endswith("ing") and len(token) >= 6:
        return token[:-3]
    if token.endswith("ed") and len(token) >= 5:
        return token[:-2]
    if token.endswith("es") and len(token) >= 4 and token[-3] in "sxz":
        return token[:-2]
    if token.endswith("s") and not token.endswith("ss") and len(token) >= 3:
        return token[:-1]
    return token


def _stem_fixpoint(token: str) -> str:
    # iterate so e.g. "listings" -> "listing" -> "list"; guarantees idempotence
    while True:
        stemmed = _stem(token)
        if stemmed == token:
            return token
        token = stemmed


def preprocess_text(text: str, config: TextPipelineConfig | None = None) -> list[str]:
    """Lowercase alphanumeric tokens, stopwords removed, optionally stemmed.

    Deterministic, and idempotent on its own space-joined output.
    """
    config = config or TextPipelineConfig()
    tokens = _TOKEN_RE.findall(text.lower())
    out = []
    for token in tokens:
        if token in config.stopwords:
            continue
        if config.stemming:
            token = _stem_fixpoint(token)
        if len(token) < config.min_token_length or token in config.stopwords:
            continue
        out.append(token)
    return out


@dataclass(frozen=True)
class GoalEmbedder:
    """A trained PV-DM model over a corpus of goal-requirement documents.

    ``word_matrix`` holds input word vectors, ``ctx_matrix`` the output
    vectors used by the negative-sampling objective, ``doc_matrix`` one
    column per training document. All are (d x n) float64.
    """

    dim: int
    vocabulary: tuple[str, ...]
    doc_ids: tuple[str, ...]
    word_matrix: np.ndarray
    ctx_matrix: np.ndarray
    doc_matrix: np.ndarray
    config: GoalEmbedderConfig = field(default_factory=GoalEmbedderConfig)
    pipeline: TextPipelineConfig = field(default_factory=TextPipelineConfig)
    seed: int = 0

    @property
    def word_index(self) -> dict[str, int]:
        return {w: i for i, w in enumerate(self.vocabulary)}

    def doc_vector(self, doc_id: str) -> np.ndarray:
        return self.doc_matrix[:, self.doc_ids.index(doc_id)].copy()


def _scalar_sigmoid(x: float) -> float:
    if x >= 0.0:
        return 1.0 / (1.0 + np.exp(-x))
    e = np.exp(x)
    return e / (1.0 + e)


def _sgd_pass(
    token_ids: list[int],
    doc_vec: np.ndarray,
    word_matrix: np.ndarray,
    ctx_matrix: np.ndarray,
    vocab_size: int,
    config: GoalEmbedderConfig,
    lr: float,
    rng: np.random.Generator,
    train_mode: bool,
) -> None:
    """One pass of PV-DM negative-sampling updates over a single document.

    The hidden vector is the mean of the doc vector and the window's word
    vectors; the positive target is the center token. Operates in place.
    With ``train_mode=False`` only the doc vector moves (inference).
    """
    window = config.window
    for pos, center in enumerate(token_ids):
        ctx_ids = token_ids[max(0, pos - window): pos] + \
            token_ids[pos + 1: pos + window + 1]
        inputs = len(ctx_ids) + 1
        hidden = doc_vec.copy()
        for t in ctx_ids:
            hidden += word_matrix[:, t]
        hidden /= inputs

        grad_hidden = np.zeros_like(hidden)
        samples = [(center, 1.0)]
        for _ in range(config.negatives):
            neg = int(rng.integers(0, vocab_size))
            if neg != center:
                samples.append((neg, 0.0))
        for token, label in samples:
            out = ctx_matrix[:, token].copy()
            score = _scalar_sigmoid(float(hidden @ out))
            coeff = lr * (label - score)
            grad_hidden += coeff * out
            if train_mode:
                ctx_matrix[:, token] += coeff * hidden

        grad_hidden /= inputs
        doc_vec += grad_hidden
        if train_mode:
            for t in ctx_ids:
                word_matrix[:, t] += grad_hidden


def train_goal_embedder(
    corpus: list[tuple[str, str]],
    dim: int,
    config: GoalEmbedderConfig | None = None,
    seed: int = 0,
    pipeline: TextPipelineConfig | None = None,
) -> GoalEmbedder:
    """Train a PV-DM embedder on (doc id, goal text) pairs.

    Deterministic for a fixed seed. Raises ValueError when the corpus is
    empty or nothing survives preprocessing.
    """
    if not corpus:
        raise ValueError("goal corpus is empty")
    if dim < 1:
        raise ValueError(f"dimension must be >= 1, got {dim}")
    config = config or GoalEmbedderConfig()
    pipeline = pipeline or TextPipelineConfig()

    docs = [(doc_id, preprocess_text(text, pipeline)) for doc_id, text in corpus]
    vocabulary = tuple(sorted({t for _, tokens in docs for t in tokens}))
    if not vocabulary:
        raise ValueError("goal corpus is empty after preprocessing")
    index = {w: i for i, w in enumerate(vocabulary)}
    token_docs = [(doc_id, [index[t] for t in tokens]) for doc_id, tokens in docs]

    rng = np.random.default_rng(seed)
    v = len(vocabulary)
    word_matrix = (rng.random((dim, v)) - 0.5) / dim
    ctx_matrix = np.zeros((dim, v))
    doc_matrix = (rng.random((dim, len(docs))) - 0.5) / dim

    for epoch in range(config.epochs):
        frac = epoch / max(1, config.epochs)
        lr = config.learning_rate * (1.0 - frac) + config.min_learning_rate * frac
        for col, (_, token_ids) in enumerate(token_docs):
            if not token_ids:
                continue
            doc_vec = doc_matrix[:, col]  # view: updates land in doc_matrix
            _sgd_pass(
                token_ids, doc_vec, word_matrix, ctx_matrix,
                v, config, lr, rng, train_mode=True,
            )

    return GoalEmbedder(
        dim=dim,
        vocabulary=vocabulary,
        doc_ids=tuple(doc_id for doc_id, _ in token_docs),
        word_matrix=word_matrix,
        ctx_matrix=ctx_matrix,
        doc_matrix=doc_matrix,
        config=config,
        pipeline=pipeline,
        seed=seed,
    )


def empty_goal_embedder(
    dim: int,
    config: GoalEmbedderConfig | None = None,
    pipeline: TextPipelineConfig | None = None,
    seed: int = 0,
) -> GoalEmbedder:
    """Degenerate embedder for repositories without usable goal text.

    Its vocabulary is empty, so inference always yields the zero vector.
    """
    return GoalEmbedder(
        dim=dim,
        vocabulary=(),
        doc_ids=(),
        word_matrix=np.zeros((dim, 0)),
        ctx_matrix=np.zeros((dim, 0)),
        doc_matrix=np.zeros((dim, 0)),
        config=config or GoalEmbedderConfig(),
        pipeline=pipeline or TextPipelineConfig(),
        seed=seed,
    )


def infer_goal_vector(embedder: GoalEmbedder, text: str) -> np.ndarray:
    """Embed unseen goal text with the frozen word matrices.

    A fresh document vector is fitted by the training objective for
    ``inference_steps`` passes. Out-of-vocabulary tokens are skipped;
    empty or all-OOV text yields the zero vector.
    """
    index = embedder.word_index
    token_ids = [
        index[t] for t in preprocess_text(text, embedder.pipeline) if t in index
    ]
    if not token_ids:
        return np.zeros(embedder.dim)

    # fixed derived seed: identical text always infers the identical vector
    rng = np.random.default_rng(embedder.seed + 1)
    doc_vec = (rng.random(embedder.dim) - 0.5) / embedder.dim
    config = embedder.config
    for step in range(config.inference_steps):
        frac = step / max(1, config.inference_steps)
        lr = config.learning_rate * (1.0 - frac) + config.min_learning_rate * frac
        _sgd_pass(
            token_ids, doc_vec, embedder.word_matrix, embedder.ctx_matrix,
            len(embedder.vocabulary), config, lr, rng, train_mode=False,
        )
    return doc_vec
