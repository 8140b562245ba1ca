"""Goal-conditioned LSTM sequence model for next-service prediction.

The cell extends a standard LSTM with a goal gate: the hidden output is
h_t = o_t * tanh(c_t) + g * z, where g = sigmoid(Wg r + bg) and
z = tanh(Wz r + bz) depend only on the goal vector r and are constant
across time steps. An attention layer pools the per-step hidden states;
the mean embedding of the excluded services is added to form the context
vector, which a fully connected output layer turns into per-service
scores. Training maximizes the negative-sampling objective with
per-instance stochastic gradient ascent; gradients are computed
analytically with backpropagation through time.

All math is float64. Everything here is deterministic for a fixed seed.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import TrainingDivergedError, TrainingError, UnknownServiceError
from .pathgen import TrainingInstance

logger = logging.getLogger(__name__)

__all__ = [
    "ModelParameters",
    "CellState",
    "TrainConfig",
    "Gradients",
    "init_parameters",
    "glstm_step",
    "encode_path",
    "attention_weights",
    "context_vector",
    "predict_probabilities",
    "instance_loss",
    "instance_gradients",
    "train",
]

GATE_NAMES = ("f", "i", "l", "o")


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function (branch form)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softplus(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def log_sigmoid(x: np.ndarray) -> np.ndarray:
    """log(sigmoid(x)) without catastrophic cancellation."""
    return -softplus(-np.asarray(x, dtype=np.float64))


def softmax(scores: np.ndarray) -> np.ndarray:
    shifted = scores - np.max(scores)
    e = np.exp(shifted)
    return e / e.sum()


@dataclass
class ModelParameters:
    """The full learnable parameter set.

    Vocabulary order is part of the model: column i of ``w_s`` and row i of
    ``w_f`` belong to ``vocabulary[i]``, and serialization preserves it.
    """

    vocabulary: tuple[str, ...]
    d: int
    w_s: np.ndarray          # (d, |S|) service embeddings
    w_x: dict[str, np.ndarray]  # input weights per gate, each (d, d)
    w_h: dict[str, np.ndarray]  # recurrent weights per gate, each (d, d)
    b: dict[str, np.ndarray]    # gate biases, each (d,)
    w_g: np.ndarray          # (d, d) goal gate weights
    w_z: np.ndarray          # (d, d) goal transform weights
    b_g: np.ndarray          # (d,)
    b_z: np.ndarray          # (d,)
    attention: np.ndarray    # (d,) row vector A
    w_f: np.ndarray          # (|S|, d) output layer
    _index: dict[str, int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {s: i for i, s in enumerate(self.vocabulary)}

    @property
    def index(self) -> dict[str, int]:
        return self._index

    def embedding(self, service_id: str) -> np.ndarray:
        try:
            return self.w_s[:, self._index[service_id]]
        except KeyError:
            raise UnknownServiceError(f"service '{service_id}' is not in the model vocabulary")

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(a)) for _, a in iter_arrays(self))


def iter_arrays(params: ModelParameters):
    """Yield (name, array) for every parameter group, in a fixed order."""
    yield "w_s", params.w_s
    for gate in GATE_NAMES:
        yield f"w_x{gate}", params.w_x[gate]
    for gate in GATE_NAMES:
        yield f"w_h{gate}", params.w_h[gate]
    for gate in GATE_NAMES:
        yield f"b_{gate}", params.b[gate]
    yield "w_g", params.w_g
    yield "w_z", params.w_z
    yield "b_g", params.b_g
    yield "b_z", params.b_z
    yield "attention", params.attention
    yield "w_f", params.w_f


@dataclass(frozen=True)
class CellState:
    """Hidden output and global cell state of one step."""

    h: np.ndarray
    c: np.ndarray

    @staticmethod
    def zero(d: int) -> "CellState":
        return CellState(h=np.zeros(d), c=np.zeros(d))


@dataclass(frozen=True)
class TrainConfig:
    """Offline training settings (paper defaults where stated)."""

    learning_rate: float = 0.001
    dim: int = 128
    max_epochs: int = 20
    negatives: int = 5
    tolerance: float = 1e-4
    seed: int = 0
    strategy: str = "intra"          # forwarded to pathgen
    dedup: str = "keep"              # keep | remove
    walk_length: int = 15            # inter strategy only
    walks_per_service: int = 10
    walk_mode: str = "probabilistic"  # probabilistic | uniform
    negative_smoothing: bool = False  # sample negatives ~ frequency^0.75

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.negatives < 1:
            raise ValueError("negatives must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")


def _glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def init_parameters(vocabulary: tuple[str, ...], d: int, seed: int) -> ModelParameters:
    """Random initialization: scaled-uniform weights, zero biases."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if len(set(vocabulary)) != len(vocabulary):
        raise ValueError("vocabulary contains duplicate service ids")
    rng = np.random.default_rng(seed)
    n = len(vocabulary)
    return ModelParameters(
        vocabulary=tuple(vocabulary),
        d=d,
        w_s=rng.uniform(-0.5 / d, 0.5 / d, size=(d, n)),
        w_x={g: _glorot(rng, d, d) for g in GATE_NAMES},
        w_h={g: _glorot(rng, d, d) for g in GATE_NAMES},
        b={g: np.zeros(d) for g in GATE_NAMES},
        w_g=_glorot(rng, d, d),
        w_z=_glorot(rng, d, d),
        b_g=np.zeros(d),
        b_z=np.zeros(d),
        attention=_glorot(rng, 1, d)[0],
        w_f=_glorot(rng, n, d),
    )


def goal_gates(params: ModelParameters, goal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """The time-constant goal gate g and transform z for one goal vector."""
    g = sigmoid(params.w_g @ goal + params.b_g)
    z = np.tanh(params.w_z @ goal + params.b_z)
    return g, z


def glstm_step(
    params: ModelParameters,
    x: np.ndarray,
    prev: CellState,
    goal: np.ndarray,
) -> CellState:
    """One goal-conditioned LSTM step.

    f = sig(Wxf x + Whf h + bf); i, o likewise; l = tanh(Wxl x + Whl h + bl)
    c = f*c_prev + i*l
    h = o*tanh(c) + sig(Wg r + bg)*tanh(Wz r + bz)
    """
    d = params.d
    for name, vec in (("x", x), ("prev.h", prev.h), ("prev.c", prev.c), ("goal", goal)):
        if vec.shape != (d,):
            raise ValueError(f"{name} must have shape ({d},), got {vec.shape}")
    f = sigmoid(params.w_x["f"] @ x + params.w_h["f"] @ prev.h + params.b["f"])
    i = sigmoid(params.w_x["i"] @ x + params.w_h["i"] @ prev.h + params.b["i"])
    l = np.tanh(params.w_x["l"] @ x + params.w_h["l"] @ prev.h + params.b["l"])
    c = f * prev.c + i * l
    o = sigmoid(params.w_x["o"] @ x + params.w_h["o"] @ prev.h + params.b["o"])
    g, z = goal_gates(params, goal)
    h = o * np.tanh(c) + g * z
    return CellState(h=h, c=c)


def encode_path(
    params: ModelParameters, services: tuple[str, ...] | list[str], goal: np.ndarray
) -> list[np.ndarray]:
    """Hidden outputs h_1..h_T of a service sequence, from the zero state."""
    if not services:
        raise ValueError("cannot encode an empty path")
    state = CellState.zero(params.d)
    outputs = []
    for sid in services:
        state = glstm_step(params, params.embedding(sid), state, goal)
        outputs.append(state.h)
    return outputs


def attention_weights(params: ModelParameters, hs: list[np.ndarray]) -> np.ndarray:
    """Softmax attention over the per-step scores A . h_t."""
    if not hs:
        raise ValueError("attention needs at least one hidden state")
    scores = np.array([float(params.attention @ h) for h in hs])
    return softmax(scores)


def context_vector(
    params: ModelParameters,
    hs: list[np.ndarray],
    excluded: frozenset[str] | set[str] = frozenset(),
) -> np.ndarray:
    """Attention-pooled hidden states plus the mean excluded-service embedding.

    An empty excluded set contributes the zero vector.
    """
    mu = attention_weights(params, hs)
    v = np.zeros(params.d)
    for weight, h in zip(mu, hs):
        v += weight * h
    if excluded:
        cols = [params.index[s] for s in sorted(excluded)]
        v += params.w_s[:, cols].mean(axis=1)
    return v


def scores(params: ModelParameters, v: np.ndarray) -> np.ndarray:
    """Relevance score r(s_n) = W_F[n,:] . v for every service."""
    return params.w_f @ v


def predict_probabilities(params: ModelParameters, v: np.ndarray) -> np.ndarray:
    """Softmax-normalized selection probabilities over the full vocabulary."""
    return softmax(scores(params, v))


def _check_negatives(instance: TrainingInstance, negatives: tuple[str, ...]) -> None:
    bad = set(negatives) & (instance.excluded | {instance.target})
    if bad:
        raise ValueError(
            f"negative samples must avoid the target and excluded services, got {sorted(bad)}"
        )


@dataclass
class _Forward:
    """Every intermediate of one forward pass, kept for backpropagation."""

    ids: list[int]
    xs: list[np.ndarray]
    f: list[np.ndarray]
    i: list[np.ndarray]
    l: list[np.ndarray]
    o: list[np.ndarray]
    c: list[np.ndarray]
    tanh_c: list[np.ndarray]
    hs: list[np.ndarray]
    g: np.ndarray
    z: np.ndarray
    mu: np.ndarray
    excluded_cols: list[int]
    v: np.ndarray


def _forward(
    params: ModelParameters,
    context: tuple[str, ...],
    goal: np.ndarray,
    excluded: frozenset[str],
) -> _Forward:
    ids = [params.index[s] if s in params.index else -1 for s in context]
    for sid, idx in zip(context, ids):
        if idx < 0:
            raise UnknownServiceError(f"service '{sid}' is not in the model vocabulary")
    g, z = goal_gates(params, goal)
    h_prev = np.zeros(params.d)
    c_prev = np.zeros(params.d)
    xs, fs, is_, ls, os_, cs, tanh_cs, hs = [], [], [], [], [], [], [], []
    for idx in ids:
        x = params.w_s[:, idx]
        f = sigmoid(params.w_x["f"] @ x + params.w_h["f"] @ h_prev + params.b["f"])
        i = sigmoid(params.w_x["i"] @ x + params.w_h["i"] @ h_prev + params.b["i"])
        l = np.tanh(params.w_x["l"] @ x + params.w_h["l"] @ h_prev + params.b["l"])
        c = f * c_prev + i * l
        o = sigmoid(params.w_x["o"] @ x + params.w_h["o"] @ h_prev + params.b["o"])
        tanh_c = np.tanh(c)
        h = o * tanh_c + g * z
        xs.append(x); fs.append(f); is_.append(i); ls.append(l)
        os_.append(o); cs.append(c); tanh_cs.append(tanh_c); hs.append(h)
        h_prev, c_prev = h, c

    mu = attention_weights(params, hs)
    v = np.zeros(params.d)
    for weight, h in zip(mu, hs):
        v += weight * h
    excluded_cols = [params.index[s] for s in sorted(excluded)]
    if excluded_cols:
        v = v + params.w_s[:, excluded_cols].mean(axis=1)
    return _Forward(
        ids=ids, xs=xs, f=fs, i=is_, l=ls, o=os_, c=cs, tanh_c=tanh_cs,
        hs=hs, g=g, z=z, mu=mu, excluded_cols=excluded_cols, v=v,
    )


def instance_loss(
    params: ModelParameters,
    instance: TrainingInstance,
    negatives: tuple[str, ...],
) -> float:
    """Negative-sampling objective of one instance (always <= 0).

    L = log sig(r(target)) + sum_neg log(1 - sig(r(neg))), scored on the
    context vector of the instance's prefix.
    """
    _check_negatives(instance, negatives)
    fwd = _forward(params, instance.context, instance.goal, instance.excluded)
    target_row = params.w_f[params.index[instance.target]]
    loss = float(log_sigmoid(np.array(target_row @ fwd.v)))
    for neg in negatives:
        r_neg = params.w_f[params.index[neg]] @ fwd.v
        loss += float(-softplus(np.array(r_neg)))  # log(1 - sigmoid(r))
    return loss


@dataclass
class Gradients:
    """dL/d(theta) per parameter group; untouched rows/columns stay zero.

    ``touched_services`` and ``touched_outputs`` list which columns of the
    embedding matrix / rows of the output matrix carry nonzero gradient, so
    the training loop can apply sparse updates.
    """

    w_s: np.ndarray
    w_x: dict[str, np.ndarray]
    w_h: dict[str, np.ndarray]
    b: dict[str, np.ndarray]
    w_g: np.ndarray
    w_z: np.ndarray
    b_g: np.ndarray
    b_z: np.ndarray
    attention: np.ndarray
    w_f: np.ndarray
    touched_services: list[int]
    touched_outputs: list[int]


def iter_gradient_arrays(grads: Gradients):
    yield "w_s", grads.w_s
    for gate in GATE_NAMES:
        yield f"w_x{gate}", grads.w_x[gate]
    for gate in GATE_NAMES:
        yield f"w_h{gate}", grads.w_h[gate]
    for gate in GATE_NAMES:
        yield f"b_{gate}", grads.b[gate]
    yield "w_g", grads.w_g
    yield "w_z", grads.w_z
    yield "b_g", grads.b_g
    yield "b_z", grads.b_z
    yield "attention", grads.attention
    yield "w_f", grads.w_f


def instance_gradients(
    params: ModelParameters,
    instance: TrainingInstance,
    negatives: tuple[str, ...],
) -> Gradients:
    """Analytic dL/d(theta) for every parameter group, via BPTT.

    Covers the flow through the output layer into the context vector, the
    attention softmax into every time step, the excluded-set mean into the
    corresponding embedding columns, the recurrent gates across time, and
    the time-constant goal gate.
    """
    _check_negatives(instance, negatives)
    fwd = _forward(params, instance.context, instance.goal, instance.excluded)
    d = params.d
    T = len(fwd.hs)

    grads = Gradients(
        w_s=np.zeros_like(params.w_s),
        w_x={g: np.zeros((d, d)) for g in GATE_NAMES},
        w_h={g: np.zeros((d, d)) for g in GATE_NAMES},
        b={g: np.zeros(d) for g in GATE_NAMES},
        w_g=np.zeros((d, d)),
        w_z=np.zeros((d, d)),
        b_g=np.zeros(d),
        b_z=np.zeros(d),
        attention=np.zeros(d),
        w_f=np.zeros_like(params.w_f),
        touched_services=[],
        touched_outputs=[],
    )

    # output layer: dL/dr = 1 - sig(r) for the target, -sig(r) per negative
    dv = np.zeros(d)
    target_idx = params.index[instance.target]
    r_target = float(params.w_f[target_idx] @ fwd.v)
    coeff = 1.0 - float(sigmoid(np.asarray(r_target)))
    grads.w_f[target_idx] += coeff * fwd.v
    dv += coeff * params.w_f[target_idx]
    grads.touched_outputs.append(target_idx)
    for neg in negatives:
        neg_idx = params.index[neg]
        r_neg = float(params.w_f[neg_idx] @ fwd.v)
        coeff = -float(sigmoid(np.asarray(r_neg)))
        grads.w_f[neg_idx] += coeff * fwd.v
        dv += coeff * params.w_f[neg_idx]
        grads.touched_outputs.append(neg_idx)

    # excluded-set mean embedding
    if fwd.excluded_cols:
        share = dv / len(fwd.excluded_cols)
        for col in fwd.excluded_cols:
            grads.w_s[:, col] += share
            grads.touched_services.append(col)

    # attention pooling: v = sum mu_t h_t
    dmu = np.array([float(dv @ h) for h in fwd.hs])
    mu_dot = float(fwd.mu @ dmu)
    da = fwd.mu * (dmu - mu_dot)  # softmax backward
    dh = [fwd.mu[t] * dv + da[t] * params.attention for t in range(T)]
    for t in range(T):
        grads.attention += da[t] * fwd.hs[t]

    # BPTT through the gates; the goal contribution accumulates across steps
    dg_total = np.zeros(d)
    dz_total = np.zeros(d)
    dc_next = np.zeros(d)
    dh_rec = np.zeros(d)
    for t in range(T - 1, -1, -1):
        dht = dh[t] + dh_rec
        dg_total += dht * fwd.z
        dz_total += dht * fwd.g
        do = dht * fwd.tanh_c[t]
        dc = dc_next + dht * fwd.o[t] * (1.0 - fwd.tanh_c[t] ** 2)
        c_prev = fwd.c[t - 1] if t > 0 else np.zeros(d)
        df = dc * c_prev
        di = dc * fwd.l[t]
        dl = dc * fwd.i[t]
        dc_next = dc * fwd.f[t]

        pre = {
            "f": df * fwd.f[t] * (1.0 - fwd.f[t]),
            "i": di * fwd.i[t] * (1.0 - fwd.i[t]),
            "l": dl * (1.0 - fwd.l[t] ** 2),
            "o": do * fwd.o[t] * (1.0 - fwd.o[t]),
        }
        h_prev = fwd.hs[t - 1] if t > 0 else np.zeros(d)
        dx = np.zeros(d)
        dh_rec = np.zeros(d)
        for gate in GATE_NAMES:
            grads.w_x[gate] += np.outer(pre[gate], fwd.xs[t])
            grads.w_h[gate] += np.outer(pre[gate], h_prev)
            grads.b[gate] += pre[gate]
            dx += params.w_x[gate].T @ pre[gate]
            dh_rec += params.w_h[gate].T @ pre[gate]
        grads.w_s[:, fwd.ids[t]] += dx
        grads.touched_services.append(fwd.ids[t])

    # goal gate (time-constant): g = sig(Wg r + bg), z = tanh(Wz r + bz)
    pre_g = dg_total * fwd.g * (1.0 - fwd.g)
    pre_z = dz_total * (1.0 - fwd.z ** 2)
    grads.w_g = np.outer(pre_g, instance.goal)
    grads.w_z = np.outer(pre_z, instance.goal)
    grads.b_g = pre_g
    grads.b_z = pre_z

    grads.touched_services = sorted(set(grads.touched_services))
    grads.touched_outputs = sorted(set(grads.touched_outputs))
    return grads


def _negative_sampler(
    vocabulary: tuple[str, ...],
    instances: list[TrainingInstance],
    smoothing: bool,
):
    """Eligible-service lists and sampling weights per instance, precomputed."""
    freq = {s: 1.0 for s in vocabulary}
    if smoothing:
        for inst in instances:
            freq[inst.target] = freq.get(inst.target, 1.0) + 1.0
    eligible_per_instance = []
    for inst in instances:
        barred = inst.excluded | {inst.target}
        eligible = [s for s in vocabulary if s not in barred]
        if smoothing:
            weights = np.array([freq[s] ** 0.75 for s in eligible])
            weights = weights / weights.sum() if len(eligible) else weights
        else:
            weights = None
        eligible_per_instance.append((eligible, weights))
    return eligible_per_instance


def _apply(params: ModelParameters, grads: Gradients, lr: float) -> None:
    """Gradient-ascent step; sparse on the embedding and output matrices."""
    for col in grads.touched_services:
        params.w_s[:, col] += lr * grads.w_s[:, col]
    for row in grads.touched_outputs:
        params.w_f[row] += lr * grads.w_f[row]
    for gate in GATE_NAMES:
        params.w_x[gate] += lr * grads.w_x[gate]
        params.w_h[gate] += lr * grads.w_h[gate]
        params.b[gate] += lr * grads.b[gate]
    params.w_g += lr * grads.w_g
    params.w_z += lr * grads.w_z
    params.b_g += lr * grads.b_g
    params.b_z += lr * grads.b_z
    params.attention += lr * grads.attention


def train(
    instances: list[TrainingInstance],
    vocabulary: tuple[str, ...],
    config: TrainConfig,
) -> tuple[ModelParameters, list[float]]:
    """Offline parameter learning by per-instance stochastic gradient ascent.

    Negatives are resampled uniformly (or frequency^0.75 weighted) from the
    eligible services each epoch. Stops when the relative change of the
    mean epoch objective falls below the tolerance, or after ``max_epochs``.
    Returns the parameters and the mean-objective history.
    """
    if not instances:
        raise TrainingError("training corpus is empty")
    for inst in instances:
        if inst.goal.shape != (config.dim,):
            raise TrainingError(
                f"instance goal vector has shape {inst.goal.shape}, expected ({config.dim},)"
            )

    params = init_parameters(vocabulary, config.dim, config.seed)
    rng = np.random.default_rng(config.seed + 1)
    eligible = _negative_sampler(vocabulary, instances, config.negative_smoothing)

    history: list[float] = []
    previous = None
    for epoch in range(config.max_epochs):
        total = 0.0
        for idx, inst in enumerate(instances):
            pool, weights = eligible[idx]
            if pool:
                k = min(config.negatives, len(pool))
                chosen = rng.choice(len(pool), size=k, replace=False, p=weights)
                negatives = tuple(pool[int(c)] for c in chosen)
            else:
                negatives = ()
            loss = instance_loss(params, inst, negatives)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, idx, f"objective = {loss}")
            grads = instance_gradients(params, inst, negatives)
            _apply(params, grads, config.learning_rate)
            total += loss
        if not params.all_finite():
            raise TrainingDivergedError(epoch, None, "non-finite parameter value")
        mean_objective = total / len(instances)
        history.append(mean_objective)
        logger.debug("epoch %d mean objective %.6f", epoch, mean_objective)
        if previous is not None:
            rel = abs(mean_objective - previous) / max(abs(previous), 1e-12)
            if rel < config.tolerance:
                logger.info("converged after %d epochs", epoch + 1)
                break
        previous = mean_objective
    return params, history


def parameters_fingerprint(params: ModelParameters) -> str:
    """Stable content hash of the parameter set (used in manifests)."""
    digest = hashlib.sha256()
    digest.update("\x00".join(params.vocabulary).encode("utf-8"))
    for name, arr in iter_arrays(params):
        digest.update(name.encode())
        digest.update(np.ascontiguousarray(arr).tobytes())
    return digest.hexdigest()


def clone_parameters(params: ModelParameters) -> ModelParameters:
    return replace(
        params,
        w_s=params.w_s.copy(),
        w_x={g: a.copy() for g, a in params.w_x.items()},
        w_h={g: a.copy() for g, a in params.w_h.items()},
        b={g: a.copy() for g, a in params.b.items()},
        w_g=params.w_g.copy(),
        w_z=params.w_z.copy(),
        b_g=params.b_g.copy(),
        b_z=params.b_z.copy(),
        attention=params.attention.copy(),
        w_f=params.w_f.copy(),
    )
