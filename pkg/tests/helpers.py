"""Oracles shared between unit tests and the acceptance suite."""

from __future__ import annotations

import numpy as np

from flowrec.pathgen import TrainingInstance
from flowrec.seqmodel import (
    ModelParameters,
    init_parameters,
    instance_gradients,
    instance_loss,
    iter_arrays,
    iter_gradient_arrays,
)


def reference_plain_lstm(params: ModelParameters, services, goal=None) -> list[np.ndarray]:
    """Independent standard-LSTM forward pass (no goal gate), from zeros."""
    def sig(x):
        return 1.0 / (1.0 + np.exp(-x))

    h = np.zeros(params.d)
    c = np.zeros(params.d)
    outputs = []
    for sid in services:
        x = params.w_s[:, params.index[sid]]
        f = sig(params.w_x["f"] @ x + params.w_h["f"] @ h + params.b["f"])
        i = sig(params.w_x["i"] @ x + params.w_h["i"] @ h + params.b["i"])
        l = np.tanh(params.w_x["l"] @ x + params.w_h["l"] @ h + params.b["l"])
        c = f * c + i * l
        o = sig(params.w_x["o"] @ x + params.w_h["o"] @ h + params.b["o"])
        h = o * np.tanh(c)
        outputs.append(h)
    return outputs


def max_gradient_relative_error(
    params: ModelParameters,
    instance: TrainingInstance,
    negatives: tuple[str, ...],
    eps: float = 1e-5,
    floor: float = 1e-6,
) -> float:
    """Largest elementwise relative error of the analytic gradients against
    central finite differences of the instance loss."""
    grads = instance_gradients(params, instance, negatives)
    worst = 0.0
    for (name, p_arr), (gname, g_arr) in zip(
        iter_arrays(params), iter_gradient_arrays(grads)
    ):
        assert name == gname
        it = np.nditer(p_arr, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = p_arr[idx]
            p_arr[idx] = orig + eps
            loss_plus = instance_loss(params, instance, negatives)
            p_arr[idx] = orig - eps
            loss_minus = instance_loss(params, instance, negatives)
            p_arr[idx] = orig
            numeric = (loss_plus - loss_minus) / (2.0 * eps)
            analytic = g_arr[idx]
            rel = abs(numeric - analytic) / max(floor, abs(numeric), abs(analytic))
            worst = max(worst, rel)
    return worst


def random_gradient_case(seed: int, d: int = 8, path_len: int = 4, k: int = 3):
    """A random parameter set and training instance for gradient checking."""
    rng = np.random.default_rng(seed)
    vocab = tuple(f"s{i:02d}" for i in range(12))
    params = init_parameters(vocab, d, seed=seed)
    chosen = rng.permutation(len(vocab))
    context = tuple(vocab[i] for i in chosen[:path_len])
    target = vocab[chosen[path_len]]
    n_excluded = int(rng.integers(0, 3))
    excluded = frozenset(vocab[i] for i in chosen[path_len + 1: path_len + 1 + n_excluded])
    negatives = tuple(
        vocab[i] for i in chosen[path_len + 1 + n_excluded: path_len + 1 + n_excluded + k]
    )
    instance = TrainingInstance(
        context=context,
        target=target,
        excluded=excluded,
        goal=rng.normal(size=d),
    )
    return params, instance, negatives


def training_recall_at_1(model, instances) -> float:
    """Fraction of training instances whose target tops the full distribution."""
    from flowrec.seqmodel import context_vector, encode_path, predict_probabilities

    params = model.params
    hits = 0
    for inst in instances:
        hs = encode_path(params, inst.context, inst.goal)
        v = context_vector(params, hs, inst.excluded)
        probs = predict_probabilities(params, v)
        best = params.vocabulary[int(np.argmax(probs))]
        hits += best == inst.target
    return hits / len(instances)
