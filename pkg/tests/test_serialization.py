"""Model persistence: canonical bytes, round trips, determinism."""

import numpy as np
import pytest

from flowrec import TrainConfig, load_model, recommend_next, save_model
from flowrec.errors import ModelFormatError
from flowrec.pipeline import train_model
from flowrec.recommender import PartialWorkflow
from flowrec.goalvec import GoalEmbedderConfig, infer_goal_vector


@pytest.fixture(scope="module")
def small_model(two_workflow_repo_module):
    config = TrainConfig(learning_rate=0.05, dim=8, max_epochs=4, negatives=2, seed=5)
    return train_model(
        two_workflow_repo_module, config, embedder_config=GoalEmbedderConfig(epochs=3)
    )


@pytest.fixture(scope="module")
def two_workflow_repo_module():
    from conftest import make_workflow, repo_doc
    from flowrec import parse_repository

    return parse_repository(repo_doc([
        make_workflow("w1", "align sequences", [("A", "B"), ("B", "C")]),
        make_workflow("w2", "plot charts", [("A", "B"), ("B", "D")]),
    ]))


def test_save_load_save_byte_identical(small_model):
    data = save_model(small_model)
    reloaded = load_model(data)
    assert save_model(reloaded) == data


def test_reload_preserves_predictions_bit_exactly(small_model):
    pw = PartialWorkflow(services=("A", "B"), edges=(("A", "B"),), goal="align")
    before = recommend_next(small_model, pw, "B", 3)
    reloaded = load_model(save_model(small_model))
    after = recommend_next(reloaded, pw, "B", 3)
    assert before == after
    goal_before = infer_goal_vector(small_model.goal_embedder, "align sequences")
    goal_after = infer_goal_vector(reloaded.goal_embedder, "align sequences")
    assert np.array_equal(goal_before, goal_after)


def test_fixed_seed_training_is_bit_identical(two_workflow_repo_module):
    config = TrainConfig(learning_rate=0.05, dim=8, max_epochs=4, negatives=2, seed=5)
    emb = GoalEmbedderConfig(epochs=3)
    first = save_model(train_model(two_workflow_repo_module, config, embedder_config=emb))
    second = save_model(train_model(two_workflow_repo_module, config, embedder_config=emb))
    assert first == second


def test_vocabulary_order_survives_round_trip(small_model):
    reloaded = load_model(save_model(small_model))
    assert reloaded.params.vocabulary == small_model.params.vocabulary
    assert np.array_equal(reloaded.params.w_s, small_model.params.w_s)
    assert np.array_equal(reloaded.params.w_f, small_model.params.w_f)
    assert reloaded.train_config == small_model.train_config
    assert reloaded.corpus_fingerprint == small_model.corpus_fingerprint


def test_unsupported_version_rejected(small_model):
    data = save_model(small_model).decode()
    tampered = data.replace('"format_version":1', '"format_version":99')
    with pytest.raises(ModelFormatError, match="version"):
        load_model(tampered)


def test_malformed_model_rejected():
    with pytest.raises(ModelFormatError, match="JSON"):
        load_model(b"{broken")
