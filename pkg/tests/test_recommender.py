"""Anchor-path extraction and online recommendation."""

import numpy as np
import pytest

from flowrec.errors import CycleError, UnknownServiceError
from flowrec.recommender import (
    PartialWorkflow,
    aggregate_distribution,
    extract_anchor_paths,
    recommend_next,
)
from flowrec.seqmodel import context_vector, encode_path, predict_probabilities

from conftest import WF941_EDGES


def _pw941(goal="extract peaks"):
    services = tuple(f"s{i}" for i in range(1, 8))
    return PartialWorkflow(services=services, edges=tuple(WF941_EDGES), goal=goal)


# --- partial workflow validation ---------------------------------------------

def test_partial_workflow_rejects_cycle():
    with pytest.raises(CycleError):
        PartialWorkflow(services=("A", "B"), edges=(("A", "B"), ("B", "A")))


def test_partial_workflow_rejects_duplicates_and_unknown_edges():
    with pytest.raises(ValueError, match="duplicate service"):
        PartialWorkflow(services=("A", "A"), edges=())
    with pytest.raises(ValueError, match="undeclared"):
        PartialWorkflow(services=("A",), edges=(("A", "B"),))
    with pytest.raises(ValueError, match="duplicate edge"):
        PartialWorkflow(services=("A", "B"), edges=(("A", "B"), ("A", "B")))


# --- anchor paths -------------------------------------------------------------

def test_anchor_paths_maximal_only():
    pw = _pw941()
    assert extract_anchor_paths(pw, "s4") == [("s1", "s2", "s4")]


def test_anchor_paths_lone_anchor():
    pw = PartialWorkflow(services=("A",), edges=())
    assert extract_anchor_paths(pw, "A") == [("A",)]


def test_anchor_paths_diamond():
    pw = _pw941()
    assert extract_anchor_paths(pw, "s6") == [("s1", "s2", "s4", "s6"), ("s3", "s6")]


def test_anchor_paths_unknown_anchor():
    pw = _pw941()
    with pytest.raises(UnknownServiceError):
        extract_anchor_paths(pw, "s99")


# --- recommendation -----------------------------------------------------------

def test_aggregate_is_mean_of_per_path_distributions(toy_model):
    params = toy_model.params
    pw = PartialWorkflow(
        services=("t00", "t01", "t02", "t03"),
        edges=(("t00", "t01"), ("t01", "t02"), ("t02", "t03"), ("t00", "t03")),
        goal="",
    )
    anchor = "t03"
    goal_vec = np.zeros(params.d)
    paths = extract_anchor_paths(pw, anchor)
    assert len(paths) == 2
    expected = np.zeros(len(params.vocabulary))
    for path in paths:
        hs = encode_path(params, path, goal_vec)
        v = context_vector(params, hs, pw.service_set - set(path))
        expected += predict_probabilities(params, v)
    expected /= len(paths)
    got = aggregate_distribution(toy_model, pw, anchor, goal_vector=goal_vec)
    assert np.allclose(got, expected, atol=0)
    assert float(got.sum()) == pytest.approx(1.0, abs=1e-9)


def test_recommend_excludes_composed_services(toy_model):
    pw = PartialWorkflow(
        services=("t00", "t01", "t02"),
        edges=(("t00", "t01"), ("t01", "t02")),
        goal="chain analysis",
    )
    rec = recommend_next(toy_model, pw, "t02", k=10)
    assert set(rec.ids()).isdisjoint(pw.service_set)
    assert len(rec.candidates) == 10


def test_recommend_truncates_to_eligible_count(toy_model):
    vocab = toy_model.params.vocabulary
    services = tuple(vocab[:28])  # leaves two eligible services
    edges = tuple((services[i], services[i + 1]) for i in range(len(services) - 1))
    pw = PartialWorkflow(services=services, edges=edges)
    rec = recommend_next(toy_model, pw, services[-1], k=10)
    assert len(rec.candidates) == 2


def test_recommend_deterministic(toy_model):
    pw = PartialWorkflow(services=("t04", "t05"), edges=(("t04", "t05"),), goal="chain")
    first = recommend_next(toy_model, pw, "t05", k=5)
    second = recommend_next(toy_model, pw, "t05", k=5)
    assert first == second


def test_recommend_probabilities_descending_with_id_tiebreak(toy_model):
    pw = PartialWorkflow(services=("t10",), edges=())
    rec = recommend_next(toy_model, pw, "t10", k=len(toy_model.params.vocabulary))
    probs = [p for _, p in rec.candidates]
    assert probs == sorted(probs, reverse=True)
    for (id_a, p_a), (id_b, p_b) in zip(rec.candidates, rec.candidates[1:]):
        if p_a == p_b:
            assert id_a < id_b


def test_single_anchor_path_ordering_matches_prediction(toy_model):
    params = toy_model.params
    pw = PartialWorkflow(
        services=("t06", "t07", "t08"),
        edges=(("t06", "t07"), ("t07", "t08")),
        goal="",
    )
    rec = recommend_next(toy_model, pw, "t08", k=5, goal_vector=np.zeros(params.d))
    hs = encode_path(params, ("t06", "t07", "t08"), np.zeros(params.d))
    v = context_vector(params, hs, frozenset())
    probs = predict_probabilities(params, v)
    eligible = [
        (sid, float(probs[i]))
        for i, sid in enumerate(params.vocabulary)
        if sid not in pw.service_set
    ]
    eligible.sort(key=lambda item: (-item[1], item[0]))
    assert rec.candidates == tuple(eligible[:5])


def test_overfit_anchor_predicts_unique_successor(toy_model):
    # t06 ends training contexts (chain t02..t07) and is always followed by t07
    pw = PartialWorkflow(
        services=("t04", "t05", "t06"),
        edges=(("t04", "t05"), ("t05", "t06")),
        goal="chain analysis stage 2 pipeline",
    )
    rec = recommend_next(toy_model, pw, "t06", k=3)
    assert rec.ids()[0] == "t07"


def test_recommend_validates_inputs(toy_model):
    pw = PartialWorkflow(services=("t00",), edges=())
    with pytest.raises(ValueError):
        recommend_next(toy_model, pw, "t00", k=0)
    with pytest.raises(UnknownServiceError):
        recommend_next(toy_model, pw, "zz", k=1)
