"""Shared fixtures: reference topologies and the overfit toy corpus."""

from __future__ import annotations

import json

import pytest


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for status, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for report in terminalreporter.stats.get(status, []):
            if "test_acceptance.py::test_criterion" in report.nodeid:
                name = report.nodeid.split("::", 1)[1]
                lines.append((name, label))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, label in sorted(lines):
            terminalreporter.write_line(f"{label}  {name}")

from flowrec import TrainConfig, parse_repository
from flowrec.goalvec import GoalEmbedderConfig
from flowrec.pipeline import train_model


def repo_doc(workflows: list[dict]) -> bytes:
    return json.dumps({"workflows": workflows}).encode("utf-8")


def make_workflow(wf_id: str, goal: str, edges: list[tuple[str, str]],
                  extra_services: list[str] = ()) -> dict:
    ids = sorted({u for u, _ in edges} | {v for _, v in edges} | set(extra_services))
    return {
        "id": wf_id,
        "goal": goal,
        "services": [{"id": s, "name": f"svc {s}"} for s in ids],
        "edges": [{"source": u, "sink": v} for u, v in edges],
    }


# Reference 7-service topology: s1->s2->s4->{s6,s7}, s3->s6, s5->s7.
WF941_EDGES = [
    ("s1", "s2"), ("s2", "s4"), ("s4", "s6"), ("s4", "s7"),
    ("s3", "s6"), ("s5", "s7"),
]

WF941_PATHS = {
    ("s1", "s2", "s4", "s6"),
    ("s1", "s2", "s4", "s7"),
    ("s3", "s6"),
    ("s5", "s7"),
    ("s2", "s4", "s6"),
    ("s2", "s4", "s7"),
    ("s4", "s6"),
    ("s4", "s7"),
}


@pytest.fixture
def wf941_repo():
    return parse_repository(repo_doc([make_workflow("941", "extract peaks", WF941_EDGES)]))


@pytest.fixture
def two_workflow_repo():
    return parse_repository(repo_doc([
        make_workflow("w1", "align sequences", [("A", "B"), ("B", "C")]),
        make_workflow("w2", "plot charts", [("A", "B"), ("B", "D")]),
    ]))


def toy_chain_workflows(n_workflows: int = 20, n_services: int = 30) -> list[dict]:
    """Chains over services t00..t29 where t_i is always followed by t_{i+1}.

    Every service has a deterministic successor, so a model that overfits
    the corpus can always rank the true next service first.
    """
    def sid(i: int) -> str:
        return f"t{i:02d}"

    workflows = []
    used = set()
    for j in range(n_workflows):
        length = 3 + (j % 4)
        start = (j * 7) % (n_services - length + 1)
        used.update(range(start, start + length))
        edges = [(sid(i), sid(i + 1)) for i in range(start, start + length - 1)]
        workflows.append(
            make_workflow(f"wf{j:02d}", f"chain analysis stage {start} pipeline", edges)
        )
    assert used == set(range(n_services)), "toy corpus must cover every service"
    return workflows


@pytest.fixture(scope="session")
def toy_repo():
    return parse_repository(repo_doc(toy_chain_workflows()))


@pytest.fixture(scope="session")
def toy_config():
    return TrainConfig(
        learning_rate=0.05,
        dim=32,
        max_epochs=200,
        negatives=5,
        seed=7,
        strategy="intra",
        dedup="keep",
        tolerance=1e-6,
    )


@pytest.fixture(scope="session")
def toy_model(toy_repo, toy_config):
    """Model overfit on the deterministic-successor corpus (shared; ~seconds)."""
    embedder_config = GoalEmbedderConfig(epochs=5)
    return train_model(toy_repo, toy_config, embedder_config=embedder_config)
