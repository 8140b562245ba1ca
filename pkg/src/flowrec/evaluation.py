"""Recommendation metrics and the desk-scale experiment harness.

For every workflow in the test split, each of its services acts as an
anchor; the anchor's sink services inside the workflow are the accuracy
ground truth and its sink services in the knowledge graph are the
diversity ground truth. Metrics are averaged per workflow and then over
workflows; the pooled per-anchor average is reported alongside since the
two aggregations differ in general.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .pathgen import generate_intra_paths
from .pipeline import train_model
from .provenance import Repository, Workflow, split_repository, unseen_services
from .recommender import PartialWorkflow, recommend_next
from .seqmodel import TrainConfig
from .serialization import TrainedModel
from .skg import build_skg

logger = logging.getLogger(__name__)

__all__ = [
    "EvalConfig",
    "EvalReport",
    "recall_at_k",
    "mrr",
    "diversity_at_k",
    "run_experiment",
]

DEFAULT_KS = (3, 5, 10, 20)


def recall_at_k(recommended: list[str] | tuple[str, ...], ground_truth: set[str], k: int) -> float:
    """|top-K intersecting the ground truth| / |ground truth|."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not ground_truth:
        raise ValueError("ground truth set is empty")
    hits = sum(1 for sid in recommended[:k] if sid in ground_truth)
    return hits / len(ground_truth)


def mrr(recommended: list[str] | tuple[str, ...], ground_truth: set[str]) -> float:
    """Reciprocal rank of the first recommended service hitting the ground
    truth; 0 when nothing in the list hits."""
    if not ground_truth:
        raise ValueError("ground truth set is empty")
    for rank, sid in enumerate(recommended, start=1):
        if sid in ground_truth:
            return 1.0 / rank
    return 0.0


def diversity_at_k(
    recommended: list[str] | tuple[str, ...], skg_sinks: set[str], k: int
) -> float:
    """|top-K intersecting the anchor's knowledge-graph sinks| / |sinks|."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not skg_sinks:
        raise ValueError("anchor has no sink services in the knowledge graph")
    hits = sum(1 for sid in recommended[:k] if sid in skg_sinks)
    return hits / len(skg_sinks)


@dataclass(frozen=True)
class EvalConfig:
    train_fraction: float = 0.8
    seed: int = 0
    ks: tuple[int, ...] = DEFAULT_KS


@dataclass
class EvalReport:
    """Aggregated metrics plus the configuration and corpus statistics."""

    recall: dict[int, float]
    diversity: dict[int, float]
    mrr: float
    per_anchor_recall: dict[int, float]
    per_anchor_diversity: dict[int, float]
    per_anchor_mrr: float
    per_workflow: list[dict]
    corpus_stats: dict
    config: dict
    anchors_evaluated: int = 0
    anchors_skipped_no_ground_truth: int = 0
    anchors_skipped_no_skg_sinks: int = 0
    anchors_skipped_unseen: int = 0
    workflows_skipped: int = 0

    def to_dict(self) -> dict:
        return {
            "recall_at_k": {str(k): v for k, v in self.recall.items()},
            "diversity_at_k": {str(k): v for k, v in self.diversity.items()},
            "mrr": self.mrr,
            "per_anchor": {
                "recall_at_k": {str(k): v for k, v in self.per_anchor_recall.items()},
                "diversity_at_k": {str(k): v for k, v in self.per_anchor_diversity.items()},
                "mrr": self.per_anchor_mrr,
            },
            "per_workflow": self.per_workflow,
            "corpus_stats": self.corpus_stats,
            "config": self.config,
            "counts": {
                "anchors_evaluated": self.anchors_evaluated,
                "anchors_skipped_no_ground_truth": self.anchors_skipped_no_ground_truth,
                "anchors_skipped_no_skg_sinks": self.anchors_skipped_no_skg_sinks,
                "anchors_skipped_unseen": self.anchors_skipped_unseen,
                "workflows_skipped": self.workflows_skipped,
            },
            "aggregation": "mean of per-workflow means; per_anchor pools all anchors",
        }

    def render_table(self) -> str:
        lines = ["metric          " + "".join(f"K={k:<8}" for k in sorted(self.recall))]
        lines.append(
            "Recall@K        "
            + "".join(f"{self.recall[k]:<10.4f}" for k in sorted(self.recall))
        )
        lines.append(
            "Diversity@K     "
            + "".join(f"{self.diversity[k]:<10.4f}" for k in sorted(self.diversity))
        )
        lines.append(f"MRR             {self.mrr:.4f}")
        lines.append(f"anchors evaluated: {self.anchors_evaluated}")
        return "\n".join(lines)


def corpus_statistics(repo: Repository) -> dict:
    """Repository statistics analogous to the dataset summary table."""
    skg = build_skg(repo)
    n_wf = len(repo.workflows)
    n_services = len(repo.services)
    services_per_wf = (
        sum(len(wf.services) for wf in repo.workflows) / n_wf if n_wf else 0.0
    )
    with_sinks = [u for u in repo.services if skg.successors(u)]
    sinks_per_service = (
        sum(len(skg.successors(u)) for u in with_sinks) / n_services if n_services else 0.0
    )
    all_paths = []
    for wf in repo.workflows:
        all_paths.extend(generate_intra_paths(skg, wf.id))
    paths_per_wf = len(all_paths) / n_wf if n_wf else 0.0
    avg_len = (
        sum(len(p.services) for p in all_paths) / len(all_paths) if all_paths else 0.0
    )
    return {
        "total_workflows": n_wf,
        "total_services": n_services,
        "avg_services_per_workflow": services_per_wf,
        "avg_sink_services_per_service": sinks_per_service,
        "avg_intra_paths_per_workflow": paths_per_wf,
        "avg_composition_path_length": avg_len,
    }


def _ancestor_subgraph(wf: Workflow, anchor: str, keep: set[str]) -> PartialWorkflow | None:
    """The partial workflow visible when the anchor was the frontier.

    Ancestors of the anchor (restricted to services the model knows) with
    their induced edges; None if the anchor itself is unknown.
    """
    if anchor not in keep:
        return None
    ancestors = {anchor}
    frontier = [anchor]
    while frontier:
        node = frontier.pop()
        for pred in wf.predecessors(node):
            if pred in keep and pred not in ancestors:
                ancestors.add(pred)
                frontier.append(pred)
    nodes = tuple(sorted(ancestors))
    edges = tuple((u, v) for u, v in wf.edges if u in ancestors and v in ancestors)
    return PartialWorkflow(services=nodes, edges=edges, goal=wf.goal)


def run_experiment(
    repo: Repository,
    train_config: TrainConfig,
    eval_config: EvalConfig | None = None,
    model: TrainedModel | None = None,
) -> EvalReport:
    """Split, train (unless a model is supplied), and evaluate.

    Test anchors whose services were never seen in training are skipped
    (the model cannot represent them), as are anchors with no in-workflow
    sinks after the unseen holdout.
    """
    eval_config = eval_config or EvalConfig()
    train_repo, test_repo = split_repository(
        repo, eval_config.train_fraction, eval_config.seed
    )
    unseen = unseen_services(train_repo, test_repo)
    if model is None:
        model = train_model(train_repo, train_config)
    skg = build_skg(train_repo)
    known = set(model.params.vocabulary)
    ks = tuple(sorted(eval_config.ks))
    full_k = len(model.params.vocabulary)

    per_workflow_rows: list[dict] = []
    pooled = {k: [] for k in ks}
    pooled_div = {k: [] for k in ks}
    pooled_mrr: list[float] = []
    skipped_gt = skipped_sinks = skipped_unseen = workflows_skipped = 0
    evaluated = 0

    for wf in test_repo.workflows:
        wf_unseen = unseen.get(wf.id, frozenset())
        keep = {sid for sid in wf.service_ids if sid not in wf_unseen and sid in known}
        anchor_recalls = {k: [] for k in ks}
        anchor_divs = {k: [] for k in ks}
        anchor_mrrs: list[float] = []
        for anchor in sorted(wf.service_ids):
            if anchor not in keep:
                skipped_unseen += 1
                continue
            ground_truth = {v for u, v in wf.edges if u == anchor and v in keep}
            if not ground_truth:
                skipped_gt += 1
                continue
            pw = _ancestor_subgraph(wf, anchor, keep)
            rec = recommend_next(model, pw, anchor, k=full_k)
            ranked = rec.ids()
            for k in ks:
                anchor_recalls[k].append(recall_at_k(ranked, ground_truth, k))
            anchor_mrrs.append(mrr(ranked, ground_truth))
            skg_sinks = set(skg.successors(anchor))
            if skg_sinks:
                for k in ks:
                    anchor_divs[k].append(diversity_at_k(ranked, skg_sinks, k))
            else:
                skipped_sinks += 1
            evaluated += 1

        if not anchor_mrrs:
            workflows_skipped += 1
            continue
        row = {
            "workflow_id": wf.id,
            "anchors": len(anchor_mrrs),
            "recall_at_k": {
                str(k): sum(anchor_recalls[k]) / len(anchor_recalls[k]) for k in ks
            },
            "mrr": sum(anchor_mrrs) / len(anchor_mrrs),
            "diversity_at_k": {
                str(k): (sum(anchor_divs[k]) / len(anchor_divs[k]))
                for k in ks
                if anchor_divs[k]
            },
        }
        per_workflow_rows.append(row)
        for k in ks:
            pooled[k].extend(anchor_recalls[k])
            pooled_div[k].extend(anchor_divs[k])
        pooled_mrr.extend(anchor_mrrs)

    if not per_workflow_rows:
        raise ValueError("test set is empty after the unseen-service holdout")

    def _mean(values: list[float]) -> float:
        return sum(values) / len(values) if values else 0.0

    recall_means = {
        k: _mean([row["recall_at_k"][str(k)] for row in per_workflow_rows]) for k in ks
    }
    div_means = {
        k: _mean([
            row["diversity_at_k"][str(k)]
            for row in per_workflow_rows
            if str(k) in row["diversity_at_k"]
        ])
        for k in ks
    }
    mrr_mean = _mean([row["mrr"] for row in per_workflow_rows])

    return EvalReport(
        recall=recall_means,
        diversity=div_means,
        mrr=mrr_mean,
        per_anchor_recall={k: _mean(pooled[k]) for k in ks},
        per_anchor_diversity={k: _mean(pooled_div[k]) for k in ks},
        per_anchor_mrr=_mean(pooled_mrr),
        per_workflow=per_workflow_rows,
        corpus_stats=corpus_statistics(repo),
        config={
            "train_fraction": eval_config.train_fraction,
            "seed": eval_config.seed,
            "ks": list(ks),
            "strategy": train_config.strategy,
            "dedup": train_config.dedup,
            "walk_length": train_config.walk_length,
            "walks_per_service": train_config.walks_per_service,
            "dim": train_config.dim,
            "learning_rate": train_config.learning_rate,
            "max_epochs": train_config.max_epochs,
            "negatives": train_config.negatives,
        },
        anchors_evaluated=evaluated,
        anchors_skipped_no_ground_truth=skipped_gt,
        anchors_skipped_no_skg_sinks=skipped_sinks,
        anchors_skipped_unseen=skipped_unseen,
        workflows_skipped=workflows_skipped,
    )
