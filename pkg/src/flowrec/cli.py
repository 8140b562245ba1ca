"""Command-line entry point chaining the pipeline.

Subcommands: build-kg, gen-paths, train, evaluate, recommend, serve.
Every artifact-producing run writes a manifest (resolved configuration,
input fingerprints, seed, version, timestamp) next to its output; output
files themselves contain no timestamps, so identical inputs plus an
identical seed reproduce them byte for byte.

Exit codes: 0 success, 2 usage error, 1 validation or runtime error.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import sys
import time
from pathlib import Path

import click

from . import __version__
from .errors import FlowRecError
from .evaluation import EvalConfig, run_experiment
from .pipeline import generate_corpus, train_model
from .provenance import parse_repository
from .recommender import PartialWorkflow, recommend_next
from .seqmodel import TrainConfig
from .serialization import load_model, model_fingerprint, save_model
from .skg import build_skg, dump_skg

logger = logging.getLogger("flowrec")

_LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}


def _setup_logging() -> None:
    level = os.environ.get("FLOWREC_LOG", "error").lower()
    logging.basicConfig(
        level=_LOG_LEVELS.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(out: Path, subcommand: str, config: dict, inputs: list[Path], seed) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "seed": seed,
        "tool_version": __version__,
        "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
    }
    path = out.with_name(out.name + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_repo(path: str):
    return parse_repository(Path(path).read_bytes())


def _train_config(**kwargs) -> TrainConfig:
    return TrainConfig(
        learning_rate=kwargs["lr"],
        dim=kwargs["dim"],
        max_epochs=kwargs["epochs"],
        negatives=kwargs["negatives"],
        seed=kwargs["seed"],
        strategy=kwargs["strategy"],
        dedup=kwargs["dedup"],
        walk_length=kwargs["walk_length"],
        walks_per_service=kwargs["walks_per_service"],
        walk_mode=kwargs["mode"],
    )


@click.group()
@click.version_option(__version__)
def cli() -> None:
    """Next-service recommendation for DAG-structured scientific workflows."""
    _setup_logging()


_strategy = click.option("--strategy", type=click.Choice(["intra", "inter"]),
                         default="intra", show_default=True,
                         help="Composition path generation strategy.")
_dedup = click.option("--dedup", type=click.Choice(["keep", "remove"]),
                      default="keep", show_default=True,
                      help="Keep or remove duplicate composition paths.")
_walk_length = click.option("--walk-length", type=int, default=15, show_default=True,
                            help="Maximum services per inter-workflow walk.")
_walks = click.option("--walks-per-service", type=int, default=10, show_default=True,
                      help="Walks started at each service (inter strategy).")
_mode = click.option("--mode", type=click.Choice(["probabilistic", "uniform"]),
                     default="probabilistic", show_default=True,
                     help="Inter-workflow walk sampling mode.")
_seed = click.option("--seed", type=int, default=0, show_default=True,
                     help="Seed governing all randomness of the run.")


@cli.command("build-kg")
@click.option("--repo", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def build_kg(repo: str, out: str) -> None:
    """Build the service knowledge graph and dump it as TSV."""
    repository = _load_repo(repo)
    skg = build_skg(repository)
    out_path = Path(out)
    out_path.write_text(dump_skg(skg), encoding="utf-8")
    _write_manifest(out_path, "build-kg", {"repo": repo, "out": out}, [Path(repo)], None)
    click.echo(f"wrote {len(skg.relationships)} relationships to {out}")


@cli.command("gen-paths")
@click.option("--repo", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--excluded-out", type=click.Path(dir_okay=False), default=None,
              help="Optional line-aligned sidecar with each path's excluded set.")
@_strategy
@_dedup
@_walk_length
@_walks
@_mode
@_seed
def gen_paths(repo, out, excluded_out, strategy, dedup, walk_length,
              walks_per_service, mode, seed) -> None:
    """Generate the composition-path corpus (one path per line)."""
    repository = _load_repo(repo)
    skg = build_skg(repository)
    config = _train_config(lr=0.001, dim=128, epochs=1, negatives=1, seed=seed,
                           strategy=strategy, dedup=dedup, walk_length=walk_length,
                           walks_per_service=walks_per_service, mode=mode)
    paths = generate_corpus(skg, repository, config)
    out_path = Path(out)
    out_path.write_text(
        "".join(" ".join(p.services) + "\n" for p in paths), encoding="utf-8"
    )
    if excluded_out:
        workflows = {wf.id: wf for wf in repository.workflows}
        lines = []
        for p in paths:
            wf = workflows.get(p.source_workflow) if p.origin == "intra" else None
            if wf is not None:
                excluded = sorted(frozenset(wf.service_ids) - set(p.services))
            else:
                excluded = sorted(p.services)
            lines.append(" ".join(excluded) + "\n")
        Path(excluded_out).write_text("".join(lines), encoding="utf-8")
    resolved = {"repo": repo, "out": out, "strategy": strategy, "dedup": dedup,
                "walk_length": walk_length, "walks_per_service": walks_per_service,
                "mode": mode, "seed": seed}
    _write_manifest(out_path, "gen-paths", resolved, [Path(repo)], seed)
    click.echo(f"wrote {len(paths)} composition paths to {out}")


@cli.command("train")
@click.option("--repo", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--dim", type=int, default=128, show_default=True,
              help="Embedding / hidden dimension d.")
@click.option("--lr", type=float, default=0.001, show_default=True,
              help="Learning rate.")
@click.option("--epochs", type=int, default=20, show_default=True,
              help="Maximum training iterations over the corpus.")
@click.option("--negatives", type=int, default=5, show_default=True,
              help="Negative samples per training instance.")
@_strategy
@_dedup
@_walk_length
@_walks
@_mode
@_seed
def train_cmd(repo, out, dim, lr, epochs, negatives, strategy, dedup,
              walk_length, walks_per_service, mode, seed) -> None:
    """Train the recommendation model on a workflow repository."""
    repository = _load_repo(repo)
    config = _train_config(lr=lr, dim=dim, epochs=epochs, negatives=negatives,
                           seed=seed, strategy=strategy, dedup=dedup,
                           walk_length=walk_length,
                           walks_per_service=walks_per_service, mode=mode)
    model = train_model(repository, config)
    data = save_model(model)
    out_path = Path(out)
    out_path.write_bytes(data)
    resolved = {"repo": repo, "out": out, "dim": dim, "lr": lr, "epochs": epochs,
                "negatives": negatives, "strategy": strategy, "dedup": dedup,
                "walk_length": walk_length, "walks_per_service": walks_per_service,
                "mode": mode, "seed": seed}
    _write_manifest(out_path, "train", resolved, [Path(repo)], seed)
    click.echo(f"model written to {out} (fingerprint {model_fingerprint(data)[:12]})")


@cli.command("evaluate")
@click.option("--repo", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--train-fraction", type=float, default=0.8, show_default=True)
@click.option("--dim", type=int, default=128, show_default=True)
@click.option("--lr", type=float, default=0.001, show_default=True)
@click.option("--epochs", type=int, default=20, show_default=True)
@click.option("--negatives", type=int, default=5, show_default=True)
@_strategy
@_dedup
@_walk_length
@_walks
@_mode
@_seed
def evaluate(repo, out, train_fraction, dim, lr, epochs, negatives, strategy,
             dedup, walk_length, walks_per_service, mode, seed) -> None:
    """Split, train, and report Recall@K / MRR / Diversity@K."""
    repository = _load_repo(repo)
    config = _train_config(lr=lr, dim=dim, epochs=epochs, negatives=negatives,
                           seed=seed, strategy=strategy, dedup=dedup,
                           walk_length=walk_length,
                           walks_per_service=walks_per_service, mode=mode)
    report = run_experiment(
        repository, config, EvalConfig(train_fraction=train_fraction, seed=seed)
    )
    out_path = Path(out)
    out_path.write_text(
        json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    resolved = {"repo": repo, "out": out, "train_fraction": train_fraction,
                "dim": dim, "lr": lr, "epochs": epochs, "negatives": negatives,
                "strategy": strategy, "dedup": dedup, "walk_length": walk_length,
                "walks_per_service": walks_per_service, "mode": mode, "seed": seed}
    _write_manifest(out_path, "evaluate", resolved, [Path(repo)], seed)
    click.echo(report.render_table())


@cli.command("recommend")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--workflow", "workflow_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Partial workflow JSON: {goal, services: [id...], edges: [{source, sink}]}.")
@click.option("--anchor", required=True, help="Anchor service id to extend.")
@click.option("--top-k", type=int, default=5, show_default=True)
def recommend(model_path, workflow_path, anchor, top_k) -> None:
    """Print ranked next-service candidates for an anchor."""
    model = load_model(Path(model_path).read_bytes())
    raw = json.loads(Path(workflow_path).read_text(encoding="utf-8"))
    services = tuple(raw.get("services", []))
    if services and isinstance(services[0], dict):
        services = tuple(s["id"] for s in raw["services"])
    edges = tuple((e["source"], e["sink"]) for e in raw.get("edges", []))
    pw = PartialWorkflow(services=services, edges=edges, goal=raw.get("goal", ""))
    rec = recommend_next(model, pw, anchor, top_k)
    click.echo(f"anchor: {anchor}")
    click.echo(f"{'rank':<6}{'service':<24}{'name':<32}probability")
    for rank, (sid, prob) in enumerate(rec.candidates, start=1):
        name = model.service_names.get(sid, "")
        click.echo(f"{rank:<6}{sid:<24}{name:<32}{prob:.6f}")


@cli.command("serve")
@click.option("--model", "model_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--ui-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Directory of static composer UI assets to serve at /.")
@click.option("--session-ttl", type=int, default=3600, show_default=True,
              help="Idle seconds before a session is evicted.")
def serve(model_path, host, port, ui_dir, session_ttl) -> None:
    """Serve the recommend-as-you-go HTTP API."""
    import uvicorn

    from .api.app import create_app

    data = Path(model_path).read_bytes()
    app = create_app(load_model(data), fingerprint=model_fingerprint(data),
                     session_ttl=session_ttl, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level=os.environ.get("FLOWREC_LOG", "error"))


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.exceptions.Exit as exc:  # --help / --version
        sys.exit(exc.exit_code)
    except click.exceptions.Abort:
        sys.exit(1)
    except click.UsageError as exc:
        exc.show()
        sys.exit(2)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except FlowRecError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    except (OSError, ValueError, KeyError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
