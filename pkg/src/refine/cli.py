"""Command line entry points.

The CLI is a thin client over the same pipeline the HTTP service runs:
`index build` ingests TEI papers, `analyze` does a headless end-to-end
run into a session file, `retrieve` ranks papers for a context, and
`serve` starts the HTTP API.
"""
from __future__ import annotations

import json
from pathlib import Path

import click

from .config import Config, build_provider, load_config
from .context import DIMENSIONS, DesignContext
from .errors import RefineError
from .index import build_index, load_index, save_index
from .papers import ingest_paper
from .retrieval import build_query, rank_papers
from .session import (
    deterministic_session_id,
    new_session,
    run_full,
    save_session,
)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              default=None, help="JSON config file.")
@click.pass_context
def main(ctx: click.Context, config_path: str | None) -> None:
    """Turn a paper corpus into ranked, clustered design insights
    for a UI mockup."""
    try:
        ctx.obj = load_config(config_path)
    except (OSError, ValueError) as exc:
        raise click.ClickException(str(exc))


@main.group()
def index() -> None:
    """Build and inspect paper indexes."""


@index.command("build")
@click.option("--tei-dir", required=True,
              type=click.Path(exists=True, file_okay=False),
              help="Directory of TEI XML papers.")
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False), help="Index file to write.")
@click.pass_obj
def index_build(config: Config, tei_dir: str, out_path: str) -> None:
    """Extract contexts and implications from TEI papers and embed them."""
    provider = build_provider(config)
    paths = sorted(p for p in Path(tei_dir).iterdir()
                   if p.suffix.lower() == ".xml")
    if not paths:
        raise click.ClickException(f"no .xml files under {tei_dir}")
    records = []
    skipped = 0
    for path in paths:
        try:
            records.append(ingest_paper(path, provider))
        except RefineError as exc:
            skipped += 1
            click.echo(f"skipping {path.name}: {exc}", err=True)
    try:
        built = build_index(records, provider)
        save_index(built, out_path)
    except RefineError as exc:
        raise click.ClickException(str(exc))
    excluded = sum(1 for r in records if r.excluded_from_index)
    click.echo(f"indexed {len(built.entries)} papers -> {out_path}")
    if skipped or excluded:
        click.echo(f"({skipped} unparseable, {excluded} without any "
                   "context dimension)", err=True)


@index.command("inspect")
@click.argument("index_file", type=click.Path(exists=True, dir_okay=False))
def index_inspect(index_file: str) -> None:
    """Print an index summary: header fields and per-paper coverage."""
    try:
        loaded = load_index(index_file)
    except RefineError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"schema_version: {loaded.schema_version}")
    click.echo(f"created_at:     {loaded.created_at}")
    click.echo(f"embedding_dim:  {loaded.embedding_dim}")
    click.echo(f"papers:         {len(loaded.entries)}")
    for entry in loaded.entries:
        present = [e.dimension_name for e in entry.embeddings if e.is_present]
        click.echo(f"  {entry.paper_id}  dims={len(present)}/6 "
                   f"implications={len(entry.implications)}  "
                   f"[{', '.join(present)}]")


def _load_context_arg(raw: str) -> DesignContext:
    """Accept either a JSON file path or an inline JSON object."""
    path = Path(raw)
    if path.is_file():
        raw = path.read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"--context is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise click.ClickException("--context must be a JSON object")
    unknown = set(data) - set(DIMENSIONS) - {"origin"}
    if unknown:
        raise click.ClickException(
            f"unknown context keys: {', '.join(sorted(unknown))}")
    return DesignContext.from_dict(data, origin="mockup")


@main.command()
@click.option("--index", "index_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--context", "context_arg", required=True,
              help="Design context as inline JSON or a JSON file path.")
@click.option("--top-k", type=click.IntRange(min=1), default=None)
@click.pass_obj
def retrieve(config: Config, index_path: str, context_arg: str,
             top_k: int | None) -> None:
    """Rank index papers against a design context; print JSON."""
    context = _load_context_arg(context_arg)
    provider = build_provider(config)
    try:
        loaded = load_index(index_path)
        query = build_query(context, provider)
        ranked = rank_papers(query, loaded, k=top_k or config.top_k)
    except RefineError as exc:
        raise click.ClickException(str(exc))
    payload = [
        {
            "paper_id": rp.paper_id,
            "title": rp.title,
            "similarity": rp.similarity,
            "valid_dimensions": list(rp.valid_dimensions),
            "context": rp.context.to_dict(),
        }
        for rp in ranked
    ]
    click.echo(json.dumps(payload, indent=2, ensure_ascii=False))


@main.command()
@click.option("--index", "index_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--screens", "screen_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="PNG screen, in order; repeat for multiple screens.")
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False), help="Session file to write.")
@click.option("--top-k", type=click.IntRange(min=1), default=None)
@click.pass_obj
def analyze(config: Config, index_path: str, screen_paths: tuple[str, ...],
            out_path: str, top_k: int | None) -> None:
    """Headless full pipeline: screens in, session file out.

    The session id is derived from the mockup and index contents, so
    identical inputs produce an identical file.
    """
    provider = build_provider(config)
    try:
        loaded = load_index(index_path)
        pngs = [Path(p).read_bytes() for p in screen_paths]
        session = new_session(pngs)
        session.session_id = deterministic_session_id(
            session.mockup.mockup_id, loaded)
        run_full(session, loaded, provider,
                 k=top_k or config.top_k, n_max=config.n_max,
                 max_workers=config.workers)
        save_session(session, out_path)
    except RefineError as exc:
        raise click.ClickException(str(exc))
    n_items = sum(len(c.action_items) for c in session.clusters)
    click.echo(f"session {session.session_id}: {len(session.ranked)} papers, "
               f"{len(session.clusters)} clusters, {n_items} action items "
               f"-> {out_path}")
    for warning in session.warnings:
        click.echo(f"warning: {warning}", err=True)


@main.command()
@click.option("--index", "index_path",
              type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.pass_obj
def serve(config: Config, index_path: str | None, host: str, port: int) -> None:
    """Start the HTTP API."""
    import uvicorn

    from .service import create_app

    if index_path:
        config.index_path = index_path
    app = create_app(config)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
