"""Command-line interface.

Exit codes: 0 success, 1 domain error, 2 usage error.  ``--json`` switches
output to machine-readable JSON.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import SlegoError
from .fixtures import seed_fixtures, seed_knowledge_base
from .model import parse_pipeline_config, serialize_pipeline_config
from .platform import WORKSPACE_ENV, open_platform


def _out(ctx, payload, human: str | None = None) -> None:
    if ctx.obj["json"]:
        click.echo(json.dumps(payload, indent=2))
    else:
        click.echo(human if human is not None else json.dumps(payload, indent=2))


def _fail(exc: SlegoError) -> None:
    body = {"code": exc.code, "message": exc.message}
    if exc.findings:
        body["findings"] = [f.to_json() for f in exc.findings]
    click.echo(json.dumps(body, indent=2), err=True)
    sys.exit(1)


@click.group()
@click.option("--workspace", envvar=WORKSPACE_ENV, default="workspace", show_default=True, help="Workspace root directory.")
@click.option("--json", "json_out", is_flag=True, help="Machine-readable output.")
@click.pass_context
def main(ctx, workspace, json_out):
    ctx.ensure_object(dict)
    ctx.obj["workspace"] = workspace
    ctx.obj["json"] = json_out


def _platform(ctx):
    return open_platform(ctx.obj["workspace"])


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8710, show_default=True)
@click.option("--seed", is_flag=True, help="Seed fixture data and example pipeline records first.")
@click.pass_context
def serve(ctx, host, port, seed):
    """Run the HTTP service."""
    import uvicorn

    from .api import create_app

    platform = _platform(ctx)
    if seed:
        seed_fixtures(platform.ws)
        seed_knowledge_base(platform.kb)
    uvicorn.run(create_app(platform), host=host, port=port, log_level="warning")


@main.command()
@click.pass_context
def init(ctx):
    """Create the workspace and seed fixtures plus example pipeline records."""
    platform = _platform(ctx)
    files = seed_fixtures(platform.ws)
    ids = seed_knowledge_base(platform.kb)
    _out(ctx, {"fixtures": files, "pipelines": ids},
         "seeded " + ", ".join(files) + " and pipeline records " + ", ".join(ids))


@main.command()
@click.argument("manifest", type=click.Path(exists=True, path_type=Path))
@click.argument("code", required=False, type=click.Path(exists=True, path_type=Path))
@click.option("--replace", is_flag=True)
@click.pass_context
def register(ctx, manifest, code, replace):
    """Validate and register a microservice manifest (plus optional code file)."""
    try:
        rec = _platform(ctx).registry.register_service(
            manifest.read_text("utf-8"),
            code.read_bytes() if code else None,
            replace=replace,
        )
    except SlegoError as exc:
        _fail(exc)
    _out(ctx, rec.to_json(), f"registered {rec.manifest.id}")


@main.command()
@click.argument("pipeline", type=click.Path(exists=True, path_type=Path))
@click.pass_context
def validate(ctx, pipeline):
    """Validate a pipeline configuration file against the registry."""
    platform = _platform(ctx)
    try:
        cfg = parse_pipeline_config(pipeline.read_text("utf-8"))
        findings = platform.engine.validate_pipeline(cfg)
    except SlegoError as exc:
        _fail(exc)
    payload = {"findings": [f.to_json() for f in findings]}
    errors = [f for f in findings if f.severity == "error"]
    human = "\n".join(f"{f.severity}: [{f.code}] {f.message}" for f in findings) or "ok"
    _out(ctx, payload, human)
    if errors:
        sys.exit(1)


@main.command()
@click.argument("pipeline", type=click.Path(exists=True, path_type=Path))
@click.option("--sandbox", is_flag=True, help="Run on a copy of the dataspace.")
@click.pass_context
def run(ctx, pipeline, sandbox):
    """Execute a pipeline configuration file."""
    platform = _platform(ctx)
    try:
        cfg = parse_pipeline_config(pipeline.read_text("utf-8"))
        report = platform.engine.execute_pipeline(cfg, sandbox=sandbox)
    except SlegoError as exc:
        _fail(exc)
    human = [f"run {report.run_id}: {report.status} (report: runs/{report.run_id}/report.json)"]
    for s in report.steps:
        human.append(f"  {s.step_key}: {s.status} ({s.duration_ms} ms)")
    _out(ctx, report.to_json(), "\n".join(human))
    if report.status != "success":
        sys.exit(1)


@main.group()
def kb():
    """Knowledge-base records."""


@kb.command("list")
@click.pass_context
def kb_list(ctx):
    recs = _platform(ctx).kb.list_pipeline_records()
    _out(ctx, [r.to_json() for r in recs], "\n".join(f"{r.id}\t{r.name}" for r in recs) or "(empty)")


@kb.command("add")
@click.argument("pipeline", type=click.Path(exists=True, path_type=Path))
@click.option("--name", required=True)
@click.option("--description", default="")
@click.option("--id", "pipeline_id", default=None)
@click.pass_context
def kb_add(ctx, pipeline, name, description, pipeline_id):
    platform = _platform(ctx)
    try:
        cfg = parse_pipeline_config(pipeline.read_text("utf-8"))
        rec = platform.kb.upsert_pipeline_record(name, description, cfg, pipeline_id=pipeline_id)
    except SlegoError as exc:
        _fail(exc)
    _out(ctx, rec.to_json(), f"stored pipeline record {rec.id}")


@kb.command("get")
@click.argument("pipeline_id")
@click.pass_context
def kb_get(ctx, pipeline_id):
    try:
        rec = _platform(ctx).kb.get_pipeline_record(pipeline_id)
    except SlegoError as exc:
        _fail(exc)
    _out(ctx, rec.to_json())


@kb.command("rm")
@click.argument("pipeline_id")
@click.pass_context
def kb_rm(ctx, pipeline_id):
    if not _platform(ctx).kb.delete_pipeline_record(pipeline_id):
        _fail(SlegoError("E_NOT_FOUND", f"no such pipeline record {pipeline_id!r}"))
    _out(ctx, {"removed": True}, f"removed {pipeline_id}")


@main.command()
@click.argument("query")
@click.option("--partial", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--stub", is_flag=True, help="Force the deterministic stub LLM provider.")
@click.pass_context
def recommend(ctx, query, partial, stub):
    """Recommend a pipeline for a natural-language query."""
    platform = _platform(ctx)
    recommender = platform.recommender
    if stub:
        from .recommend import StubLLM

        recommender = type(recommender)(
            recommender.kb, recommender.registry, recommender.engine,
            recommender.embedder, StubLLM(), recommender.config,
        )
    partial_cfg = parse_pipeline_config(partial.read_text("utf-8")) if partial else None
    try:
        rec = recommender.recommend(query, partial_cfg)
    except SlegoError as exc:
        _fail(exc)
    human = serialize_pipeline_config(rec.config)
    if not ctx.obj["json"]:
        human += "\n\n" + rec.explanation
    _out(ctx, rec.to_json(), human)


@main.group()
def files():
    """Workspace files."""


@files.command("ls")
@click.argument("prefix", default="")
@click.pass_context
def files_ls(ctx, prefix):
    try:
        entries = _platform(ctx).ws.list_tree(prefix)
    except SlegoError as exc:
        _fail(exc)
    _out(ctx, [e.to_json() for e in entries], "\n".join(f"{e.size}\t{e.path}" for e in entries) or "(empty)")


@files.command("put")
@click.argument("src", type=click.Path(exists=True, path_type=Path))
@click.argument("dest")
@click.pass_context
def files_put(ctx, src, dest):
    try:
        stored = _platform(ctx).ws.put_file(dest, src.read_bytes())
    except SlegoError as exc:
        _fail(exc)
    _out(ctx, {"path": stored}, stored)


@files.command("get")
@click.argument("path")
@click.argument("dest", required=False, type=click.Path(path_type=Path))
@click.pass_context
def files_get(ctx, path, dest):
    try:
        data = _platform(ctx).ws.read_file(path)
    except SlegoError as exc:
        _fail(exc)
    if dest:
        dest.write_bytes(data)
        _out(ctx, {"path": str(dest)}, f"wrote {dest}")
    else:
        sys.stdout.buffer.write(data)


@files.command("rm")
@click.argument("path")
@click.pass_context
def files_rm(ctx, path):
    try:
        count = _platform(ctx).ws.remove_path(path)
    except SlegoError as exc:
        _fail(exc)
    _out(ctx, {"removed": count}, f"removed {count} file(s)")


if __name__ == "__main__":
    main()
