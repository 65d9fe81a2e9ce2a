"""HTTP surface: thin adapters over the workspace, registry, engine, KB and
recommender.  Every endpoint forwards to the underlying module operation and
maps error codes onto HTTP statuses (400 parse, 404 not-found, 409 duplicate,
422 validation, 500 internal); error bodies are ``{code, message, findings?}``.
"""

from __future__ import annotations

import json
import os
import threading
from pathlib import Path

from fastapi import FastAPI, File, Request, Response, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import SlegoError
from .ids import new_id
from .model import parse_pipeline_config, serialize_pipeline_config
from .platform import Platform

UI_DIR_ENV = "SLEGO_UI_DIR"

_STATUS = {
    "E_SYNTAX": 400,
    "E_SHAPE": 400,
    "E_ARG_VALUE": 400,
    "E_DUP_KEY": 400,
    "E_NO_JSON": 400,
    "E_ESCAPE": 400,
    "E_BAD_STRATEGY": 400,
    "E_EMPTY_KB": 400,
    "E_NOT_FOUND": 404,
    "E_DUPLICATE_ID": 409,
    "E_VALIDATION": 422,
    "E_PRECONDITION": 422,
    "E_INVALID_PIPELINE": 422,
}


def _error_response(exc: SlegoError) -> JSONResponse:
    body = {"code": exc.code, "message": exc.message}
    if exc.findings:
        body["findings"] = [f.to_json() for f in exc.findings]
    return JSONResponse(status_code=_STATUS.get(exc.code, 500), content=body)


def create_app(platform: Platform) -> FastAPI:
    app = FastAPI(title="slego", docs_url=None, redoc_url=None)
    ws, kb, registry, engine = platform.ws, platform.kb, platform.registry, platform.engine

    @app.exception_handler(SlegoError)
    async def slego_error_handler(request: Request, exc: SlegoError):
        return _error_response(exc)

    @app.get("/health")
    def health():
        return {"status": "ok"}

    # -- files --------------------------------------------------------------

    @app.get("/files")
    def list_files(prefix: str = ""):
        return [e.to_json() for e in ws.list_tree(prefix)]

    @app.get("/files/{path:path}")
    def get_file(path: str):
        return Response(content=ws.read_file(path), media_type="application/octet-stream")

    @app.put("/files/{path:path}")
    async def put_file(path: str, request: Request):
        stored = ws.put_file(path, await request.body())
        return {"path": stored}

    @app.delete("/files/{path:path}")
    def delete_file(path: str):
        return {"removed": ws.remove_path(path)}

    # -- microservices ------------------------------------------------------

    @app.get("/microservices")
    def list_microservices():
        return [r.to_json() for r in registry.list_services()]

    @app.get("/microservices/{service_id}")
    def get_microservice(service_id: str):
        return registry.get_service(service_id).to_json()

    @app.post("/microservices", status_code=201)
    async def register_microservice(
        manifest: UploadFile = File(...),
        code: UploadFile | None = File(default=None),
        replace: bool = False,
    ):
        manifest_doc = (await manifest.read()).decode("utf-8")
        code_bytes = await code.read() if code is not None else None
        rec = registry.register_service(manifest_doc, code_bytes, replace=replace)
        return rec.to_json()

    # -- pipelines ----------------------------------------------------------

    async def _config_from_body(request: Request):
        return parse_pipeline_config((await request.body()).decode("utf-8"))

    @app.post("/pipelines/validate")
    async def validate_pipeline(request: Request):
        cfg = await _config_from_body(request)
        findings = engine.validate_pipeline(cfg)
        return {"findings": [f.to_json() for f in findings]}

    @app.post("/pipelines/run")
    async def run_pipeline(request: Request, sandbox: int = 0):
        # `async` is a reserved word; read it off the query string directly
        background = request.query_params.get("async", "0") not in ("0", "", "false")
        cfg = await _config_from_body(request)
        if background:
            run_id = new_id()
            findings = engine.validate_pipeline(cfg)
            from .errors import errors_of

            if errors_of(findings):
                raise SlegoError("E_PRECONDITION", "pipeline fails validation", errors_of(findings))
            ws.resolve(f"runs/{run_id}").mkdir(parents=True, exist_ok=True)
            t = threading.Thread(
                target=engine.execute_pipeline,
                args=(cfg,),
                kwargs={"sandbox": bool(sandbox), "run_id": run_id},
                daemon=True,
            )
            t.start()
            return {"run_id": run_id, "status": "running"}
        report = engine.execute_pipeline(cfg, sandbox=bool(sandbox))
        return report.to_json()

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        if not ws.exists(f"runs/{run_id}/report.json"):
            if engine.run_exists(run_id):
                return {"run_id": run_id, "status": "running"}
            raise SlegoError("E_NOT_FOUND", f"no such run {run_id!r}")
        return engine.get_run_report(run_id).to_json()

    # -- knowledge base -----------------------------------------------------

    @app.get("/kb/pipelines")
    def kb_list_pipelines():
        return [r.to_json() for r in kb.list_pipeline_records()]

    @app.post("/kb/pipelines", status_code=201)
    async def kb_add_pipeline(request: Request):
        doc = json.loads((await request.body()).decode("utf-8"))
        cfg = parse_pipeline_config(json.dumps(doc.get("config", {})))
        rec = kb.upsert_pipeline_record(
            doc.get("name", ""), doc.get("description", ""), cfg, pipeline_id=doc.get("id")
        )
        return rec.to_json()

    @app.get("/kb/pipelines/{pipeline_id}")
    def kb_get_pipeline(pipeline_id: str):
        return kb.get_pipeline_record(pipeline_id).to_json()

    @app.put("/kb/pipelines/{pipeline_id}")
    async def kb_put_pipeline(pipeline_id: str, request: Request):
        doc = json.loads((await request.body()).decode("utf-8"))
        existing = kb.get_pipeline_record(pipeline_id)
        cfg = (
            parse_pipeline_config(json.dumps(doc["config"]))
            if "config" in doc
            else existing.config
        )
        rec = kb.upsert_pipeline_record(
            doc.get("name", existing.name),
            doc.get("description", existing.description),
            cfg,
            pipeline_id=pipeline_id,
        )
        return rec.to_json()

    @app.delete("/kb/pipelines/{pipeline_id}")
    def kb_delete_pipeline(pipeline_id: str):
        if not kb.delete_pipeline_record(pipeline_id):
            raise SlegoError("E_NOT_FOUND", f"no such pipeline record {pipeline_id!r}")
        return {"removed": True}

    @app.get("/kb/microservices/{service_id}")
    def kb_get_microservice(service_id: str):
        return kb.get_microservice_record(service_id).to_json()

    @app.put("/kb/microservices/{service_id}")
    async def kb_put_microservice(service_id: str, request: Request):
        from dataclasses import replace as dc_replace

        doc = json.loads((await request.body()).decode("utf-8"))
        rec = kb.get_microservice_record(service_id)
        manifest = rec.manifest
        if "description" in doc:
            manifest = dc_replace(manifest, description=doc["description"])
        if "docstring" in doc:
            manifest = dc_replace(manifest, docstring=doc["docstring"])
        from .model import MicroserviceRecord

        updated = MicroserviceRecord(manifest, rec.source_ref, rec.linked_pipelines)
        return kb.upsert_microservice_record(updated).to_json()

    # -- recommender --------------------------------------------------------

    @app.post("/recommend")
    async def recommend(request: Request):
        doc = json.loads((await request.body()).decode("utf-8"))
        query = doc.get("query", "")
        partial = None
        if doc.get("partial") is not None:
            partial = parse_pipeline_config(json.dumps(doc["partial"]))
        recommender = platform.recommender
        if doc.get("stub"):
            from .recommend import StubLLM

            recommender = type(recommender)(
                recommender.kb,
                recommender.registry,
                recommender.engine,
                recommender.embedder,
                StubLLM(),
                recommender.config,
            )
        return recommender.recommend(query, partial).to_json()

    # -- static UI ----------------------------------------------------------

    ui_dir = os.environ.get(UI_DIR_ENV, "frontend/dist")
    if Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
