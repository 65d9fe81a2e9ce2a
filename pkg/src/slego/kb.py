"""Knowledge base: persistent metadata store for services and pipelines.

Records live in two JSONL files under ``kb/`` (one record per line), rewritten
atomically on every change.  Pipeline records carry an L2-normalized embedding
of ``name + "\\n" + description``, recomputed on every upsert; service records
carry reverse links to the pipelines that reference them.
"""

from __future__ import annotations

import json
import threading
from typing import Callable, Iterable

from .errors import Finding, SlegoError, errors_of
from .ids import new_id, now_iso, slugify
from .model import MicroserviceRecord, PipelineConfig, PipelineRecord

MS_FILE = "kb/microservices.jsonl"
PL_FILE = "kb/pipelines.jsonl"


def round_embedding(values: Iterable[float]) -> tuple[float, ...]:
    """Round to 9 significant digits, the storage precision."""
    return tuple(float(f"{v:.9g}") for v in values)


class KnowledgeBase:
    def __init__(
        self,
        ws,
        embed_fn: Callable[[str], list[float]],
        pipeline_validator: Callable[[PipelineConfig], list[Finding]] | None = None,
    ):
        self.ws = ws
        self.embed_fn = embed_fn
        self.pipeline_validator = pipeline_validator
        self._lock = threading.RLock()
        self._services: dict[str, MicroserviceRecord] = {}
        self._pipelines: dict[str, PipelineRecord] = {}
        self._load()

    # -- persistence --------------------------------------------------------

    def _load(self) -> None:
        if self.ws.exists(MS_FILE):
            for line in self.ws.read_file(MS_FILE).decode("utf-8").splitlines():
                if line.strip():
                    rec = MicroserviceRecord.from_json(json.loads(line))
                    self._services[rec.manifest.id] = rec
        if self.ws.exists(PL_FILE):
            for line in self.ws.read_file(PL_FILE).decode("utf-8").splitlines():
                if line.strip():
                    rec = PipelineRecord.from_json(json.loads(line))
                    self._pipelines[rec.id] = rec

    def _save(self) -> None:
        ms = "".join(
            json.dumps(self._services[k].to_json()) + "\n" for k in sorted(self._services)
        )
        pl = "".join(
            json.dumps(self._pipelines[k].to_json()) + "\n" for k in sorted(self._pipelines)
        )
        self.ws.put_file(MS_FILE, ms.encode("utf-8"))
        self.ws.put_file(PL_FILE, pl.encode("utf-8"))

    def flush(self) -> None:
        with self._lock:
            self._save()

    # -- microservice records ----------------------------------------------

    def upsert_microservice_record(self, rec: MicroserviceRecord) -> MicroserviceRecord:
        with self._lock:
            existing = self._services.get(rec.manifest.id)
            if existing is not None and not rec.linked_pipelines:
                # keep reverse links across manifest/description edits
                rec = MicroserviceRecord(
                    manifest=rec.manifest,
                    source_ref=rec.source_ref,
                    linked_pipelines=existing.linked_pipelines,
                )
            self._services[rec.manifest.id] = rec
            self._save()
            return rec

    def get_microservice_record(self, service_id: str) -> MicroserviceRecord:
        rec = self._services.get(service_id)
        if rec is None:
            raise SlegoError("E_NOT_FOUND", f"no such microservice: {service_id!r}")
        return rec

    def has_microservice(self, service_id: str) -> bool:
        return service_id in self._services

    def list_microservice_records(self) -> list[MicroserviceRecord]:
        return [self._services[k] for k in sorted(self._services)]

    def delete_microservice_record(self, service_id: str) -> bool:
        with self._lock:
            if service_id not in self._services:
                return False
            del self._services[service_id]
            self._save()
            return True

    # -- pipeline records ---------------------------------------------------

    def upsert_pipeline_record(
        self,
        name: str,
        description: str,
        config: PipelineConfig,
        pipeline_id: str | None = None,
    ) -> PipelineRecord:
        if self.pipeline_validator is not None:
            findings = errors_of(self.pipeline_validator(config))
            if findings:
                raise SlegoError("E_INVALID_PIPELINE", "pipeline fails validation", findings)
        with self._lock:
            pid = pipeline_id or slugify(name)
            embedding = round_embedding(self.embed_fn(name + "\n" + description))
            old = self._pipelines.get(pid)
            created = old.created_at if old is not None else now_iso()
            rec = PipelineRecord(
                id=pid,
                name=name,
                description=description,
                config=config,
                embedding=embedding,
                created_at=created,
            )
            self._pipelines[pid] = rec
            self._relink(pid, old_config=old.config if old else None, new_config=config)
            self._save()
            return rec

    def _relink(self, pid: str, old_config: PipelineConfig | None, new_config: PipelineConfig | None) -> None:
        old_services = {s.service_id for s in old_config.steps} if old_config else set()
        new_services = {s.service_id for s in new_config.steps} if new_config else set()
        for sid in old_services - new_services:
            rec = self._services.get(sid)
            if rec and pid in rec.linked_pipelines:
                links = tuple(x for x in rec.linked_pipelines if x != pid)
                self._services[sid] = MicroserviceRecord(rec.manifest, rec.source_ref, links)
        for sid in new_services:
            rec = self._services.get(sid)
            if rec and pid not in rec.linked_pipelines:
                links = tuple(sorted(rec.linked_pipelines + (pid,)))
                self._services[sid] = MicroserviceRecord(rec.manifest, rec.source_ref, links)

    def get_pipeline_record(self, pipeline_id: str) -> PipelineRecord:
        rec = self._pipelines.get(pipeline_id)
        if rec is None:
            raise SlegoError("E_NOT_FOUND", f"no such pipeline record: {pipeline_id!r}")
        return rec

    def list_pipeline_records(self) -> list[PipelineRecord]:
        return [self._pipelines[k] for k in sorted(self._pipelines)]

    def delete_pipeline_record(self, pipeline_id: str) -> bool:
        with self._lock:
            rec = self._pipelines.get(pipeline_id)
            if rec is None:
                return False
            del self._pipelines[pipeline_id]
            self._relink(pipeline_id, old_config=rec.config, new_config=None)
            self._save()
            return True

    # -- audits -------------------------------------------------------------

    def audit_links(self) -> list[str]:
        """Full-scan link-integrity check; returns problem descriptions."""
        problems = []
        referenced: dict[str, set[str]] = {}
        for rec in self._pipelines.values():
            for step in rec.config.steps:
                referenced.setdefault(step.service_id, set()).add(rec.id)
        for sid, srec in self._services.items():
            expect = referenced.get(sid, set())
            got = set(srec.linked_pipelines)
            if expect != got:
                problems.append(f"{sid}: linked_pipelines {sorted(got)} != referenced {sorted(expect)}")
        return problems

    def audit_embeddings(self, tol: float = 1e-9) -> list[str]:
        problems = []
        for rec in self._pipelines.values():
            fresh = round_embedding(self.embed_fn(rec.name + "\n" + rec.description))
            if len(fresh) != len(rec.embedding) or any(
                abs(a - b) > tol for a, b in zip(fresh, rec.embedding)
            ):
                problems.append(f"{rec.id}: stored embedding is stale")
        return problems
