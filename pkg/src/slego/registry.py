"""Microservice admission: static manifest validation and the service catalog.

Only manifests with zero error findings are stored.  Built-in services pass
through the same validator as uploaded ones.  Validation never executes code;
it checks structure, parameter declarations, documentation and declared
outputs, plus entry-file existence for exec services.
"""

from __future__ import annotations

import threading
from typing import Callable

from .errors import Finding, SlegoError, errors_of
from .kb import KnowledgeBase
from .model import (
    PARAM_NAME_RE,
    PARAM_ROLES,
    PARAM_TYPES,
    SERVICE_ID_RE,
    MicroserviceManifest,
    MicroserviceRecord,
    parse_manifest,
    value_matches_type,
)
from .workspace import Workspace


def validate_manifest(m: MicroserviceManifest, ws: Workspace) -> list[Finding]:
    """Static admission checks. Deterministic; ordered by (code, param name)."""
    findings: list[Finding] = []

    def err(code: str, message: str, param: str = "") -> None:
        findings.append(Finding("error", code, message, param=param))

    def warn(code: str, message: str, param: str = "") -> None:
        findings.append(Finding("warning", code, message, param=param))

    if not SERVICE_ID_RE.match(m.id):
        err("E_NAME", f"service id {m.id!r} must match <module>.<function>")
    if not m.docstring.strip():
        err("E_DOCSTRING", "docstring must be non-empty")
    if not m.description.strip():
        warn("W_NO_DESCRIPTION", "domain description is empty")

    seen: set[str] = set()
    for p in m.params:
        if not PARAM_NAME_RE.match(p.name):
            err("E_PARAM_NAME", f"invalid parameter name {p.name!r}", param=p.name)
        elif p.name in seen:
            err("E_PARAM_NAME", f"duplicate parameter name {p.name!r}", param=p.name)
        seen.add(p.name)
        if p.ptype not in PARAM_TYPES:
            err("E_PARAM_TYPE", f"parameter {p.name!r}: unknown type {p.ptype!r}", param=p.name)
        elif not value_matches_type(p.default, p.ptype):
            err(
                "E_PARAM_DEFAULT",
                f"parameter {p.name!r}: default {p.default!r} is not of type {p.ptype}",
                param=p.name,
            )
        if p.role not in PARAM_ROLES:
            err("E_PARAM_TYPE", f"parameter {p.name!r}: unknown role {p.role!r}", param=p.name)

    has_output = any(p.role == "output_path" for p in m.params)
    if not has_output and not m.no_output:
        err("E_NO_OUTPUT", "service declares no output_path parameter and no no_output flag")

    if m.kind == "exec":
        if not m.entry:
            err("E_ENTRY_MISSING", "exec service must declare an entry path")
        elif not (
            ws.exists(f"microservices/{m.id}/{m.entry}") or ws.exists(m.entry)
        ):
            err("E_ENTRY_MISSING", f"entry file not found: {m.entry!r}")
    elif m.kind != "builtin":
        err("E_NAME", f"unknown service kind {m.kind!r}")

    if not isinstance(m.timeout_s, int) or isinstance(m.timeout_s, bool) or m.timeout_s <= 0:
        err("E_PARAM_DEFAULT", f"timeout_s must be a positive integer, got {m.timeout_s!r}")

    findings.sort(key=lambda f: (f.code, f.param))
    return findings


class Registry:
    """Service catalog over the knowledge base, guarded by a writer lock."""

    def __init__(self, ws: Workspace, kb: KnowledgeBase, builtin_impls: dict[str, Callable] | None = None):
        self.ws = ws
        self.kb = kb
        self.builtin_impls = builtin_impls or {}
        self._write_lock = threading.Lock()

    def register_service(
        self,
        manifest_doc: str,
        code_bytes: bytes | None = None,
        replace: bool = False,
    ) -> MicroserviceRecord:
        manifest = parse_manifest(manifest_doc)
        with self._write_lock:
            if self.kb.has_microservice(manifest.id) and not replace:
                raise SlegoError("E_DUPLICATE_ID", f"service {manifest.id!r} already registered")

            wrote_code = None
            if manifest.kind == "exec" and manifest.entry and code_bytes is not None:
                wrote_code = f"microservices/{manifest.id}/{manifest.entry}"
                self.ws.put_file(wrote_code, code_bytes)

            findings = validate_manifest(manifest, self.ws)
            if errors_of(findings):
                if wrote_code is not None:
                    self.ws.remove_path(f"microservices/{manifest.id}")
                raise SlegoError("E_VALIDATION", f"manifest {manifest.id!r} failed validation", findings)

            source_ref = f"microservices/{manifest.id}/manifest.json"
            self.ws.put_file(source_ref, manifest_doc.encode("utf-8"))
            rec = MicroserviceRecord(manifest=manifest, source_ref=source_ref)
            return self.kb.upsert_microservice_record(rec)

    def register_builtin(self, manifest: MicroserviceManifest, impl: Callable, replace: bool = True) -> MicroserviceRecord:
        findings = validate_manifest(manifest, self.ws)
        if errors_of(findings):
            raise SlegoError("E_VALIDATION", f"builtin manifest {manifest.id!r} failed validation", findings)
        self.builtin_impls[manifest.id] = impl
        if self.kb.has_microservice(manifest.id) and not replace:
            raise SlegoError("E_DUPLICATE_ID", f"service {manifest.id!r} already registered")
        import json as _json

        source_ref = f"microservices/{manifest.id}/manifest.json"
        self.ws.put_file(source_ref, _json.dumps(manifest.to_json(), indent=2).encode("utf-8"))
        return self.kb.upsert_microservice_record(MicroserviceRecord(manifest=manifest, source_ref=source_ref))

    def get_service(self, service_id: str) -> MicroserviceRecord:
        return self.kb.get_microservice_record(service_id)

    def has_service(self, service_id: str) -> bool:
        return self.kb.has_microservice(service_id)

    def list_services(self) -> list[MicroserviceRecord]:
        return self.kb.list_microservice_records()

    def builtin_impl(self, service_id: str) -> Callable:
        impl = self.builtin_impls.get(service_id)
        if impl is None:
            raise SlegoError("E_NOT_FOUND", f"no builtin implementation for {service_id!r}")
        return impl
