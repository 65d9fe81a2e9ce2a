"""Shared domain types and the pipeline-configuration grammar.

A pipeline configuration is a JSON document in one of two forms:

* form A — a single object whose keys are step keys and whose values are
  argument objects.  A step key is either a service id (``module.function``)
  or ``service_id#k`` when the same service occurs more than once.
* form B — an array of ``{"service": id, "params": {...}}`` objects, which
  can represent duplicate steps without key collisions.

``parse_pipeline_config``/``serialize_pipeline_config`` round-trip both
forms; serialization prefers form A whenever every step key is a bare,
unique service id.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from typing import Any

from .errors import SlegoError

PARAM_NAME_RE = re.compile(r"^[a-z][a-z0-9_]*$")
SERVICE_ID_RE = re.compile(r"^[a-z0-9_\-]+\.[a-z0-9_]+$")

PARAM_TYPES = ("string", "integer", "number", "boolean")
PARAM_ROLES = ("plain", "input_path", "output_path")

ScalarValue = str | int | float | bool


def value_matches_type(value: Any, ptype: str) -> bool:
    """Strict scalar typing: bool is not an integer, floats are not integers."""
    if ptype == "string":
        return isinstance(value, str)
    if ptype == "boolean":
        return isinstance(value, bool)
    if ptype == "integer":
        return isinstance(value, int) and not isinstance(value, bool)
    if ptype == "number":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return False


def is_scalar(value: Any) -> bool:
    return isinstance(value, (str, int, float, bool)) and value is not None


# ---------------------------------------------------------------------------
# Manifest types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    ptype: str
    default: ScalarValue
    role: str = "plain"
    description: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "ptype": self.ptype,
            "default": self.default,
            "role": self.role,
            "description": self.description,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "ParameterSpec":
        return cls(
            name=d["name"],
            ptype=d["ptype"],
            default=d["default"],
            role=d.get("role", "plain"),
            description=d.get("description", ""),
        )


@dataclass(frozen=True)
class MicroserviceManifest:
    id: str
    description: str
    docstring: str
    params: tuple[ParameterSpec, ...]
    kind: str = "builtin"  # builtin | exec
    entry: str | None = None
    timeout_s: int = 300
    no_output: bool = False

    def param(self, name: str) -> ParameterSpec | None:
        for p in self.params:
            if p.name == name:
                return p
        return None

    def defaults(self) -> dict[str, ScalarValue]:
        return {p.name: p.default for p in self.params}

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": self.id,
            "description": self.description,
            "docstring": self.docstring,
            "params": [p.to_json() for p in self.params],
            "kind": self.kind,
            "timeout_s": self.timeout_s,
        }
        if self.entry is not None:
            d["entry"] = self.entry
        if self.no_output:
            d["no_output"] = True
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "MicroserviceManifest":
        return cls(
            id=d.get("id", ""),
            description=d.get("description", ""),
            docstring=d.get("docstring", ""),
            params=tuple(ParameterSpec.from_json(p) for p in d.get("params", [])),
            kind=d.get("kind", "builtin"),
            entry=d.get("entry"),
            timeout_s=d.get("timeout_s", 300),
            no_output=bool(d.get("no_output", False)),
        )


def parse_manifest(text: str) -> MicroserviceManifest:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SlegoError("E_SYNTAX", f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SlegoError("E_SHAPE", "manifest must be a JSON object")
    return MicroserviceManifest.from_json(doc)


# ---------------------------------------------------------------------------
# Pipeline configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineStep:
    service_id: str
    step_key: str
    args: tuple[tuple[str, ScalarValue], ...]  # ordered name -> value

    @classmethod
    def make(cls, service_id: str, args: dict[str, ScalarValue], step_key: str | None = None) -> "PipelineStep":
        return cls(service_id=service_id, step_key=step_key or service_id, args=tuple(args.items()))

    def arg_map(self) -> dict[str, ScalarValue]:
        return dict(self.args)


@dataclass(frozen=True)
class PipelineConfig:
    steps: tuple[PipelineStep, ...] = ()

    @classmethod
    def make(cls, steps: list[PipelineStep]) -> "PipelineConfig":
        return cls(steps=tuple(steps))

    def __len__(self) -> int:
        return len(self.steps)


def _service_of_key(step_key: str) -> str:
    return step_key.split("#", 1)[0]


def _reject_dup_keys(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    d: dict[str, Any] = {}
    for k, v in pairs:
        if k in d:
            raise SlegoError("E_DUP_KEY", f"duplicate key {k!r}")
        d[k] = v
    return d


def _check_args(args: Any, where: str) -> dict[str, ScalarValue]:
    if not isinstance(args, dict):
        raise SlegoError("E_SHAPE", f"step {where}: arguments must be an object")
    for name, value in args.items():
        if not is_scalar(value):
            raise SlegoError(
                "E_ARG_VALUE",
                f"step {where}, arg {name!r}: values must be scalars (string/integer/number/boolean)",
            )
    return args


def parse_pipeline_config(text: str) -> PipelineConfig:
    """Parse a UTF-8 JSON pipeline document (form A object or form B array)."""
    try:
        doc = json.loads(text, object_pairs_hook=_reject_dup_keys)
    except SlegoError:
        raise
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SlegoError("E_SYNTAX", f"not a JSON document: {exc}") from exc

    steps: list[PipelineStep] = []
    if isinstance(doc, dict):
        for step_key, args in doc.items():
            args = _check_args(args, step_key)
            steps.append(PipelineStep.make(_service_of_key(step_key), args, step_key=step_key))
    elif isinstance(doc, list):
        counts: dict[str, int] = {}
        for i, item in enumerate(doc):
            if not isinstance(item, dict) or "service" not in item or not isinstance(item.get("service"), str):
                raise SlegoError("E_SHAPE", f"array item {i}: expected {{'service': id, 'params': {{...}}}}")
            service_id = item["service"]
            args = _check_args(item.get("params", {}), f"{i} ({service_id})")
            counts[service_id] = counts.get(service_id, 0) + 1
            k = counts[service_id]
            step_key = service_id if k == 1 else f"{service_id}#{k}"
            steps.append(PipelineStep.make(service_id, args, step_key=step_key))
    else:
        raise SlegoError("E_SHAPE", "pipeline document must be a JSON object or array")

    seen = set()
    for s in steps:
        if s.step_key in seen:
            raise SlegoError("E_DUP_KEY", f"duplicate step_key {s.step_key!r}")
        seen.add(s.step_key)
    return PipelineConfig.make(steps)


def serialize_pipeline_config(cfg: PipelineConfig) -> str:
    keys = [s.step_key for s in cfg.steps]
    plain = all(s.step_key == s.service_id for s in cfg.steps) and len(set(keys)) == len(keys)
    if plain:
        doc: Any = {s.step_key: s.arg_map() for s in cfg.steps}
    else:
        doc = [{"service": s.service_id, "params": s.arg_map()} for s in cfg.steps]
    return json.dumps(doc, indent=2)


# ---------------------------------------------------------------------------
# Records and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MicroserviceRecord:
    manifest: MicroserviceManifest
    source_ref: str
    linked_pipelines: tuple[str, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "manifest": self.manifest.to_json(),
            "source_ref": self.source_ref,
            "linked_pipelines": list(self.linked_pipelines),
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "MicroserviceRecord":
        return cls(
            manifest=MicroserviceManifest.from_json(d["manifest"]),
            source_ref=d.get("source_ref", ""),
            linked_pipelines=tuple(d.get("linked_pipelines", [])),
        )


@dataclass(frozen=True)
class PipelineRecord:
    id: str
    name: str
    description: str
    config: PipelineConfig
    embedding: tuple[float, ...]
    created_at: str

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "name": self.name,
            "description": self.description,
            "config": json.loads(serialize_pipeline_config(self.config)),
            "embedding": list(self.embedding),
            "created_at": self.created_at,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "PipelineRecord":
        return cls(
            id=d["id"],
            name=d.get("name", ""),
            description=d.get("description", ""),
            config=parse_pipeline_config(json.dumps(d.get("config", {}))),
            embedding=tuple(float(x) for x in d.get("embedding", [])),
            created_at=d.get("created_at", ""),
        )


@dataclass(frozen=True)
class StepResult:
    step_key: str
    status: str  # success | failed
    started: str
    ended: str
    duration_ms: int
    produced_files: tuple[str, ...] = ()
    log_excerpt: str = ""

    def to_json(self) -> dict[str, Any]:
        return {
            "step_key": self.step_key,
            "status": self.status,
            "started": self.started,
            "ended": self.ended,
            "duration_ms": self.duration_ms,
            "produced_files": list(self.produced_files),
            "log_excerpt": self.log_excerpt,
        }

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "StepResult":
        return cls(
            step_key=d["step_key"],
            status=d["status"],
            started=d["started"],
            ended=d["ended"],
            duration_ms=d["duration_ms"],
            produced_files=tuple(d.get("produced_files", [])),
            log_excerpt=d.get("log_excerpt", ""),
        )


@dataclass(frozen=True)
class ExecutionReport:
    run_id: str
    status: str  # success | failed
    steps: tuple[StepResult, ...] = ()
    error: dict[str, str] | None = None  # {step_key, code, message}

    def to_json(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "run_id": self.run_id,
            "status": self.status,
            "steps": [s.to_json() for s in self.steps],
        }
        if self.error is not None:
            d["error"] = dict(self.error)
        return d

    @classmethod
    def from_json(cls, d: dict[str, Any]) -> "ExecutionReport":
        return cls(
            run_id=d["run_id"],
            status=d["status"],
            steps=tuple(StepResult.from_json(s) for s in d.get("steps", [])),
            error=d.get("error"),
        )


@dataclass(frozen=True)
class Recommendation:
    config: PipelineConfig
    explanation: str
    retrieved: tuple[tuple[str, float], ...]  # (pipeline_id, similarity), descending
    stage1_prompt: str
    stage1_response: str
    stage2_prompt: str
    stage2_response: str
    valid: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "config": json.loads(serialize_pipeline_config(self.config)),
            "explanation": self.explanation,
            "retrieved": [{"pipeline_id": pid, "similarity": sim} for pid, sim in self.retrieved],
            "stage1_prompt": self.stage1_prompt,
            "stage1_response": self.stage1_response,
            "stage2_prompt": self.stage2_prompt,
            "stage2_response": self.stage2_response,
            "valid": self.valid,
        }
