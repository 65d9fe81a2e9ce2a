"""Sequential pipeline engine.

Steps run strictly in order; they communicate only through workspace files.
Shared mode serializes whole runs on an engine-wide lock (the dataspace is
shared mutable state); sandbox mode copies ``dataspace/`` into the run
directory and rewrites dataspace paths so runs can proceed concurrently.

Exec wire contract: resolved args as a UTF-8 JSON object on stdin, workspace
root as working directory, exit 0 == success, stderr captured to the log.
"""

from __future__ import annotations

import json
import shutil
import subprocess
import sys
import threading
import time
from pathlib import Path

from .errors import Finding, SlegoError, errors_of
from .ids import new_id, now_iso
from .model import (
    ExecutionReport,
    MicroserviceManifest,
    PipelineConfig,
    PipelineStep,
    ScalarValue,
    StepResult,
    value_matches_type,
)
from .registry import Registry
from .workspace import Workspace

LOG_EXCERPT_BYTES = 4096


class PipelineEngine:
    def __init__(self, ws: Workspace, registry: Registry):
        self.ws = ws
        self.registry = registry
        self._run_lock = threading.Lock()

    # -- validation ---------------------------------------------------------

    def validate_pipeline(self, cfg: PipelineConfig) -> list[Finding]:
        """Check every step against the registry; ordered by (step index, code, name)."""
        findings: list[Finding] = []
        produced: set[str] = set()
        for idx, step in enumerate(cfg.steps):
            if not self.registry.has_service(step.service_id):
                findings.append(
                    Finding("error", "E_UNKNOWN_SERVICE", f"unknown service {step.service_id!r}", step_index=idx)
                )
                continue
            manifest = self.registry.get_service(step.service_id).manifest
            args = step.arg_map()
            for name, value in args.items():
                spec = manifest.param(name)
                if spec is None:
                    findings.append(
                        Finding(
                            "error",
                            "E_UNDECLARED_PARAM",
                            f"{step.step_key}: parameter {name!r} not declared by {step.service_id}",
                            param=name,
                            step_index=idx,
                        )
                    )
                elif not value_matches_type(value, spec.ptype):
                    findings.append(
                        Finding(
                            "error",
                            "E_PARAM_VALUE_TYPE",
                            f"{step.step_key}: {name}={value!r} is not of type {spec.ptype}",
                            param=name,
                            step_index=idx,
                        )
                    )
            resolved = manifest.defaults() | args
            for p in manifest.params:
                if p.name not in args:
                    findings.append(
                        Finding(
                            "warning",
                            "W_MISSING_ARG",
                            f"{step.step_key}: parameter {p.name!r} left to default {p.default!r}",
                            param=p.name,
                            step_index=idx,
                        )
                    )
                value = resolved.get(p.name)
                if p.role == "input_path" and isinstance(value, str) and value:
                    if value not in produced and not self.ws.exists(value):
                        findings.append(
                            Finding(
                                "warning",
                                "W_DATAFLOW",
                                f"{step.step_key}: input {value!r} neither exists nor is produced by an earlier step",
                                param=p.name,
                                step_index=idx,
                            )
                        )
            for p in manifest.params:
                if p.role == "output_path":
                    value = resolved.get(p.name)
                    if isinstance(value, str):
                        produced.add(value)
        findings.sort(key=lambda f: (f.step_index if f.step_index is not None else -1, f.code, f.param))
        return findings

    # -- execution ----------------------------------------------------------

    def execute_pipeline(
        self,
        cfg: PipelineConfig,
        sandbox: bool = False,
        run_id: str | None = None,
    ) -> ExecutionReport:
        findings = self.validate_pipeline(cfg)
        if errors_of(findings):
            raise SlegoError("E_PRECONDITION", "pipeline fails validation", errors_of(findings))
        run_id = run_id or new_id()
        run_dir = f"runs/{run_id}"
        self.ws.resolve(run_dir).mkdir(parents=True, exist_ok=True)
        if sandbox:
            self._copy_dataspace(run_dir)
            return self._run(cfg, run_id, sandbox=True)
        with self._run_lock:
            return self._run(cfg, run_id, sandbox=False)

    def _copy_dataspace(self, run_dir: str) -> None:
        src = self.ws.resolve("dataspace")
        dst = self.ws.resolve(f"{run_dir}/dataspace")
        shutil.copytree(src, dst, dirs_exist_ok=True)

    def _remap(self, value: str, run_id: str, sandbox: bool) -> str:
        if sandbox and value.startswith("dataspace/"):
            return f"runs/{run_id}/{value}"
        return value

    def _run(self, cfg: PipelineConfig, run_id: str, sandbox: bool) -> ExecutionReport:
        results: list[StepResult] = []
        error: dict[str, str] | None = None
        for step in cfg.steps:
            manifest = self.registry.get_service(step.service_id).manifest
            resolved = manifest.defaults() | step.arg_map()
            for p in manifest.params:
                if p.role in ("input_path", "output_path") and isinstance(resolved.get(p.name), str):
                    resolved[p.name] = self._remap(resolved[p.name], run_id, sandbox)
            result, step_error = self._run_step(step, manifest, resolved, run_id)
            results.append(result)
            if step_error is not None:
                error = step_error
                break
        report = ExecutionReport(
            run_id=run_id,
            status="failed" if error else "success",
            steps=tuple(results),
            error=error,
        )
        self.ws.put_file(
            f"runs/{run_id}/report.json",
            json.dumps(report.to_json(), indent=2).encode("utf-8"),
        )
        return report

    def _run_step(
        self,
        step: PipelineStep,
        manifest: MicroserviceManifest,
        resolved: dict[str, ScalarValue],
        run_id: str,
    ) -> tuple[StepResult, dict[str, str] | None]:
        started = now_iso()
        t0 = time.monotonic()
        log_lines: list[str] = []
        code = None
        message = ""

        if manifest.kind == "builtin":
            try:
                impl = self.registry.builtin_impl(step.service_id)
                out = impl(self.ws, **resolved)
                log_lines.append(f"ok: {out!r}")
            except SlegoError as exc:
                code, message = "E_RUNTIME", f"{exc.code}: {exc.message}"
                log_lines.append(message)
            except Exception as exc:  # noqa: BLE001 - builtin bug surfaces as step failure
                code, message = "E_RUNTIME", f"{type(exc).__name__}: {exc}"
                log_lines.append(message)
        else:
            code, message, lines = self._run_exec(manifest, resolved)
            log_lines.extend(lines)

        if code is None:
            for p in manifest.params:
                if p.role == "output_path":
                    value = resolved.get(p.name)
                    if isinstance(value, str) and value and not self.ws.exists(value):
                        code = "E_MISSING_OUTPUT"
                        message = f"declared output {value!r} was not produced"
                        log_lines.append(message)
                        break

        duration_ms = int((time.monotonic() - t0) * 1000)
        ended = now_iso()
        log_text = "\n".join(log_lines) + ("\n" if log_lines else "")
        self.ws.put_file(f"runs/{run_id}/{step.step_key}.log", log_text.encode("utf-8"))

        produced = tuple(
            resolved[p.name]
            for p in manifest.params
            if p.role == "output_path"
            and isinstance(resolved.get(p.name), str)
            and self.ws.exists(resolved[p.name])
        )
        result = StepResult(
            step_key=step.step_key,
            status="failed" if code else "success",
            started=started,
            ended=ended,
            duration_ms=duration_ms,
            produced_files=produced,
            log_excerpt=log_text[-LOG_EXCERPT_BYTES:],
        )
        error = {"step_key": step.step_key, "code": code, "message": message} if code else None
        return result, error

    def _run_exec(
        self, manifest: MicroserviceManifest, resolved: dict[str, ScalarValue]
    ) -> tuple[str | None, str, list[str]]:
        entry_rel = f"microservices/{manifest.id}/{manifest.entry}"
        if not self.ws.exists(entry_rel):
            entry_rel = manifest.entry or ""
        entry = self.ws.resolve(entry_rel)
        if str(entry).endswith(".py"):
            argv = [sys.executable, str(entry)]
        else:
            argv = [str(entry)]
        stdin_doc = json.dumps(resolved)
        try:
            proc = subprocess.run(
                argv,
                input=stdin_doc.encode("utf-8"),
                cwd=self.ws.root,
                capture_output=True,
                timeout=manifest.timeout_s,
            )
        except subprocess.TimeoutExpired:
            return "E_TIMEOUT", f"exceeded timeout of {manifest.timeout_s}s", [
                f"timeout after {manifest.timeout_s}s"
            ]
        except OSError as exc:
            return "E_EXEC_NONZERO", f"failed to launch {manifest.entry!r}: {exc}", [str(exc)]

        lines = []
        if proc.stdout:
            lines.append(proc.stdout.decode("utf-8", errors="replace").rstrip())
        if proc.stderr:
            lines.append(proc.stderr.decode("utf-8", errors="replace").rstrip())
        if proc.returncode != 0:
            lines.append(f"exit code {proc.returncode}")
            return "E_EXEC_NONZERO", f"process exited with code {proc.returncode}", lines
        return None, "", lines

    # -- reports ------------------------------------------------------------

    def get_run_report(self, run_id: str) -> ExecutionReport:
        rel = f"runs/{run_id}/report.json"
        if not self.ws.exists(rel):
            raise SlegoError("E_NOT_FOUND", f"no report for run {run_id!r}")
        return ExecutionReport.from_json(json.loads(self.ws.read_file(rel).decode("utf-8")))

    def run_exists(self, run_id: str) -> bool:
        return self.ws.exists(f"runs/{run_id}")
