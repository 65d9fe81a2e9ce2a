"""Prompt construction and response parsing for the two-stage recommender.

Templates live as text assets next to the package (``slego/templates``) with
``{query}``, ``{partial}``, ``{candidates}`` and ``{stage1}`` placeholders.
Candidate and parameter blocks use fixed markers so the deterministic stub
provider can read the same prompts a real model would receive.
"""

from __future__ import annotations

import json
import re
from importlib import resources

from ..errors import SlegoError
from ..model import (
    MicroserviceManifest,
    PipelineConfig,
    parse_pipeline_config,
    serialize_pipeline_config,
)

SELECT_MARKER = "### TASK: SELECT_PIPELINE"
REFINE_MARKER = "### TASK: REFINE_PARAMETERS"
CANDIDATE_MARKER = "#### CANDIDATE:"
STEP_MARKER = "#### STEP:"

_FENCE_RE = re.compile(r"```[a-zA-Z]*\n(.*?)\n?```", re.DOTALL)


def _template(name: str) -> str:
    return resources.files("slego.templates").joinpath(name).read_text("utf-8")


def build_pipeline_prompt(
    query: str,
    partial_pipeline: PipelineConfig | None,
    candidates: list[dict],
) -> str:
    """Stage-1 prompt.

    ``candidates`` items: {"record": PipelineRecord, "similarity": float,
    "manifests": list[MicroserviceManifest]} in retrieval order.
    """
    if not candidates and partial_pipeline is None:
        raise SlegoError("E_NO_CONTEXT", "no candidates and no partial pipeline to prompt with")
    partial = (
        serialize_pipeline_config(partial_pipeline) if partial_pipeline is not None else "NONE"
    )
    blocks = []
    for c in candidates:
        rec = c["record"]
        doc_lines = "\n".join(
            f"##### {m.id}\n{m.docstring}" for m in c.get("manifests", [])
        )
        blocks.append(
            f"{CANDIDATE_MARKER} {rec.name} (similarity {c['similarity']:.4f})\n"
            f"DESCRIPTION:\n{rec.description}\n"
            f"CONFIG:\n```json\n{serialize_pipeline_config(rec.config)}\n```\n"
            f"MICROSERVICE DOCSTRINGS:\n{doc_lines}\n"
        )
    return _template("select_pipeline.txt").format(
        query=query, partial=partial, candidates="\n".join(blocks) or "NONE"
    )


def build_parameter_prompt(
    query: str,
    stage1_config: PipelineConfig,
    manifests: dict[str, MicroserviceManifest],
) -> str:
    """Stage-2 prompt: the stage-1 config plus full parameter specifications."""
    blocks = []
    for step in stage1_config.steps:
        manifest = manifests.get(step.service_id)
        if manifest is None:
            blocks.append(f"{STEP_MARKER} {step.step_key} ({step.service_id})\nUNKNOWN SERVICE\n")
            continue
        lines = "\n".join(
            f"- {p.name} ({p.ptype}, role={p.role}): {p.description or 'no description'}"
            for p in manifest.params
        )
        defaults = json.dumps(manifest.defaults(), indent=2)
        blocks.append(
            f"{STEP_MARKER} {step.step_key} ({step.service_id})\n"
            f"PARAMETERS:\n{lines}\n"
            f"DEFAULTS:\n```json\n{defaults}\n```\n"
        )
    return _template("refine_parameters.txt").format(
        query=query,
        stage1=serialize_pipeline_config(stage1_config),
        candidates="\n".join(blocks) or "NONE",
    )


# ---------------------------------------------------------------------------
# Response parsing
# ---------------------------------------------------------------------------


def _balanced_span(text: str) -> tuple[int, int] | None:
    """First balanced top-level {...} or [...] span, string-aware."""
    starts = [i for i, c in enumerate(text) if c in "{["]
    for start in starts:
        depth = 0
        in_str = False
        escape = False
        for i in range(start, len(text)):
            c = text[i]
            if in_str:
                if escape:
                    escape = False
                elif c == "\\":
                    escape = True
                elif c == '"':
                    in_str = False
                continue
            if c == '"':
                in_str = True
            elif c in "{[":
                depth += 1
            elif c in "}]":
                depth -= 1
                if depth == 0:
                    return start, i + 1
                if depth < 0:
                    break
        # unbalanced from this start; try the next one
    return None


def extract_json_span(response: str) -> tuple[str, str]:
    """Return (json_text, explanation) from an LLM response."""
    m = _FENCE_RE.search(response)
    if m:
        payload = m.group(1)
        explanation = (response[: m.start()] + response[m.end() :]).strip()
        return payload, explanation
    span = _balanced_span(response)
    if span is None:
        raise SlegoError("E_NO_JSON", "response contains no fenced block or balanced JSON span")
    start, end = span
    payload = response[start:end]
    explanation = (response[:start] + response[end:]).strip()
    return payload, explanation


def parse_pipeline_from_response(response: str) -> tuple[PipelineConfig, str]:
    payload, explanation = extract_json_span(response)
    cfg = parse_pipeline_config(payload)
    return cfg, explanation


# -- prompt introspection helpers (used by the stub provider) ---------------


def configs_in_select_prompt(prompt: str) -> list[str]:
    """Serialized candidate configs in block order."""
    tail = prompt.split("CANDIDATE PIPELINES:", 1)[-1]
    return [m.group(1) for m in _FENCE_RE.finditer(tail)]


def partial_in_select_prompt(prompt: str) -> str | None:
    section = prompt.split("PARTIAL PIPELINE:", 1)[-1].split("CANDIDATE PIPELINES:", 1)[0]
    if section.strip() == "NONE":
        return None
    m = _FENCE_RE.search(section)
    if m:
        return m.group(1)
    stripped = section.strip()
    return stripped or None


def stage1_in_refine_prompt(prompt: str) -> str:
    section = prompt.split("STAGE-1 PIPELINE:", 1)[-1]
    m = _FENCE_RE.search(section)
    if not m:
        raise SlegoError("E_NO_JSON", "refine prompt carries no stage-1 config")
    return m.group(1)


def defaults_in_refine_prompt(prompt: str) -> dict[str, dict]:
    """Map step_key -> quoted defaults object, read from the STEP blocks."""
    out: dict[str, dict] = {}
    for block in prompt.split(STEP_MARKER)[1:]:
        header = block.splitlines()[0].strip()
        step_key = header.split(" (", 1)[0]
        m = _FENCE_RE.search(block)
        if m:
            out[step_key] = json.loads(m.group(1))
    return out
