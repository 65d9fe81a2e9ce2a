"""Embedding and LLM providers.

The stub LLM is the deterministic offline provider: for a SELECT_PIPELINE
prompt it answers with the first candidate's config; for REFINE_PARAMETERS it
fills every omitted parameter from the defaults quoted in the prompt.  The
remote adapters speak to HTTP services configured through environment
variables and are not needed for offline operation.
"""

from __future__ import annotations

import json
import math
import os

import httpx

from ..errors import SlegoError
from ..model import parse_pipeline_config, serialize_pipeline_config
from . import prompts as P
from .embedding import DEFAULT_DIM, embed_text

LLM_ENDPOINT_ENV = "SLEGO_LLM_ENDPOINT"
LLM_API_KEY_ENV = "SLEGO_LLM_API_KEY"
EMBED_ENDPOINT_ENV = "SLEGO_EMBED_ENDPOINT"

STUB_RATIONALE = "Selected the stored pipeline whose description is most similar to the query."
STUB_REFINE_NOTE = "Filled every omitted parameter from the documented defaults."


class LocalEmbedder:
    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = dim

    def embed(self, text: str) -> list[float]:
        return embed_text(text, self.dim)


class RemoteEmbedder:
    """Delegates to an embedding HTTP service; re-normalizes the result."""

    def __init__(self, endpoint: str | None = None, dim: int = DEFAULT_DIM, timeout: float = 30.0):
        self.endpoint = endpoint or os.environ.get(EMBED_ENDPOINT_ENV, "")
        self.dim = dim
        self.timeout = timeout

    def embed(self, text: str) -> list[float]:
        if not self.endpoint:
            raise SlegoError("E_PROVIDER", f"no embedding endpoint configured ({EMBED_ENDPOINT_ENV})")
        try:
            resp = httpx.post(self.endpoint, json={"input": text}, timeout=self.timeout)
            resp.raise_for_status()
            values = [float(v) for v in resp.json()["embedding"]]
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise SlegoError("E_PROVIDER", f"embedding service failed: {exc}") from exc
        norm = math.sqrt(sum(v * v for v in values))
        return values if norm == 0.0 else [v / norm for v in values]


class StubLLM:
    """Deterministic offline chat provider implementing the prompt contract."""

    def complete(self, prompt: str) -> str:
        if P.SELECT_MARKER in prompt:
            configs = P.configs_in_select_prompt(prompt)
            if configs:
                payload = configs[0]
            else:
                payload = P.partial_in_select_prompt(prompt)
                if payload is None:
                    raise SlegoError("E_PROVIDER", "select prompt carries neither candidates nor a partial pipeline")
            return f"{STUB_RATIONALE}\n\n```json\n{payload}\n```\n"
        if P.REFINE_MARKER in prompt:
            cfg = parse_pipeline_config(P.stage1_in_refine_prompt(prompt))
            defaults = P.defaults_in_refine_prompt(prompt)
            filled = []
            for step in cfg.steps:
                base = dict(defaults.get(step.step_key, {}))
                base.update(step.arg_map())
                filled.append(type(step).make(step.service_id, base, step_key=step.step_key))
            payload = serialize_pipeline_config(type(cfg).make(filled))
            return f"{STUB_REFINE_NOTE}\n\n```json\n{payload}\n```\n"
        raise SlegoError("E_PROVIDER", "unrecognized prompt task")


class RemoteLLM:
    """Minimal chat-completion adapter (single user message per request)."""

    def __init__(self, endpoint: str | None = None, api_key: str | None = None, timeout: float = 120.0):
        self.endpoint = endpoint or os.environ.get(LLM_ENDPOINT_ENV, "")
        self.api_key = api_key or os.environ.get(LLM_API_KEY_ENV, "")
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        if not self.endpoint:
            raise SlegoError("E_PROVIDER", f"no LLM endpoint configured ({LLM_ENDPOINT_ENV})")
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {"messages": [{"role": "user", "content": prompt}]}
        try:
            resp = httpx.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
            resp.raise_for_status()
            doc = resp.json()
            return doc["choices"][0]["message"]["content"]
        except (httpx.HTTPError, KeyError, IndexError, TypeError) as exc:
            raise SlegoError("E_PROVIDER", f"LLM service failed: {exc}") from exc
