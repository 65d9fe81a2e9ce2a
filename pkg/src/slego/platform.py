"""Wiring: workspace + knowledge base + registry + engine + recommender."""

from __future__ import annotations

import os
from pathlib import Path

from .engine import PipelineEngine
from .kb import KnowledgeBase
from .recommend import (
    LocalEmbedder,
    Recommender,
    RecommenderConfig,
    RemoteEmbedder,
    RemoteLLM,
    StubLLM,
)
from .registry import Registry
from .services import builtin_manifests
from .workspace import Workspace

WORKSPACE_ENV = "SLEGO_WORKSPACE"
EMBED_PROVIDER_ENV = "SLEGO_EMBED_PROVIDER"


class Platform:
    def __init__(self, root: str | Path, recommender_config: RecommenderConfig | None = None):
        self.ws = Workspace(root)
        rc = recommender_config or RecommenderConfig(
            embed_provider=os.environ.get(EMBED_PROVIDER_ENV, "local"),
        )
        if rc.embed_provider == "remote-embedding":
            self.embedder = RemoteEmbedder(dim=rc.embedding_dim)
        else:
            self.embedder = LocalEmbedder(dim=rc.embedding_dim)
        self.kb = KnowledgeBase(self.ws, self.embedder.embed)
        self.registry = Registry(self.ws, self.kb)
        self.engine = PipelineEngine(self.ws, self.registry)
        self.kb.pipeline_validator = self.engine.validate_pipeline
        for manifest, impl in builtin_manifests():
            self.registry.register_builtin(manifest, impl)
        llm = RemoteLLM() if rc.llm_provider == "remote-llm" else StubLLM()
        self.recommender = Recommender(self.kb, self.registry, self.engine, self.embedder, llm, rc)

    def close(self) -> None:
        self.kb.flush()


def open_platform(root: str | Path | None = None, **kwargs) -> Platform:
    root = root or os.environ.get(WORKSPACE_ENV) or "workspace"
    return Platform(root, **kwargs)
