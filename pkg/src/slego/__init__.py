"""Collaborative analytics platform: validated microservices, sequential
pipelines, a metadata knowledge base, and an embedding + LLM recommender."""

from .errors import Finding, SlegoError
from .model import (
    ExecutionReport,
    MicroserviceManifest,
    MicroserviceRecord,
    ParameterSpec,
    PipelineConfig,
    PipelineRecord,
    PipelineStep,
    Recommendation,
    parse_pipeline_config,
    serialize_pipeline_config,
)
from .platform import Platform, open_platform
from .workspace import Workspace

__all__ = [
    "ExecutionReport",
    "Finding",
    "MicroserviceManifest",
    "MicroserviceRecord",
    "ParameterSpec",
    "PipelineConfig",
    "PipelineRecord",
    "PipelineStep",
    "Platform",
    "Recommendation",
    "SlegoError",
    "Workspace",
    "open_platform",
    "parse_pipeline_config",
    "serialize_pipeline_config",
]

__version__ = "0.1.0"
