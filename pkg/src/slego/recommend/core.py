"""End-to-end recommendation workflow.

embed query -> cosine retrieval of top-N stored pipelines -> stage-1
pipeline-selection prompt -> LLM -> parse -> stage-2 parameter-refinement
prompt -> LLM -> parse -> registry validation, with one optional retry that
feeds the validation findings back into the stage-2 prompt.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SlegoError, errors_of
from ..model import PipelineConfig, Recommendation
from .embedding import DEFAULT_DIM, retrieve_top_n
from .prompts import build_parameter_prompt, build_pipeline_prompt, parse_pipeline_from_response


@dataclass
class RecommenderConfig:
    top_n: int = 3
    embedding_dim: int = DEFAULT_DIM
    embed_provider: str = "local"  # local | remote-embedding
    llm_provider: str = "stub"  # stub | remote-llm
    max_retry: int = 1

    def __post_init__(self) -> None:
        if self.top_n < 1:
            raise SlegoError("E_PRECONDITION", "top_n must be >= 1")
        if self.max_retry not in (0, 1):
            raise SlegoError("E_PRECONDITION", "max_retry must be 0 or 1")


class Recommender:
    def __init__(self, kb, registry, engine, embedder, llm, config: RecommenderConfig | None = None):
        self.kb = kb
        self.registry = registry
        self.engine = engine
        self.embedder = embedder
        self.llm = llm
        self.config = config or RecommenderConfig()

    def _candidate_context(self, retrieved: list[tuple[str, float]]) -> list[dict]:
        out = []
        for pid, sim in retrieved:
            rec = self.kb.get_pipeline_record(pid)
            manifests = []
            seen = set()
            for step in rec.config.steps:
                if step.service_id in seen or not self.registry.has_service(step.service_id):
                    continue
                seen.add(step.service_id)
                manifests.append(self.registry.get_service(step.service_id).manifest)
            out.append({"record": rec, "similarity": sim, "manifests": manifests})
        return out

    def recommend(self, query: str, partial_pipeline: PipelineConfig | None = None) -> Recommendation:
        query_vec = self.embedder.embed(query)
        retrieved = retrieve_top_n(query_vec, self.kb, self.config.top_n)
        if not retrieved and partial_pipeline is None:
            raise SlegoError("E_EMPTY_KB", "knowledge base holds no pipelines and no partial pipeline was given")

        stage1_prompt = build_pipeline_prompt(query, partial_pipeline, self._candidate_context(retrieved))
        stage1_response = self.llm.complete(stage1_prompt)
        stage1_config, _ = parse_pipeline_from_response(stage1_response)

        manifests = {
            s.service_id: self.registry.get_service(s.service_id).manifest
            for s in stage1_config.steps
            if self.registry.has_service(s.service_id)
        }
        stage2_prompt = build_parameter_prompt(query, stage1_config, manifests)
        stage2_response = self.llm.complete(stage2_prompt)
        config, explanation = parse_pipeline_from_response(stage2_response)

        findings = self.engine.validate_pipeline(config)
        if errors_of(findings) and self.config.max_retry:
            rendered = "\n".join(f"- [{f.code}] {f.message}" for f in errors_of(findings))
            stage2_prompt = stage2_prompt + f"\nVALIDATION FINDINGS:\n{rendered}\n"
            stage2_response = self.llm.complete(stage2_prompt)
            config, explanation = parse_pipeline_from_response(stage2_response)
            findings = self.engine.validate_pipeline(config)

        return Recommendation(
            config=config,
            explanation=explanation,
            retrieved=tuple(retrieved),
            stage1_prompt=stage1_prompt,
            stage1_response=stage1_response,
            stage2_prompt=stage2_prompt,
            stage2_response=stage2_response,
            valid=not errors_of(findings),
        )
