from .embedding import cosine_similarity, embed_text, retrieve_top_n  # noqa: F401
from .core import Recommender, RecommenderConfig  # noqa: F401
from .prompts import (  # noqa: F401
    build_parameter_prompt,
    build_pipeline_prompt,
    parse_pipeline_from_response,
)
from .providers import LocalEmbedder, RemoteEmbedder, RemoteLLM, StubLLM  # noqa: F401
