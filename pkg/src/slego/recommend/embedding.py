"""Hashed bag-of-words text embedding and cosine retrieval.

The local embedding is deterministic and dependency-free: lowercase the text,
split into maximal alphanumeric runs, hash each token with 64-bit FNV-1a,
bump the component ``hash mod dim``, then L2-normalize (zero vectors stay
zero).
"""

from __future__ import annotations

import math

from ..errors import SlegoError

DEFAULT_DIM = 256

FNV_OFFSET = 14695981039346656037
FNV_PRIME = 1099511628211
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h = ((h ^ b) * FNV_PRIME) & _MASK64
    return h


def tokenize(text: str) -> list[str]:
    return "".join(c if c.isalnum() else " " for c in text.lower()).split()


def embed_text(text: str, dim: int = DEFAULT_DIM) -> list[float]:
    vec = [0.0] * dim
    for tok in tokenize(text):
        vec[fnv1a64(tok.encode("utf-8")) % dim] += 1.0
    norm = math.sqrt(sum(v * v for v in vec))
    if norm == 0.0:
        return vec
    return [v / norm for v in vec]


def cosine_similarity(a: list[float], b: list[float]) -> float:
    if len(a) != len(b):
        raise SlegoError("E_DIM_MISMATCH", f"vector dims differ: {len(a)} vs {len(b)}")
    na = math.sqrt(sum(x * x for x in a))
    nb = math.sqrt(sum(x * x for x in b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return sum(x * y for x, y in zip(a, b)) / (na * nb)


def retrieve_top_n(query_vec: list[float], kb, n: int) -> list[tuple[str, float]]:
    """Top-n pipeline records by cosine similarity; ties broken by id ascending."""
    scored = [
        (rec.id, cosine_similarity(query_vec, list(rec.embedding)))
        for rec in kb.list_pipeline_records()
    ]
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored[: max(n, 0)]
