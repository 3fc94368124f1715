"""Shared helpers for building tiny fixtures in tests."""

from collections import Counter

import numpy as np

from portrayal.context import ContextTable
from portrayal.spaces import EmbeddingSpace


def make_space(vectors: dict[str, list[float]], decade: int = 1850) -> EmbeddingSpace:
    arrays = {w: np.asarray(v, dtype=np.float64) for w, v in vectors.items()}
    dim = len(next(iter(arrays.values())))
    zero = {w for w, v in arrays.items() if not v.any()}
    return EmbeddingSpace(decade=decade, dim=dim, vectors=arrays, zero_words=zero)


def make_table(
    counts: dict[str, int],
    decade: int = 1850,
    group: str = "GRP_A",
    persons: set[str] | None = None,
    ngrams: int = 0,
) -> ContextTable:
    return ContextTable(
        decade=decade,
        group=group,
        counts=Counter(counts),
        persons_seen=persons or set(),
        ngrams_matched=ngrams,
    )


def random_unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)
