"""Per-decade word vector spaces and the vector primitives built on them.

A space is loaded from a plain text file, one word per line::

    word v1 v2 ... vd

An optional word2vec-style count header ("<rows> <dim>") is tolerated and
skipped.  Spaces for different decades are assumed to be pre-aligned: this
package never re-aligns them, it only checks that their dimensions agree.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyFile, TooFewWords, ZeroNorm

logger = logging.getLogger(__name__)


@dataclass
class EmbeddingSpace:
    """Word -> d-dimensional vector map for one decade."""

    decade: int
    dim: int
    vectors: dict[str, np.ndarray]
    zero_words: set[str] = field(default_factory=set)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors

    def __len__(self) -> int:
        return len(self.vectors)

    def get(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word)

    def usable(self, word: str) -> bool:
        """True when the word has a non-zero vector (cosine is defined)."""
        return word in self.vectors and word not in self.zero_words


def _is_count_header(parts: list[str]) -> bool:
    if len(parts) != 2:
        return False
    try:
        int(parts[0]), int(parts[1])
    except ValueError:
        return False
    return True


def load_space(path: str | Path, decade: int) -> EmbeddingSpace:
    """Load one decade's vectors from a text file.

    Duplicate words keep the last occurrence (with a warning); zero vectors
    are kept but flagged in ``zero_words``.  Raises ``DimensionMismatch``
    when a line's value count disagrees with the first line's, ``EmptyFile``
    when no vector line is found.
    """
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    zero_words: set[str] = set()
    dim: int | None = None
    duplicates = 0
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and _is_count_header(parts):
                continue
            word, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise DimensionMismatch(f"{path}:{lineno}: no vector values")
            if len(values) != dim:
                raise DimensionMismatch(
                    f"{path}:{lineno}: expected {dim} values, got {len(values)}"
                )
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise DimensionMismatch(f"{path}:{lineno}: non-numeric value") from exc
            if word in vectors:
                duplicates += 1
            vectors[word] = vec
            if not vec.any():
                zero_words.add(word)
            else:
                zero_words.discard(word)
    if dim is None or not vectors:
        raise EmptyFile(f"{path}: no vectors found")
    if duplicates:
        logger.warning("%s: %d duplicate words, last occurrence kept", path, duplicates)
    if zero_words:
        logger.warning("%s: %d zero vectors flagged", path, len(zero_words))
    return EmbeddingSpace(decade=decade, dim=dim, vectors=vectors, zero_words=zero_words)


def load_spaces(paths_by_decade: Mapping[int, str | Path]) -> dict[int, EmbeddingSpace]:
    """Load all configured decades, enforcing one dimension across the run."""
    spaces: dict[int, EmbeddingSpace] = {}
    dim: int | None = None
    for decade in sorted(paths_by_decade):
        space = load_space(paths_by_decade[decade], decade)
        if dim is None:
            dim = space.dim
        elif space.dim != dim:
            raise DimensionMismatch(
                f"decade {decade} has dim {space.dim}, expected {dim}"
            )
        spaces[decade] = space
    return spaces


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity of two vectors; raises ``ZeroNorm`` on zero input."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroNorm("cosine undefined for a zero vector")
    return float(np.dot(u, v) / (nu * nv))


def mean_vector(
    words: Iterable[str], space: EmbeddingSpace, min_present: int = 1
) -> tuple[np.ndarray, list[str]]:
    """Arithmetic mean of the vectors for the words present in the space.

    Returns the mean and the list of words actually used (input order,
    duplicates dropped).  Raises ``TooFewWords`` when fewer than
    ``min_present`` words are found.
    """
    used: list[str] = []
    seen: set[str] = set()
    for word in words:
        if word in seen:
            continue
        seen.add(word)
        if word in space.vectors:
            used.append(word)
    if len(used) < min_present:
        raise TooFewWords(len(used), min_present)
    stacked = np.stack([space.vectors[w] for w in used])
    return stacked.mean(axis=0), used


def unit_rows(matrix: np.ndarray) -> np.ndarray:
    """Row-normalize a matrix, leaving zero rows untouched."""
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return matrix / safe


__all__: Sequence[str] = [
    "EmbeddingSpace",
    "load_space",
    "load_spaces",
    "cosine",
    "mean_vector",
    "unit_rows",
]
