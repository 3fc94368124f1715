"""Lexicon-based toxicity rates with a semantic-axis time adjustment.

The lexicon is a delimited file with header columns ``lemma, category,
level``; rows at the requested level form the word list (all categories
count).  Because words drift in meaning over decades, rates are computed
against a per-decade *adjusted* lexicon: in an anchor decade we pick the
axes whose poles sit closest to the toxic words overall, record which side
of each axis every toxic word falls on, and then drop a word in any decade
where its side flips on a strict majority of those axes.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .context import ContextTable
from .errors import EmptyLexicon, EmptyTable, MissingColumn, NoUsableAxes, ZeroNorm
from .semaxes import LEFT, RIGHT, AxisVector, SemanticAxis, build_axis_vectors
from .spaces import EmbeddingSpace, cosine, unit_rows

logger = logging.getLogger(__name__)

DEFAULT_LEVEL = "conservative"
DEFAULT_TOP_AXES = 10
DEFAULT_ANCHOR_DECADE = 1990


@dataclass
class ToxicLexicon:
    words: frozenset[str]
    categories: dict[str, str]
    levels: dict[str, str]
    version: str = ""

    def __len__(self) -> int:
        return len(self.words)


def load_lexicon(
    path: str | Path, level: str | None = DEFAULT_LEVEL, version: str = ""
) -> ToxicLexicon:
    """Load the words at one level (``None`` keeps every row).

    All categories are kept.  Raises ``MissingColumn`` for a bad header and
    ``EmptyLexicon`` when nothing survives the filter.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        sample = fh.readline()
        delimiter = "\t" if "\t" in sample else ","
        fh.seek(0)
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        for column in ("lemma", "category", "level"):
            if column not in header:
                raise MissingColumn(f"{path}: missing column {column!r}")
        words = set()
        categories: dict[str, str] = {}
        levels: dict[str, str] = {}
        for row in reader:
            lemma = (row.get("lemma") or "").strip().lower()
            if not lemma:
                continue
            row_level = (row.get("level") or "").strip()
            if level is not None and row_level != level:
                continue
            words.add(lemma)
            categories[lemma] = (row.get("category") or "").strip()
            levels[lemma] = row_level
    if not words:
        raise EmptyLexicon(f"{path}: no words at level {level!r}")
    return ToxicLexicon(
        words=frozenset(words), categories=categories, levels=levels, version=version
    )


def _usable_lexicon_matrix(
    lexicon: ToxicLexicon, space: EmbeddingSpace
) -> tuple[list[str], np.ndarray]:
    words = sorted(w for w in lexicon.words if space.usable(w))
    if not words:
        return [], np.empty((0, space.dim))
    matrix = unit_rows(np.stack([space.vectors[w] for w in words]))
    return words, matrix


def axis_toxic_affinities(
    space: EmbeddingSpace,
    lexicon: ToxicLexicon,
    axes: Iterable[SemanticAxis],
) -> list[tuple[str, float]]:
    """Score each buildable axis by how tightly toxic words hug a pole.

    Score = mean over the lexicon words present in the space of
    max(cos(word, left-pole mean), cos(word, right-pole mean)); sorted
    descending with axis-id tie-break.
    """
    vectors, _ = build_axis_vectors(axes, space)
    words, matrix = _usable_lexicon_matrix(lexicon, space)
    if not vectors or not words:
        raise NoUsableAxes(
            f"decade {space.decade}: no usable axes or no lexicon words in space"
        )
    scored = []
    for axis_id in sorted(vectors):
        av = vectors[axis_id]
        left_norm = float(np.linalg.norm(av.left_mean))
        right_norm = float(np.linalg.norm(av.right_mean))
        if left_norm == 0.0 or right_norm == 0.0:
            logger.warning("axis %s has a zero pole mean; skipped", axis_id)
            continue
        cos_left = matrix @ (av.left_mean / left_norm)
        cos_right = matrix @ (av.right_mean / right_norm)
        scored.append((axis_id, float(np.maximum(cos_left, cos_right).mean())))
    if not scored:
        raise NoUsableAxes(f"decade {space.decade}: every axis had a zero pole mean")
    scored.sort(key=lambda t: (-t[1], t[0]))
    return scored


def rank_axes_by_toxic_affinity(
    space: EmbeddingSpace,
    lexicon: ToxicLexicon,
    axes: Iterable[SemanticAxis],
    top_n: int = DEFAULT_TOP_AXES,
) -> list[str]:
    scored = axis_toxic_affinities(space, lexicon, axes)
    if len(scored) < top_n:
        logger.warning(
            "only %d axes qualify for toxic affinity (wanted %d)", len(scored), top_n
        )
    return [axis_id for axis_id, _ in scored[:top_n]]


def word_side(word_vector: np.ndarray, axis: AxisVector) -> str:
    """Which pole a word falls on; an exact zero cosine counts as left."""
    return RIGHT if cosine(word_vector, axis.vector) > 0 else LEFT


@dataclass
class ToxicityAdjustment:
    """Anchor-decade reference sides for the top toxic-affinity axes."""

    anchor_decade: int
    top_axes: list[str]
    reference_sides: dict[str, dict[str, str]]
    removed: dict[int, set[str]] = field(default_factory=dict)


def build_adjustment(
    anchor_space: EmbeddingSpace,
    lexicon: ToxicLexicon,
    axes: Iterable[SemanticAxis],
    top_n: int = DEFAULT_TOP_AXES,
) -> ToxicityAdjustment:
    axes = list(axes)
    top_ids = rank_axes_by_toxic_affinity(anchor_space, lexicon, axes, top_n=top_n)
    top_defs = [a for a in axes if a.axis_id in set(top_ids)]
    vectors, _ = build_axis_vectors(top_defs, anchor_space)
    reference: dict[str, dict[str, str]] = {}
    for axis_id in top_ids:
        av = vectors[axis_id]
        sides = {}
        for word in lexicon.words:
            if anchor_space.usable(word):
                sides[word] = word_side(anchor_space.vectors[word], av)
        reference[axis_id] = sides
    return ToxicityAdjustment(
        anchor_decade=anchor_space.decade,
        top_axes=top_ids,
        reference_sides=reference,
    )


def adjust_lexicon(
    space: EmbeddingSpace,
    adjustment: ToxicityAdjustment,
    lexicon: ToxicLexicon,
    axes: Iterable[SemanticAxis],
) -> tuple[set[str], set[str]]:
    """Split the lexicon into (retained, removed) for one decade.

    The top axes are recomputed in the decade's space; a word is removed
    only when its side differs from the anchor reference on a strict
    majority of the top axes.  Words absent from the decade space are
    retained (they can still be counted if they occur in context tables).
    """
    top_ids = set(adjustment.top_axes)
    top_defs = [a for a in axes if a.axis_id in top_ids]
    vectors, _ = build_axis_vectors(top_defs, space)
    majority = len(adjustment.top_axes)
    removed: set[str] = set()
    for word in lexicon.words:
        if not space.usable(word):
            continue
        vec = space.vectors[word]
        flips = 0
        for axis_id in adjustment.top_axes:
            av = vectors.get(axis_id)
            if av is None:
                continue
            reference = adjustment.reference_sides.get(axis_id, {}).get(word)
            if reference is None:
                continue
            try:
                side = word_side(vec, av)
            except ZeroNorm:
                continue
            if side != reference:
                flips += 1
        if 2 * flips > majority:
            removed.add(word)
    retained = set(lexicon.words) - removed
    adjustment.removed[space.decade] = set(removed)
    return retained, removed


def toxicity_rate(table: ContextTable, retained: Iterable[str]) -> float:
    """Percentage of the table's weight falling on retained toxic words."""
    total = table.total_weight
    if total == 0:
        raise EmptyTable(f"({table.decade},{table.group}) has zero total weight")
    toxic_weight = sum(table.counts.get(word, 0) for word in set(retained))
    return 100.0 * toxic_weight / total


@dataclass
class ToxicityRow:
    decade: int
    group: str
    toxicity_percent: float
    removed_word_count: int


def write_toxicity_csv(rows: Iterable[ToxicityRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["decade", "group", "toxicity_percent", "removed_word_count"])
        for row in sorted(rows, key=lambda r: (r.decade, r.group)):
            writer.writerow(
                [row.decade, row.group, f"{row.toxicity_percent:.6f}", row.removed_word_count]
            )


def write_removed_words_csv(removed: Mapping[int, set[str]], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["decade", "removed_words"])
        for decade in sorted(removed):
            writer.writerow([decade, ";".join(sorted(removed[decade]))])


__all__: Sequence[str] = [
    "DEFAULT_LEVEL",
    "DEFAULT_TOP_AXES",
    "DEFAULT_ANCHOR_DECADE",
    "ToxicLexicon",
    "load_lexicon",
    "axis_toxic_affinities",
    "rank_axes_by_toxic_affinity",
    "word_side",
    "ToxicityAdjustment",
    "build_adjustment",
    "adjust_lexicon",
    "toxicity_rate",
    "ToxicityRow",
    "write_toxicity_csv",
    "write_removed_words_csv",
]
