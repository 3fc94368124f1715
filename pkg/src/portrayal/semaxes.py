"""Semantic axes: bipolar adjective sets, their per-decade vectors, and
group projections.

An axis file has one axis per line::

    noble.a.02\tbase,common,ignoble\taristocratic,august,blue

The axis vector points from the mean of the left pole toward the mean of
the right pole, built from the pole words actually present in a decade's
space; axes with fewer than three present words in either pole are excluded
for that decade.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import AxisExcluded, DataError, DuplicateAxis, EmptyPole, TooFewWords
from .spaces import EmbeddingSpace, cosine, mean_vector

logger = logging.getLogger(__name__)

MIN_POLE_WORDS = 3

LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class SemanticAxis:
    axis_id: str
    left_pole: tuple[str, ...]
    right_pole: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.left_pole or not self.right_pole:
            raise EmptyPole(f"axis {self.axis_id!r} has an empty pole")
        overlap = set(self.left_pole) & set(self.right_pole)
        if overlap:
            raise DataError(f"axis {self.axis_id!r} poles overlap: {sorted(overlap)}")


def load_axes(path: str | Path) -> list[SemanticAxis]:
    """Parse an axes file; duplicate ids and empty poles are errors."""
    axes: list[SemanticAxis] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path}:{lineno}: expected 3 tab-separated fields")
            axis_id, left_raw, right_raw = parts
            if axis_id in seen:
                raise DuplicateAxis(f"{path}:{lineno}: duplicate axis {axis_id!r}")
            seen.add(axis_id)
            left = tuple(w.strip() for w in left_raw.split(",") if w.strip())
            right = tuple(w.strip() for w in right_raw.split(",") if w.strip())
            if not left or not right:
                raise EmptyPole(f"{path}:{lineno}: axis {axis_id!r} has an empty pole")
            axes.append(SemanticAxis(axis_id=axis_id, left_pole=left, right_pole=right))
    return axes


@dataclass
class AxisVector:
    """One axis realized in one decade's space."""

    axis_id: str
    decade: int
    vector: np.ndarray
    used_left: list[str]
    used_right: list[str]
    left_mean: np.ndarray
    right_mean: np.ndarray

    @property
    def is_zero(self) -> bool:
        return not self.vector.any()


def axis_vector(
    axis: SemanticAxis, space: EmbeddingSpace, min_pole: int = MIN_POLE_WORDS
) -> AxisVector:
    """Right-pole mean minus left-pole mean over the words present.

    Raises ``AxisExcluded`` when either pole has fewer than ``min_pole``
    words in the space.  Identical pole means yield a zero vector, flagged
    via ``is_zero`` rather than raised.
    """
    try:
        left_mean, used_left = mean_vector(axis.left_pole, space, min_present=min_pole)
        right_mean, used_right = mean_vector(axis.right_pole, space, min_present=min_pole)
    except TooFewWords as exc:
        raise AxisExcluded(
            f"axis {axis.axis_id!r} has under {min_pole} pole words in decade {space.decade}"
        ) from exc
    return AxisVector(
        axis_id=axis.axis_id,
        decade=space.decade,
        vector=right_mean - left_mean,
        used_left=used_left,
        used_right=used_right,
        left_mean=left_mean,
        right_mean=right_mean,
    )


def build_axis_vectors(
    axes: Iterable[SemanticAxis], space: EmbeddingSpace, min_pole: int = MIN_POLE_WORDS
) -> tuple[dict[str, AxisVector], list[tuple[str, str]]]:
    """All axis vectors buildable in one decade plus the exclusion record."""
    vectors: dict[str, AxisVector] = {}
    excluded: list[tuple[str, str]] = []
    for axis in axes:
        try:
            av = axis_vector(axis, space, min_pole=min_pole)
        except AxisExcluded as exc:
            excluded.append((axis.axis_id, str(exc)))
            continue
        if av.is_zero:
            logger.warning("axis %s is zero in decade %d; skipped", axis.axis_id, space.decade)
            excluded.append((axis.axis_id, "zero axis vector"))
            continue
        vectors[axis.axis_id] = av
    return vectors, excluded


def project(group_vector: np.ndarray, axis: AxisVector) -> float:
    """Cosine of the group vector to the axis; positive means nearer the
    right pole."""
    return cosine(group_vector, axis.vector)


def nearer_pole(projection: float) -> str:
    return RIGHT if projection > 0 else LEFT


def axis_difference(
    group_a: np.ndarray, group_b: np.ndarray, axis: AxisVector
) -> tuple[float, str, str]:
    """Absolute difference of the two projections plus each group's nearer pole."""
    proj_a = project(group_a, axis)
    proj_b = project(group_b, axis)
    return abs(proj_a - proj_b), nearer_pole(proj_a), nearer_pole(proj_b)


@dataclass
class AxisComparison:
    axis_id: str
    decade: int
    abs_diff: float
    proj_a: float
    proj_b: float
    nearer_a: str
    nearer_b: str
    words_a: list[str]
    words_b: list[str]


def _representative_words(
    group_vector: np.ndarray, pole: str, axis: AxisVector, space: EmbeddingSpace, count: int = 3
) -> list[str]:
    # the used-pole words closest to the group vector, highest cosine first;
    # flagged zero vectors count as present but cannot be scored
    used = axis.used_right if pole == RIGHT else axis.used_left
    scored = sorted(
        (-cosine(space.vectors[w], group_vector), w) for w in used if space.usable(w)
    )
    return [w for _, w in scored[:count]]


def compare_axis(
    axis: AxisVector,
    group_a: np.ndarray,
    group_b: np.ndarray,
    space: EmbeddingSpace,
) -> AxisComparison:
    proj_a = project(group_a, axis)
    proj_b = project(group_b, axis)
    pole_a = nearer_pole(proj_a)
    pole_b = nearer_pole(proj_b)
    return AxisComparison(
        axis_id=axis.axis_id,
        decade=axis.decade,
        abs_diff=abs(proj_a - proj_b),
        proj_a=proj_a,
        proj_b=proj_b,
        nearer_a=pole_a,
        nearer_b=pole_b,
        words_a=_representative_words(group_a, pole_a, axis, space),
        words_b=_representative_words(group_b, pole_b, axis, space),
    )


def top_axes(comparisons: Iterable[AxisComparison], top_k: int) -> list[AxisComparison]:
    """Rank by absolute difference, descending; ties break on axis id."""
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    ranked = sorted(comparisons, key=lambda c: (-c.abs_diff, c.axis_id))
    return ranked[:top_k]


def write_axis_report_csv(
    rows: Mapping[int, list[AxisComparison]],
    group_a: str,
    group_b: str,
    path: str | Path,
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "decade",
                "rank",
                "axis_id",
                f"{group_a}_pole",
                f"{group_a}_words",
                f"{group_b}_pole",
                f"{group_b}_words",
                "abs_diff",
            ]
        )
        for decade in sorted(rows):
            for rank, row in enumerate(rows[decade], start=1):
                writer.writerow(
                    [
                        decade,
                        rank,
                        row.axis_id,
                        row.nearer_a,
                        ";".join(row.words_a),
                        row.nearer_b,
                        ";".join(row.words_b),
                        f"{row.abs_diff:.6f}",
                    ]
                )


__all__: Sequence[str] = [
    "MIN_POLE_WORDS",
    "LEFT",
    "RIGHT",
    "SemanticAxis",
    "load_axes",
    "AxisVector",
    "axis_vector",
    "build_axis_vectors",
    "project",
    "nearer_pole",
    "axis_difference",
    "AxisComparison",
    "compare_axis",
    "top_axes",
    "write_axis_report_csv",
]
