"""Decade-pair correlation matrices and the transition significance test.

For one group, the Pearson correlation between every pair of its decade
vectors forms a symmetric matrix with unit diagonal.  A transition
``t -> t+1`` is tested by comparing the absolute differences between the
two decades' matrix columns (self-correlation rows dropped) against the
same construction pooled over every other transition, with a two-sided
Kolmogorov-Smirnov two-sample test.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ConstantInput,
    EmptySample,
    IntervalMissing,
    TooFewDecades,
    TooFewTransitions,
)

# stop adding Kolmogorov series terms once they drop below this magnitude
SERIES_TRUNCATION = 1e-12


def pearson(u: Sequence[float], v: Sequence[float]) -> float:
    """Sample Pearson coefficient; raises ``ConstantInput`` when undefined."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape or u.ndim != 1:
        raise ValueError("inputs must be equal-length 1-d vectors")
    if len(u) < 2:
        raise ValueError("need at least 2 coordinates")
    du = u - u.mean()
    dv = v - v.mean()
    su = float(np.sqrt(du @ du))
    sv = float(np.sqrt(dv @ dv))
    if su == 0.0 or sv == 0.0:
        raise ConstantInput("pearson undefined for a constant vector")
    return float((du @ dv) / (su * sv))


@dataclass
class CorrelationMatrix:
    group: str
    decades: list[int]
    values: np.ndarray
    missing: list[int] = field(default_factory=list)

    def column(self, decade: int) -> np.ndarray:
        return self.values[:, self.decades.index(decade)]

    def transitions(self) -> list[int]:
        """Start decades of the consecutive intervals in this matrix."""
        return self.decades[:-1]


def correlation_matrix(
    vectors_by_decade: Mapping[int, np.ndarray | None], group: str
) -> CorrelationMatrix:
    """All-pairs Pearson matrix over the decades that have vectors.

    Decades mapped to ``None`` are recorded in ``missing`` and excluded.
    The result is exactly symmetric with an exact unit diagonal.
    """
    missing = sorted(d for d, v in vectors_by_decade.items() if v is None)
    decades = sorted(d for d, v in vectors_by_decade.items() if v is not None)
    if len(decades) < 2:
        raise TooFewDecades(f"need >= 2 decades with vectors, got {len(decades)}")
    size = len(decades)
    values = np.eye(size)
    for i in range(size):
        for j in range(i + 1, size):
            r = pearson(vectors_by_decade[decades[i]], vectors_by_decade[decades[j]])
            values[i, j] = values[j, i] = r
    return CorrelationMatrix(group=group, decades=decades, values=values, missing=missing)


def transition_samples(matrix: CorrelationMatrix, t: int) -> np.ndarray:
    """Absolute column differences for the transition starting at decade ``t``.

    The two self-correlation rows are dropped by diagonal position (not by
    comparing values against 1, which off-diagonal entries could round to).
    """
    if t not in matrix.decades:
        raise IntervalMissing(f"decade {t} not in matrix")
    i = matrix.decades.index(t)
    if i + 1 >= len(matrix.decades):
        raise IntervalMissing(f"decade {t} has no following decade")
    keep = [r for r in range(len(matrix.decades)) if r not in (i, i + 1)]
    col_t = matrix.values[keep, i]
    col_next = matrix.values[keep, i + 1]
    return np.abs(col_t - col_next)


def pooled_samples(matrix: CorrelationMatrix, exclude_t: int) -> np.ndarray:
    """Concatenated transition samples of every interval except ``exclude_t``."""
    starts = matrix.transitions()
    if len(starts) < 3:
        raise TooFewTransitions(f"need >= 3 transitions, got {len(starts)}")
    if exclude_t not in starts:
        raise IntervalMissing(f"decade {exclude_t} does not start a transition")
    parts = [transition_samples(matrix, t) for t in starts if t != exclude_t]
    return np.concatenate(parts)


def _kolmogorov_sf(lam: float) -> float:
    """Two-sided asymptotic Kolmogorov survival function.

    Alternating series 2 * sum_j (-1)^(j-1) exp(-2 j^2 lam^2), truncated
    once terms fall below ``SERIES_TRUNCATION``; clamped into [0, 1].
    """
    if lam <= 0.0:
        return 1.0
    total = 0.0
    sign = 1.0
    for j in range(1, 100_000):
        term = 2.0 * math.exp(-2.0 * j * j * lam * lam)
        if term < SERIES_TRUNCATION:
            break
        total += sign * term
        sign = -sign
    return min(1.0, max(0.0, total))


def ks_two_sample(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """Two-sample KS statistic and asymptotic two-sided p-value.

    D is the exact supremum distance between the two empirical CDFs; the
    p-value evaluates the Kolmogorov series at ``sqrt(mn/(m+n)) * D``.
    """
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    m, n = len(a), len(b)
    if m == 0 or n == 0:
        raise EmptySample("both samples must be non-empty")
    everything = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, everything, side="right") / m
    cdf_b = np.searchsorted(b, everything, side="right") / n
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    effective = math.sqrt(m * n / (m + n))
    p = _kolmogorov_sf(effective * d)
    return d, p


@dataclass
class TransitionTest:
    interval: tuple[int, int]
    statistic: float
    p_value: float
    mean_distance_interval: float
    mean_distance_rest: float


def transition_report(matrix: CorrelationMatrix) -> list[TransitionTest]:
    """One KS row per transition: interval samples vs all others pooled."""
    starts = matrix.transitions()
    if len(starts) < 3:
        raise TooFewTransitions(f"need >= 3 transitions, got {len(starts)}")
    rows = []
    for i, t in enumerate(starts):
        interval = transition_samples(matrix, t)
        rest = pooled_samples(matrix, t)
        d, p = ks_two_sample(interval, rest)
        rows.append(
            TransitionTest(
                interval=(t, matrix.decades[matrix.decades.index(t) + 1]),
                statistic=d,
                p_value=p,
                mean_distance_interval=float(interval.mean()),
                mean_distance_rest=float(rest.mean()),
            )
        )
    return rows


def write_matrix_csv(matrix: CorrelationMatrix, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["decade"] + [str(d) for d in matrix.decades])
        for i, decade in enumerate(matrix.decades):
            writer.writerow(
                [decade] + [f"{v:.6f}" for v in matrix.values[i]]
            )


def write_transitions_csv(rows: Iterable[TransitionTest], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "interval_start",
                "interval_end",
                "statistic",
                "p_value",
                "mean_distance_interval",
                "mean_distance_rest",
            ]
        )
        for row in rows:
            writer.writerow(
                [
                    row.interval[0],
                    row.interval[1],
                    f"{row.statistic:.6f}",
                    f"{row.p_value:.9g}",
                    f"{row.mean_distance_interval:.6f}",
                    f"{row.mean_distance_rest:.6f}",
                ]
            )


__all__: Sequence[str] = [
    "pearson",
    "CorrelationMatrix",
    "correlation_matrix",
    "transition_samples",
    "pooled_samples",
    "ks_two_sample",
    "TransitionTest",
    "transition_report",
    "write_matrix_csv",
    "write_transitions_csv",
    "SERIES_TRUNCATION",
]
