"""Contrastive group-vector training from paired context tables.

For one decade, each group gets a vector learned against the frozen word
vectors of that decade's space.  Positive words are sampled from the group's
own context with weight ``f_self / max(f_other, floor)``; negative words
from the other group's context with the mirrored weight.  The vector is
then fit with SGD on a pairwise ranking loss: positives pull cosine toward
1, negatives are pushed below a margin.

Both trainings of a decade draw their randomness from one seed bundle keyed
on (run seed, decade), which makes a swap of the two group labels swap the
outputs exactly.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.random import Generator, SeedSequence, default_rng
from sklearn.base import BaseEstimator

from .context import ContextTable
from .errors import (
    ConfigError,
    DataError,
    DegenerateDistribution,
    EmptyTable,
    KeyMismatch,
    NonFiniteLoss,
    ZeroNorm,
)
from .spaces import EmbeddingSpace, unit_rows

logger = logging.getLogger(__name__)

SeedLike = int | SeedSequence | Generator | None


def positive_weight(f_self: float, f_other: float, floor: float = 1e-5) -> float:
    """Sampling weight of a word for its own group's positives."""
    return f_self / max(f_other, floor)


def negative_weight(f_self: float, f_other: float, floor: float = 1e-5) -> float:
    """Sampling weight of an other-group word for negatives; mirror of
    :func:`positive_weight`."""
    return f_other / max(f_self, floor)


@dataclass(frozen=True)
class SamplingDistribution:
    """Categorical distribution over context words with vectors in the space."""

    words: list[str]
    weights: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-12:
            raise DegenerateDistribution("probabilities do not sum to 1")


def build_distribution(
    self_table: ContextTable,
    other_table: ContextTable,
    space: EmbeddingSpace,
    kind: str,
    floor: float = 1e-5,
) -> SamplingDistribution:
    """Normalized sampling distribution for one group and one role.

    ``kind="positive"`` draws vocabulary from ``self_table`` and weights by
    ``f_self / max(f_other, floor)``; ``kind="negative"`` draws vocabulary
    from ``other_table`` with the mirrored weight.  Words without a usable
    vector in the space are excluded before normalization (their dropped
    weight share is logged).
    """
    if kind not in ("positive", "negative"):
        raise ValueError(f"kind must be 'positive' or 'negative', got {kind!r}")
    vocab_table = self_table if kind == "positive" else other_table
    self_total = self_table.total_weight
    other_total = other_table.total_weight
    if self_total == 0 or other_total == 0:
        raise EmptyTable("both context tables must have non-zero total weight")

    words = sorted(w for w in vocab_table.counts if space.usable(w))
    if not words:
        raise DegenerateDistribution(
            f"no {kind} vocabulary word has a vector in decade {space.decade}"
        )
    dropped = len(vocab_table.counts) - len(words)
    if dropped:
        kept_weight = sum(vocab_table.counts[w] for w in words)
        share = 1.0 - kept_weight / vocab_table.total_weight
        logger.info(
            "decade %d %s sampling: %d words (%.1f%% of weight) missing from space",
            space.decade, kind, dropped, 100.0 * share,
        )

    f_self = np.array([self_table.counts.get(w, 0) for w in words], dtype=np.float64)
    f_self /= self_total
    f_other = np.array([other_table.counts.get(w, 0) for w in words], dtype=np.float64)
    f_other /= other_total
    if kind == "positive":
        weights = f_self / np.maximum(f_other, floor)
    else:
        weights = f_other / np.maximum(f_self, floor)
    total = float(weights.sum())
    if total <= 0.0:
        raise DegenerateDistribution(f"all {kind} sampling weights are zero")
    return SamplingDistribution(
        words=words, weights=weights, probabilities=weights / total
    )


def draw_samples(dist: SamplingDistribution, count: int, seed: SeedLike) -> list[str]:
    """``count`` i.i.d. draws with replacement; identical seeds give
    identical output."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = default_rng(seed)
    indices = rng.choice(len(dist.words), size=count, p=dist.probabilities)
    return [dist.words[i] for i in indices]


@dataclass
class SampleSet:
    """Positive and negative word draws for one (decade, group) training."""

    decade: int
    group: str
    positives: list[str]
    negatives: list[str]


def build_sample_set(
    positive_dist: SamplingDistribution,
    negative_dist: SamplingDistribution | None,
    decade: int,
    group: str,
    k: int,
    n: int,
    positive_seed: SeedLike,
    negative_seed: SeedLike,
) -> SampleSet:
    positives = draw_samples(positive_dist, k, positive_seed)
    negatives: list[str] = []
    if n > 0:
        if negative_dist is None:
            raise ConfigError("negative ratio > 0 requires a negative distribution")
        negatives = draw_samples(negative_dist, n * k, negative_seed)
    return SampleSet(decade=decade, group=group, positives=positives, negatives=negatives)


# --- ranking loss -------------------------------------------------------------

def ranking_loss(x: np.ndarray, w: np.ndarray, y: int, margin: float = 0.5) -> float:
    """Pairwise ranking loss for one sample.

    ``y=+1``: 1 - cos(x, w);  ``y=-1``: max(0, cos(x, w) - margin).
    """
    if y not in (1, -1):
        raise ValueError(f"label must be +1 or -1, got {y}")
    from .spaces import cosine

    c = cosine(x, w)
    if y == 1:
        return 1.0 - c
    return max(0.0, c - margin)


def loss_gradient(x: np.ndarray, w: np.ndarray, y: int, margin: float = 0.5) -> np.ndarray:
    """Gradient of :func:`ranking_loss` with respect to ``x``.

    On the flat region of the negative branch (cos <= margin, including the
    hinge point itself) the subgradient 0 is returned.
    """
    if y not in (1, -1):
        raise ValueError(f"label must be +1 or -1, got {y}")
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    nx = float(np.linalg.norm(x))
    nw = float(np.linalg.norm(w))
    if nx == 0.0 or nw == 0.0:
        raise ZeroNorm("gradient undefined for zero vectors")
    c = float(np.dot(x, w) / (nx * nw))
    grad_cos = w / (nx * nw) - (c / (nx * nx)) * x
    if y == 1:
        return -grad_cos
    if c > margin:
        return grad_cos
    return np.zeros_like(x)


# --- trainer --------------------------------------------------------------------

@dataclass(frozen=True)
class TrainerConfig:
    """Hyperparameters of one training run."""

    k: int = 500_000
    n: int = 4
    margin: float = 0.5
    floor: float = 1e-5
    learning_rate: float = 0.1
    epochs: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.n < 0:
            raise ConfigError(f"n must be >= 0, got {self.n}")
        if not 0.0 < self.margin < 1.0:
            raise ConfigError(f"margin must be in (0, 1), got {self.margin}")
        if self.floor <= 0.0:
            raise ConfigError(f"floor must be > 0, got {self.floor}")
        if self.learning_rate <= 0.0:
            raise ConfigError(f"learning rate must be > 0, got {self.learning_rate}")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainerConfig":
        known = {f: payload[f] for f in cls.__dataclass_fields__ if f in payload}
        unknown = set(payload) - set(known)
        if unknown:
            raise ConfigError(f"unknown trainer fields: {sorted(unknown)}")
        return cls(**known)


class GroupVectorTrainer(BaseEstimator):
    """Scikit-learn style estimator wrapping the SGD training loop.

    Parameters mirror :class:`TrainerConfig`; after ``fit`` the learned
    vector is in ``vector_`` and the final mean loss in ``final_loss_``.
    The estimator composes with ``sklearn.base.clone`` and ``get_params``
    for sweeps.
    """

    def __init__(
        self,
        k: int = 500_000,
        n: int = 4,
        margin: float = 0.5,
        floor: float = 1e-5,
        learning_rate: float = 0.1,
        epochs: int = 5,
        seed: int = 0,
    ):
        self.k = k
        self.n = n
        self.margin = margin
        self.floor = floor
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.seed = seed

    @classmethod
    def from_config(cls, config: TrainerConfig) -> "GroupVectorTrainer":
        return cls(**config.as_dict())

    @property
    def config(self) -> TrainerConfig:
        return TrainerConfig(**self.get_params())

    def fit(
        self,
        samples: SampleSet,
        space: EmbeddingSpace,
        init_seed: SeedLike = None,
        shuffle_seed: SeedLike = None,
    ) -> "GroupVectorTrainer":
        """Plain SGD over the shuffled samples for ``epochs`` passes.

        ``init_seed`` / ``shuffle_seed`` override the streams derived from
        ``self.seed`` (the decade pipeline passes shared per-decade streams).
        """
        config = self.config  # validates parameters
        words = list(samples.positives) + list(samples.negatives)
        if not words:
            raise DataError("sample set is empty")
        missing = sorted({w for w in words if w not in space.vectors})
        if missing:
            raise DataError(f"samples without vectors in decade {space.decade}: {missing[:5]}")

        vocab = sorted(set(words))
        matrix = np.stack([space.vectors[w] for w in vocab])
        norms = np.linalg.norm(matrix, axis=1)
        if np.any(norms == 0.0):
            raise ZeroNorm("sampled word with zero vector")
        unit = unit_rows(matrix)
        index_of = {w: i for i, w in enumerate(vocab)}
        idx = np.fromiter((index_of[w] for w in words), dtype=np.int64, count=len(words))
        labels = np.ones(len(words), dtype=np.int8)
        labels[len(samples.positives):] = -1

        if init_seed is None or shuffle_seed is None:
            derived = SeedSequence(config.seed).spawn(2)
            init_seed = derived[0] if init_seed is None else init_seed
            shuffle_seed = derived[1] if shuffle_seed is None else shuffle_seed
        x = default_rng(init_seed).standard_normal(space.dim) * 0.01
        shuffle_rng = default_rng(shuffle_seed)

        lr = config.learning_rate
        margin = config.margin
        steps = 0
        # overflow inside the loop means divergence; the per-epoch finiteness
        # check turns it into NonFiniteLoss instead of a warning storm
        with np.errstate(over="ignore", invalid="ignore"):
            for epoch in range(config.epochs):
                order = shuffle_rng.permutation(len(words))
                for j in order:
                    w_hat = unit[idx[j]]
                    nx2 = float(x @ x)
                    nx = math.sqrt(nx2)
                    c = float(x @ w_hat) / nx
                    if labels[j] == 1:
                        x *= 1.0 - lr * c / nx2
                        x += (lr / nx) * w_hat
                    elif c > margin:
                        x *= 1.0 + lr * c / nx2
                        x -= (lr / nx) * w_hat
                    steps += 1
                if not np.isfinite(x).all():
                    raise NonFiniteLoss(
                        f"non-finite group vector after epoch {epoch + 1} "
                        f"(lr={lr}, decade={samples.decade}, group={samples.group})"
                    )

        cos_all = (unit[idx] @ x) / float(np.linalg.norm(x))
        losses = np.where(labels == 1, 1.0 - cos_all, np.maximum(0.0, cos_all - margin))
        final_loss = float(losses.mean())
        if not math.isfinite(final_loss):
            raise NonFiniteLoss(f"non-finite final loss (decade={samples.decade})")

        self.vector_ = x
        self.final_loss_ = final_loss
        self.n_steps_ = steps
        return self

    def transform(self, words: Sequence[str], space: EmbeddingSpace) -> np.ndarray:
        """Cosine of each word's vector to the learned group vector."""
        from .spaces import cosine

        if not hasattr(self, "vector_"):
            raise DataError("trainer is not fitted")
        return np.array([cosine(space.vectors[w], self.vector_) for w in words])


@dataclass
class GroupVector:
    """The learned representation of one group in one decade."""

    decade: int
    group: str
    vector: np.ndarray
    config: TrainerConfig
    final_loss: float


def train_group_vector(
    samples: SampleSet,
    space: EmbeddingSpace,
    config: TrainerConfig,
    init_seed: SeedLike = None,
    shuffle_seed: SeedLike = None,
) -> GroupVector:
    trainer = GroupVectorTrainer.from_config(config)
    trainer.fit(samples, space, init_seed=init_seed, shuffle_seed=shuffle_seed)
    return GroupVector(
        decade=samples.decade,
        group=samples.group,
        vector=trainer.vector_,
        config=config,
        final_loss=trainer.final_loss_,
    )


def decade_seed_bundle(seed: int, decade: int) -> list[SeedSequence]:
    """Four child seeds (positives, negatives, init, shuffle) for one decade.

    Both groups of the decade share the bundle, so relabeling the groups
    swaps the trained vectors exactly.
    """
    return SeedSequence([seed, decade]).spawn(4)


def train_decade(
    table_a: ContextTable,
    table_b: ContextTable,
    space: EmbeddingSpace,
    config: TrainerConfig,
) -> tuple[GroupVector, GroupVector]:
    """Train both group vectors of one decade, independently.

    Positives for a group come from its own context distribution, negatives
    from the other group's; the two trainings never share state beyond the
    seed bundle.
    """
    if table_a.decade != table_b.decade:
        raise KeyMismatch(f"decades differ: {table_a.decade} vs {table_b.decade}")
    if table_a.group == table_b.group:
        raise KeyMismatch(f"need two distinct groups, got {table_a.group!r} twice")
    decade = table_a.decade
    pos_seed, neg_seed, init_seed, shuffle_seed = decade_seed_bundle(config.seed, decade)

    vectors = []
    for self_table, other_table in ((table_a, table_b), (table_b, table_a)):
        positive = build_distribution(self_table, other_table, space, "positive", config.floor)
        negative = None
        if config.n > 0:
            negative = build_distribution(self_table, other_table, space, "negative", config.floor)
        samples = build_sample_set(
            positive,
            negative,
            decade,
            self_table.group,
            config.k,
            config.n,
            pos_seed,
            neg_seed,
        )
        vectors.append(
            train_group_vector(samples, space, config, init_seed=init_seed, shuffle_seed=shuffle_seed)
        )
    return vectors[0], vectors[1]


# --- serialization ---------------------------------------------------------------

def save_group_vectors(group_vectors: Sequence[GroupVector], path: str | Path) -> Path:
    """Write ``decade group v1 ... vd`` lines plus a JSON metadata sidecar."""
    path = Path(path)
    ordered = sorted(group_vectors, key=lambda g: (g.decade, g.group))
    with open(path, "w", encoding="utf-8") as fh:
        for gv in ordered:
            values = " ".join(f"{v:.17g}" for v in gv.vector)
            fh.write(f"{gv.decade} {gv.group} {values}\n")
    meta = {
        f"{gv.decade}:{gv.group}": {
            "config": gv.config.as_dict(),
            "final_loss": gv.final_loss,
            "seed": gv.config.seed,
        }
        for gv in ordered
    }
    sidecar = path.with_suffix(path.suffix + ".meta.json")
    with open(sidecar, "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_group_vectors(path: str | Path) -> dict[tuple[int, str], np.ndarray]:
    out: dict[tuple[int, str], np.ndarray] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if len(parts) < 3:
                continue
            decade, group = int(parts[0]), parts[1]
            out[(decade, group)] = np.array([float(v) for v in parts[2:]])
    return out


__all__: Sequence[str] = [
    "positive_weight",
    "negative_weight",
    "SamplingDistribution",
    "build_distribution",
    "draw_samples",
    "SampleSet",
    "build_sample_set",
    "ranking_loss",
    "loss_gradient",
    "TrainerConfig",
    "GroupVectorTrainer",
    "GroupVector",
    "train_group_vector",
    "train_decade",
    "decade_seed_bundle",
    "save_group_vectors",
    "load_group_vectors",
]
