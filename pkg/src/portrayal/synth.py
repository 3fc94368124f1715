"""Seeded synthetic fixtures with planted, known biases.

The generator emits exactly the production file formats (shards, roster
export, group map, per-decade vector files, axes file, lexicon file) plus a
manifest of the planted ground truth, so acceptance tests can check that
the pipeline recovers what was planted:

* a bipolar word axis, with group A's pole draws biased toward one pole and
  group B's toward the other;
* toxic words seeded into one group's context at a boosted rate;
* optionally, a representation break at one decade (the filler-word cluster
  behind both groups switches), which should light up the transition test.
"""

from __future__ import annotations

import csv
import gzip
import json
import math
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Sequence

import numpy as np
from numpy.random import SeedSequence, default_rng

from .context import ContextTable
from .errors import ConfigError, DegenerateDistribution, EmptyTable
from .spaces import EmbeddingSpace

# seed stream tags
_TAG_BASE = 11
_TAG_SPACE = 12
_TAG_CORPUS = 13

_COUNT_VALUES = (1, 2, 3, 5, 8, 13)
_COUNT_PROBS = (0.40, 0.25, 0.15, 0.10, 0.07, 0.03)

PLANTED_AXIS_ID = "planted.a.01"


@dataclass(frozen=True)
class PlantSpec:
    """Parameters of one synthetic bundle."""

    dim: int = 50
    vocab_size: int = 240          # filler words, split into two cluster pools
    pole_size: int = 5             # words per planted pole
    decoy_axes: int = 11
    decoy_pole_size: int = 3
    toxic_words: int = 12
    bias_a_right: float = 0.8      # P(right pole | pole draw) for group A
    bias_b_right: float = 0.2
    pole_rate: float = 0.5         # P(context word is a pole word)
    toxic_rate: float = 0.02       # base P(context word is toxic)
    toxic_boost: float = 4.0       # multiplier for the seeded group (group A)
    decades: tuple[int, ...] = (1850, 1860, 1870)
    break_decade: int | None = None
    ngrams_per_group: int = 10_000
    nonmatching_share: float = 0.05
    persons_per_group: int = 20
    noise: float = 0.08            # approximate per-decade perturbation norm
    seed: int = 7
    group_a: str = "GRP_A"
    group_b: str = "GRP_B"

    def __post_init__(self) -> None:
        for name in ("bias_a_right", "bias_b_right", "pole_rate", "toxic_rate",
                     "nonmatching_share"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must be in [0, 1], got {value}")
        if self.pole_rate + self.toxic_rate * self.toxic_boost > 1.0:
            raise ConfigError("pole_rate + boosted toxic rate exceeds 1")
        if len(set(self.decades)) != len(self.decades) or list(self.decades) != sorted(self.decades):
            raise ConfigError("decades must be sorted and unique")
        if any(d % 10 for d in self.decades):
            raise ConfigError("decades must be multiples of 10")
        if self.break_decade is not None and self.break_decade not in self.decades[1:]:
            raise ConfigError("break_decade must be one of the non-initial decades")
        if self.noise < 0:
            raise ConfigError("noise must be >= 0")


@dataclass
class Vocabulary:
    right_pole: list[str]
    left_pole: list[str]
    toxic: list[str]
    fillers: list[str]
    decoys: list[str]

    @property
    def all_words(self) -> list[str]:
        return self.right_pole + self.left_pole + self.toxic + self.fillers + self.decoys

    def filler_pool(self, spec: PlantSpec, decade: int) -> list[str]:
        half = len(self.fillers) // 2
        if spec.break_decade is not None and decade >= spec.break_decade:
            return self.fillers[half:]
        return self.fillers[:half]


def make_vocabulary(spec: PlantSpec) -> Vocabulary:
    return Vocabulary(
        right_pole=[f"rightpole{i}" for i in range(spec.pole_size)],
        left_pole=[f"leftpole{i}" for i in range(spec.pole_size)],
        toxic=[f"toxword{i}" for i in range(spec.toxic_words)],
        fillers=[f"filler{i}" for i in range(spec.vocab_size)],
        decoys=[f"decoy{i}" for i in range(spec.decoy_axes * 2 * spec.decoy_pole_size)],
    )


def _unit(rng, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _base_vectors(spec: PlantSpec, vocab: Vocabulary) -> dict[str, np.ndarray]:
    """Decade-independent word positions; the per-decade spaces add noise."""
    rng = default_rng(SeedSequence([spec.seed, _TAG_BASE]))
    dim = spec.dim
    axis_dir = _unit(rng, dim)
    toxic_dir = _unit(rng, dim)
    cluster_one = _unit(rng, dim)
    cluster_two = _unit(rng, dim)
    scale = 1.0 / math.sqrt(dim)

    base: dict[str, np.ndarray] = {}
    for word in vocab.right_pole:
        base[word] = axis_dir.copy()
    for word in vocab.left_pole:
        base[word] = -axis_dir
    for word in vocab.toxic:
        base[word] = 0.9 * toxic_dir + 0.45 * rng.standard_normal(dim) * scale
    half = len(vocab.fillers) // 2
    for i, word in enumerate(vocab.fillers):
        cluster = cluster_one if i < half else cluster_two
        base[word] = 0.6 * cluster + 0.8 * rng.standard_normal(dim) * scale
    for word in vocab.decoys:
        base[word] = rng.standard_normal(dim) * scale
    return base


def gen_space(spec: PlantSpec, decade: int | None = None) -> EmbeddingSpace:
    """One decade's space: planted geometry plus seeded per-decade noise."""
    decade = spec.decades[0] if decade is None else decade
    vocab = make_vocabulary(spec)
    base = _base_vectors(spec, vocab)
    rng = default_rng(SeedSequence([spec.seed, _TAG_SPACE, decade]))
    scale = spec.noise / math.sqrt(spec.dim)
    vectors = {}
    for word in vocab.all_words:
        noise = rng.standard_normal(spec.dim) * scale if spec.noise > 0 else 0.0
        vectors[word] = base[word] + noise
    return EmbeddingSpace(decade=decade, dim=spec.dim, vectors=vectors)


def write_space(space: EmbeddingSpace, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(space.vectors):
            values = " ".join(f"{v:.17g}" for v in space.vectors[word])
            fh.write(f"{word} {values}\n")
    return path


# --- roster -----------------------------------------------------------------

GROUP_A_LABEL = "Synthetic Alpha"
GROUP_B_LABEL = "Synthetic Beta"


@dataclass
class SynthPerson:
    first: str
    last: str
    group: str
    birth_year: int = 1800

    @property
    def full_name(self) -> str:
        return f"{self.first} {self.last}"


def make_persons(spec: PlantSpec) -> list[SynthPerson]:
    persons = []
    for i in range(spec.persons_per_group):
        persons.append(SynthPerson(f"Alpha{i}", f"Stone{i}", spec.group_a))
    for i in range(spec.persons_per_group):
        persons.append(SynthPerson(f"Beta{i}", f"Rivers{i}", spec.group_b))
    return persons


def write_roster(spec: PlantSpec, persons: Sequence[SynthPerson], path: str | Path) -> Path:
    """Roster export with the quirks the parser must handle: a duplicate row
    with a second occupation, an unmapped person, and a single-token name."""
    path = Path(path)
    label_of = {spec.group_a: GROUP_A_LABEL, spec.group_b: GROUP_B_LABEL}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "dob", "ethnicLabel", "occupation"])
        for person in persons:
            writer.writerow(
                [person.full_name, f"{person.birth_year}-01-01",
                 label_of[person.group], "writer"]
            )
        first = persons[0]
        writer.writerow(
            [first.full_name, f"{first.birth_year}-01-01",
             label_of[first.group], "orator"]
        )
        writer.writerow(["Quill Unmapped", "1800-01-01", "Unmapped Group", "hermit"])
        writer.writerow(["Cher", "1800-01-01", GROUP_A_LABEL, "singer"])
    return path


def write_group_map(spec: PlantSpec, path: str | Path) -> Path:
    path = Path(path)
    payload = {
        "mapping": {GROUP_A_LABEL: spec.group_a, GROUP_B_LABEL: spec.group_b},
        "default": "OTHER",
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


# --- axes and lexicon ----------------------------------------------------------

def write_axes(spec: PlantSpec, vocab: Vocabulary, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"{PLANTED_AXIS_ID}\t{','.join(vocab.left_pole)}\t{','.join(vocab.right_pole)}\n"
        )
        width = 2 * spec.decoy_pole_size
        for i in range(spec.decoy_axes):
            chunk = vocab.decoys[i * width:(i + 1) * width]
            left = chunk[: spec.decoy_pole_size]
            right = chunk[spec.decoy_pole_size:]
            fh.write(f"decoy.a.{i:02d}\t{','.join(left)}\t{','.join(right)}\n")
    return path


def write_lexicon(vocab: Vocabulary, path: str | Path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(["lemma", "category", "level"])
        for word in vocab.toxic:
            writer.writerow([word, "synthetic", "conservative"])
        for i in range(3):
            writer.writerow([f"mildword{i}", "synthetic", "inclusive"])
    return path


# --- corpus ---------------------------------------------------------------------

def _context_word(rng, spec: PlantSpec, vocab: Vocabulary, group: str, pool: list[str]) -> str:
    toxic_rate = spec.toxic_rate * (spec.toxic_boost if group == spec.group_a else 1.0)
    bias = spec.bias_a_right if group == spec.group_a else spec.bias_b_right
    r = rng.random()
    if r < spec.pole_rate:
        pole = vocab.right_pole if rng.random() < bias else vocab.left_pole
        return pole[rng.integers(len(pole))]
    if r < spec.pole_rate + toxic_rate:
        return vocab.toxic[rng.integers(len(vocab.toxic))]
    return pool[rng.integers(len(pool))]


def _year_triples(rng, decade: int) -> str:
    year = decade + int(rng.integers(9))
    parts = []
    entries = 2 if rng.random() < 0.1 else 1
    for offset in range(entries):
        match = int(rng.choice(_COUNT_VALUES, p=_COUNT_PROBS))
        volume = int(rng.integers(1, match + 1))
        parts.append(f"{year + offset},{match},{volume}")
    return "\t".join(parts)


def gen_corpus_lines(spec: PlantSpec, persons: Sequence[SynthPerson]) -> list[str]:
    """All shard lines, in a deterministic order."""
    vocab = make_vocabulary(spec)
    by_group: dict[str, list[SynthPerson]] = {spec.group_a: [], spec.group_b: []}
    for person in persons:
        by_group[person.group].append(person)
    lines: list[str] = []
    for decade in spec.decades:
        pool = vocab.filler_pool(spec, decade)
        for gidx, group in enumerate((spec.group_a, spec.group_b)):
            rng = default_rng(SeedSequence([spec.seed, _TAG_CORPUS, decade, gidx]))
            members = by_group[group]
            for _ in range(spec.ngrams_per_group):
                person = members[rng.integers(len(members))]
                words = [
                    _context_word(rng, spec, vocab, group, pool) for _ in range(3)
                ]
                lines.append(
                    f"{person.first} {person.last} {' '.join(words)}\t{_year_triples(rng, decade)}"
                )
            for _ in range(int(spec.ngrams_per_group * spec.nonmatching_share)):
                words = [pool[rng.integers(len(pool))] for _ in range(5)]
                lines.append(f"{' '.join(words)}\t{_year_triples(rng, decade)}")
    return lines


def gen_corpus(
    spec: PlantSpec,
    persons: Sequence[SynthPerson],
    out_dir: str | Path,
    shards: int = 2,
) -> list[Path]:
    """Write shard files; the last one is gzip-compressed to exercise that path."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = gen_corpus_lines(spec, persons)
    paths = []
    for i in range(shards):
        chunk = lines[i::shards]
        if i == shards - 1 and shards > 1:
            path = out_dir / f"shard_{i:03d}.tsv.gz"
            # mtime=0 keeps the gzip header byte-identical across runs
            with open(path, "wb") as raw:
                with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0) as gz:
                    gz.write(("\n".join(chunk) + "\n").encode("utf-8"))
        else:
            path = out_dir / f"shard_{i:03d}.tsv"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("\n".join(chunk) + "\n")
        paths.append(path)
    return paths


# --- sampling oracle -------------------------------------------------------------

def oracle_distribution(
    self_table: ContextTable,
    other_table: ContextTable,
    space: EmbeddingSpace,
    kind: str,
    floor: float = 1e-5,
) -> tuple[list[str], list[float]]:
    """Brute-force enumeration of the contrastive sampling distribution.

    Pure-Python, independent of the production implementation; used to
    validate it exactly.
    """
    if kind not in ("positive", "negative"):
        raise ValueError(f"kind must be 'positive' or 'negative', got {kind!r}")
    self_total = sum(self_table.counts.values())
    other_total = sum(other_table.counts.values())
    if self_total == 0 or other_total == 0:
        raise EmptyTable("both context tables must have non-zero total weight")
    vocab_table = self_table if kind == "positive" else other_table
    words = sorted(w for w in vocab_table.counts if space.usable(w))
    if not words:
        raise DegenerateDistribution("no vocabulary word has a vector")
    weights = []
    for word in words:
        f_self = self_table.counts.get(word, 0) / self_total
        f_other = other_table.counts.get(word, 0) / other_total
        if kind == "positive":
            denominator = f_other if f_other > floor else floor
            weights.append(f_self / denominator)
        else:
            denominator = f_self if f_self > floor else floor
            weights.append(f_other / denominator)
    total = sum(weights)
    if total <= 0.0:
        raise DegenerateDistribution("all sampling weights are zero")
    return words, [w / total for w in weights]


# --- bundle ------------------------------------------------------------------------

@dataclass
class BundleManifest:
    spec: dict
    planted: dict
    files: dict[str, object]

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(
                {"spec": self.spec, "planted": self.planted, "files": self.files},
                fh, indent=2, sort_keys=True,
            )
            fh.write("\n")
        return path


def _bundle_config(spec: PlantSpec, files: dict) -> dict:
    return {
        "seed": spec.seed,
        "decades": {"start": spec.decades[0], "stop": spec.decades[-1] + 10},
        "groups": [spec.group_a, spec.group_b],
        "paths": {
            "shards": files["shards"],
            "roster": files["roster"],
            "group_map": files["group_map"],
            "embeddings": files["embeddings"],
            "axes": files["axes"],
            "lexicon": files["lexicon"],
            "output": "out",
        },
        "trainer": {
            "k": 1200,
            "n": 4,
            "margin": 0.5,
            "floor": 1e-5,
            "learning_rate": 0.1,
            "epochs": 3,
            "seed": spec.seed,
        },
        "sweep": {"k": [600, 1200], "n": [1, 4]},
        "workers": 1,
    }


def generate_bundle(spec: PlantSpec, out_dir: str | Path) -> BundleManifest:
    """Write a complete fixture bundle loadable by every subcommand."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab = make_vocabulary(spec)
    persons = make_persons(spec)

    shard_paths = gen_corpus(spec, persons, out_dir / "shards")
    roster_path = write_roster(spec, persons, out_dir / "roster.csv")
    map_path = write_group_map(spec, out_dir / "group_map.json")
    axes_path = write_axes(spec, vocab, out_dir / "axes.tsv")
    lexicon_path = write_lexicon(vocab, out_dir / "lexicon.tsv")
    spaces_dir = out_dir / "spaces"
    spaces_dir.mkdir(exist_ok=True)
    embeddings = {}
    for decade in spec.decades:
        path = spaces_dir / f"space_{decade}.txt"
        write_space(gen_space(spec, decade), path)
        embeddings[str(decade)] = str(path.relative_to(out_dir))

    files = {
        "shards": [str(p.relative_to(out_dir)) for p in shard_paths],
        "roster": str(roster_path.relative_to(out_dir)),
        "group_map": str(map_path.relative_to(out_dir)),
        "axes": str(axes_path.relative_to(out_dir)),
        "lexicon": str(lexicon_path.relative_to(out_dir)),
        "embeddings": embeddings,
    }
    planted = {
        "axis_id": PLANTED_AXIS_ID,
        "expected_nearer": {
            spec.group_a: "right" if spec.bias_a_right > 0.5 else "left",
            spec.group_b: "right" if spec.bias_b_right > 0.5 else "left",
        },
        "toxic_group": spec.group_a,
        "toxic_boost": spec.toxic_boost,
        "break_transition": (
            None
            if spec.break_decade is None
            else [spec.decades[spec.decades.index(spec.break_decade) - 1], spec.break_decade]
        ),
    }
    manifest = BundleManifest(spec=asdict(spec), planted=planted, files=files)
    manifest.save(out_dir / "manifest.json")
    with open(out_dir / "config.json", "w", encoding="utf-8") as fh:
        json.dump(_bundle_config(spec, files), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


__all__: Sequence[str] = [
    "PLANTED_AXIS_ID",
    "PlantSpec",
    "Vocabulary",
    "make_vocabulary",
    "make_persons",
    "SynthPerson",
    "gen_space",
    "write_space",
    "write_roster",
    "write_group_map",
    "write_axes",
    "write_lexicon",
    "gen_corpus_lines",
    "gen_corpus",
    "oracle_distribution",
    "BundleManifest",
    "generate_bundle",
]
