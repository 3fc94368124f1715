"""Declarative run configuration for the pipeline CLI.

One JSON file configures every subcommand; command-line flags override a
small set of fields (seed, output, workers).  Relative paths are resolved
against the config file's directory so generated fixture bundles stay
relocatable.  All randomness flows from the single root ``seed``: the
trainer's seed is forced to it.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .errors import ConfigError
from .ngrams import DecadeRange
from .training import TrainerConfig

_KNOWN_TOP_KEYS = {
    "seed", "decades", "groups", "paths", "trainer", "sweep",
    "toxicity", "axes_report", "transition_range", "workers",
    "roster_endpoint",
}
_KNOWN_PATH_KEYS = {
    "shards", "roster", "group_map", "overrides", "embeddings",
    "axes", "lexicon", "output", "stopwords",
}


@dataclass
class RunConfig:
    seed: int = 0
    decades: DecadeRange = field(default_factory=DecadeRange)
    groups: tuple[str, str] | None = None
    shards: list[Path] = field(default_factory=list)
    roster: Path | None = None
    group_map: Path | None = None
    overrides: Path | None = None
    embeddings: dict[int, Path] = field(default_factory=dict)
    axes: Path | None = None
    lexicon: Path | None = None
    output: Path = Path("out")
    stopwords: Path | None = None
    trainer: TrainerConfig = field(default_factory=TrainerConfig)
    sweep_k: list[int] = field(default_factory=lambda: [500_000, 1_000_000])
    sweep_n: list[int] = field(default_factory=lambda: [1, 4, 10, 20])
    anchor_decade: int | None = None
    toxicity_level: str | None = "conservative"
    toxicity_top_axes: int = 10
    axes_top_k: int = 2
    transition_range: tuple[int, int] | None = None
    workers: int = 1
    roster_endpoint: str | None = None
    roster_query: Path | None = None
    roster_fixture: Path | None = None
    raw: dict = field(default_factory=dict, repr=False)

    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def require(self, **fields_needed: str) -> None:
        """Check that named fields are set and their paths exist."""
        problems = []
        for name, why in fields_needed.items():
            value = getattr(self, name)
            if value in (None, [], {}):
                problems.append(f"paths.{name} is required {why}")
                continue
            candidates: list[Path] = []
            if isinstance(value, Path):
                candidates = [value]
            elif isinstance(value, list):
                candidates = [v for v in value if isinstance(v, Path)]
            elif isinstance(value, dict):
                candidates = list(value.values())
            for path in candidates:
                if not Path(path).exists():
                    problems.append(f"paths.{name}: {path} does not exist")
        if problems:
            raise ConfigError("; ".join(problems))

    def resolved_shards(self) -> list[Path]:
        """Expand shard globs into a sorted, de-duplicated file list."""
        found: list[Path] = []
        for pattern in self.shards:
            pattern = Path(pattern)
            if pattern.exists():
                found.append(pattern)
                continue
            matches = sorted(pattern.parent.glob(pattern.name))
            if not matches:
                raise ConfigError(f"no shards match {pattern}")
            found.extend(matches)
        unique = sorted(set(found))
        if not unique:
            raise ConfigError("no shard files configured")
        return unique


def _resolve(base: Path, value: str) -> Path:
    path = Path(value)
    return path if path.is_absolute() else (base / path)


def load_config(
    path: str | Path, overrides: Mapping[str, Any] | None = None
) -> RunConfig:
    """Parse a config file and apply flag overrides (flags win)."""
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"bad JSON in {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")

    unknown = set(raw) - _KNOWN_TOP_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    overrides = dict(overrides or {})
    base = path.parent

    merged = dict(raw)
    for key in ("seed", "workers"):
        if overrides.get(key) is not None:
            merged[key] = overrides[key]

    decades_raw = merged.get("decades", {})
    decades = DecadeRange(
        start=int(decades_raw.get("start", 1850)),
        stop=int(decades_raw.get("stop", 2000)),
    )

    paths_raw = dict(merged.get("paths", {}))
    unknown_paths = set(paths_raw) - _KNOWN_PATH_KEYS
    if unknown_paths:
        raise ConfigError(f"{path}: unknown paths keys {sorted(unknown_paths)}")
    if overrides.get("output") is not None:
        paths_raw["output"] = str(overrides["output"])

    embeddings = {
        int(decade): _resolve(base, p)
        for decade, p in dict(paths_raw.get("embeddings", {})).items()
    }

    seed = int(merged.get("seed", 0))
    trainer_raw = dict(merged.get("trainer", {}))
    trainer_raw["seed"] = seed
    trainer = TrainerConfig.from_dict(trainer_raw)

    sweep_raw = dict(merged.get("sweep", {}))
    toxicity_raw = dict(merged.get("toxicity", {}))
    axes_raw = dict(merged.get("axes_report", {}))
    groups_raw = merged.get("groups")
    if groups_raw is not None:
        if len(groups_raw) != 2 or groups_raw[0] == groups_raw[1]:
            raise ConfigError("groups must name two distinct labels")
        groups = (str(groups_raw[0]), str(groups_raw[1]))
    else:
        groups = None
    transition_raw = merged.get("transition_range")
    transition = (
        (int(transition_raw[0]), int(transition_raw[1]))
        if transition_raw
        else None
    )

    endpoint_raw = dict(merged.get("roster_endpoint", {}) or {})

    def maybe_path(key: str) -> Path | None:
        value = paths_raw.get(key)
        return _resolve(base, value) if value else None

    raw_with_overrides = merged
    config = RunConfig(
        seed=seed,
        decades=decades,
        groups=groups,
        shards=[_resolve(base, s) for s in paths_raw.get("shards", [])],
        roster=maybe_path("roster"),
        group_map=maybe_path("group_map"),
        overrides=maybe_path("overrides"),
        embeddings=embeddings,
        axes=maybe_path("axes"),
        lexicon=maybe_path("lexicon"),
        output=_resolve(base, paths_raw.get("output", "out")),
        stopwords=maybe_path("stopwords"),
        trainer=trainer,
        sweep_k=[int(k) for k in sweep_raw.get("k", [500_000, 1_000_000])],
        sweep_n=[int(n) for n in sweep_raw.get("n", [1, 4, 10, 20])],
        anchor_decade=(
            int(toxicity_raw["anchor_decade"])
            if toxicity_raw.get("anchor_decade") is not None
            else None
        ),
        toxicity_level=toxicity_raw.get("level", "conservative"),
        toxicity_top_axes=int(toxicity_raw.get("top_axes", 10)),
        axes_top_k=int(axes_raw.get("top_k", 2)),
        transition_range=transition,
        workers=int(merged.get("workers", 1)),
        roster_endpoint=endpoint_raw.get("url"),
        roster_query=(
            _resolve(base, endpoint_raw["query"]) if endpoint_raw.get("query") else None
        ),
        roster_fixture=(
            _resolve(base, endpoint_raw["fixture"]) if endpoint_raw.get("fixture") else None
        ),
        raw=raw_with_overrides,
    )
    return config


def describe(config: RunConfig) -> dict:
    """JSON-friendly echo of the effective configuration."""
    out: dict[str, Any] = {}
    for f in dataclasses.fields(config):
        if f.name == "raw":
            continue
        value = getattr(config, f.name)
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, DecadeRange):
            value = {"start": value.start, "stop": value.stop}
        elif isinstance(value, TrainerConfig):
            value = value.as_dict()
        elif isinstance(value, list):
            value = [str(v) if isinstance(v, Path) else v for v in value]
        elif isinstance(value, dict):
            value = {str(k): str(v) if isinstance(v, Path) else v for k, v in value.items()}
        elif isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out


__all__: Sequence[str] = ["RunConfig", "load_config", "describe"]
