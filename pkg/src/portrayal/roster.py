"""Person roster ingestion, group labeling, and the name-match index.

The roster drives corpus filtering: every person contributes one full-name
token sequence, and only first+last style names (two or more tokens) are
indexed.  Rosters arrive as delimited exports with a ``name, dob,
ethnicLabel, occupation`` header, either from a local file or fetched from a
SPARQL endpoint speaking the standard HTTP results protocol.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import re
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import ConfigError, EndpointUnreachable, MissingColumn, QueryRejected

logger = logging.getLogger(__name__)

OTHER_GROUP = "OTHER"

_YEAR_RE = re.compile(r"(\d{1,4})")


@dataclass
class Person:
    person_id: str
    full_name: str
    group: str = OTHER_GROUP
    birth_year: int | None = None
    occupation: str | None = None
    source_ethnic_label: str = ""

    @property
    def name_tokens(self) -> tuple[str, ...]:
        return tuple(self.full_name.split())


def person_id_for(full_name: str, birth_year: int | None) -> str:
    """Stable identifier derived from (name, birth year); exports often lack ids."""
    digest = hashlib.sha1(f"{full_name}|{birth_year}".encode("utf-8")).hexdigest()
    return digest[:12]


@dataclass
class GroupMap:
    """Total raw-ethnic-label -> group-label function with a default."""

    mapping: dict[str, str]
    default: str = OTHER_GROUP

    def __post_init__(self) -> None:
        targets = {g for g in self.mapping.values() if g != self.default}
        if len(targets) < 2:
            raise ConfigError(
                f"group map must define at least two non-default groups, got {sorted(targets)}"
            )

    def apply(self, raw_label: str | None) -> str:
        if not raw_label:
            return self.default
        return self.mapping.get(raw_label, self.default)

    @property
    def target_groups(self) -> list[str]:
        return sorted({g for g in self.mapping.values() if g != self.default})

    @classmethod
    def from_file(cls, path: str | Path) -> "GroupMap":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if isinstance(payload, dict) and "mapping" in payload:
            return cls(mapping=dict(payload["mapping"]),
                       default=payload.get("default", OTHER_GROUP))
        if isinstance(payload, dict):
            return cls(mapping=dict(payload))
        raise ConfigError(f"{path}: group map must be a JSON object")


@dataclass
class ParsedRoster:
    persons: list[Person]
    rows_skipped: int = 0
    label_conflicts: int = 0


def _birth_year(dob: str | None) -> int | None:
    if not dob:
        return None
    match = _YEAR_RE.search(dob)
    return int(match.group(1)) if match else None


def parse_roster_export(path: str | Path) -> ParsedRoster:
    """Parse a roster export into unique persons.

    One person per unique (name, birth year); duplicate rows merge their
    occupations.  Rows whose name is a single token are counted and skipped.
    Raises ``MissingColumn`` when the header lacks a required column.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        sample = fh.readline()
        delimiter = "\t" if "\t" in sample else ","
        fh.seek(0)
        reader = csv.DictReader(fh, delimiter=delimiter)
        header = reader.fieldnames or []
        for column in ("name", "dob", "ethnicLabel", "occupation"):
            if column not in header:
                raise MissingColumn(f"{path}: missing column {column!r}")
        merged: dict[tuple[str, int | None], dict] = {}
        skipped = 0
        conflicts = 0
        for row in reader:
            name = (row.get("name") or "").strip()
            if len(name.split()) < 2:
                skipped += 1
                continue
            birth = _birth_year((row.get("dob") or "").strip())
            key = (name, birth)
            entry = merged.setdefault(
                key, {"occupations": set(), "ethnic": ""}
            )
            occupation = (row.get("occupation") or "").strip()
            if occupation:
                entry["occupations"].add(occupation)
            ethnic = (row.get("ethnicLabel") or "").strip()
            if ethnic:
                if not entry["ethnic"]:
                    entry["ethnic"] = ethnic
                elif entry["ethnic"] != ethnic:
                    conflicts += 1
    persons = []
    for (name, birth), entry in merged.items():
        occupations = "; ".join(sorted(entry["occupations"])) or None
        persons.append(
            Person(
                person_id=person_id_for(name, birth),
                full_name=name,
                birth_year=birth,
                occupation=occupations,
                source_ethnic_label=entry["ethnic"],
            )
        )
    persons.sort(key=lambda p: (p.full_name, p.birth_year or -1))
    if skipped:
        logger.warning("%s: skipped %d rows with single-token names", path, skipped)
    if conflicts:
        logger.warning("%s: %d persons had conflicting ethnic labels", path, conflicts)
    return ParsedRoster(persons=persons, rows_skipped=skipped, label_conflicts=conflicts)


def apply_group_map(persons: Iterable[Person], group_map: GroupMap) -> list[Person]:
    """Label every person; idempotent because it maps from the source label."""
    labeled = []
    for person in persons:
        labeled.append(
            Person(
                person_id=person.person_id,
                full_name=person.full_name,
                group=group_map.apply(person.source_ethnic_label),
                birth_year=person.birth_year,
                occupation=person.occupation,
                source_ethnic_label=person.source_ethnic_label,
            )
        )
    return labeled


def apply_overrides(persons: list[Person], overrides: Mapping[str, str]) -> list[Person]:
    """Apply a supplementary full-name -> group override table."""
    out = []
    for person in persons:
        group = overrides.get(person.full_name, person.group)
        if group != person.group:
            person = Person(
                person_id=person.person_id,
                full_name=person.full_name,
                group=group,
                birth_year=person.birth_year,
                occupation=person.occupation,
                source_ethnic_label=person.source_ethnic_label,
            )
        out.append(person)
    return out


# --- endpoint client ---------------------------------------------------------

EXPORT_COLUMNS = ("name", "dob", "ethnicLabel", "occupation")


def _binding_value(binding: dict, *keys: str) -> str:
    for key in keys:
        if key in binding:
            return binding[key].get("value", "")
    return ""


def fetch_roster(
    endpoint: str | None,
    query: str | None,
    out_path: str | Path,
    fixture: str | Path | None = None,
    timeout: float = 60.0,
) -> Path:
    """Materialize a roster export file, from the endpoint or a fixture.

    Offline mode (``endpoint is None``) replays the fixture byte-identically.
    Endpoint failures fall back to the fixture when one is provided,
    otherwise raise ``EndpointUnreachable`` / ``QueryRejected``.
    """
    out_path = Path(out_path)

    def use_fixture(reason: str | None = None) -> Path:
        if fixture is None:
            raise ConfigError("offline roster fetch requires a fixture path")
        if reason:
            logger.warning("roster endpoint unavailable (%s); using fixture", reason)
        shutil.copyfile(fixture, out_path)
        return out_path

    if endpoint is None:
        return use_fixture()
    if not query:
        raise ConfigError("endpoint fetch requires a query")

    import requests

    try:
        response = requests.post(
            endpoint,
            data={"query": query},
            headers={"Accept": "application/sparql-results+json"},
            timeout=timeout,
        )
    except requests.RequestException as exc:
        if fixture is not None:
            return use_fixture(str(exc))
        raise EndpointUnreachable(f"{endpoint}: {exc}") from exc

    if response.status_code == 400:
        if fixture is not None:
            return use_fixture(f"query rejected ({response.status_code})")
        raise QueryRejected(f"{endpoint}: status {response.status_code}")
    if response.status_code != 200:
        if fixture is not None:
            return use_fixture(f"status {response.status_code}")
        raise EndpointUnreachable(f"{endpoint}: status {response.status_code}")

    payload = response.json()
    bindings = payload.get("results", {}).get("bindings", [])
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EXPORT_COLUMNS)
        for binding in bindings:
            writer.writerow(
                [
                    _binding_value(binding, "itemLabel", "name"),
                    _binding_value(binding, "dob"),
                    _binding_value(binding, "ethnicLabel"),
                    _binding_value(binding, "occupationLabel", "occupation"),
                ]
            )
    return out_path


# --- match index ---------------------------------------------------------------

@dataclass
class RosterIndex:
    """First-token lookup over full name token sequences."""

    entries: dict[str, list[tuple[tuple[str, ...], str]]] = field(default_factory=dict)
    size: int = 0

    def candidates(self, first_token: str) -> list[tuple[tuple[str, ...], str]]:
        return self.entries.get(first_token, [])

    def __len__(self) -> int:
        return self.size


def build_index(persons: Iterable[Person]) -> RosterIndex:
    """Index the non-OTHER persons for matching; each appears exactly once."""
    index = RosterIndex()
    for person in persons:
        if person.group == OTHER_GROUP:
            continue
        tokens = person.name_tokens
        if len(tokens) < 2:
            continue
        index.entries.setdefault(tokens[0], []).append((tokens, person.person_id))
        index.size += 1
    for bucket in index.entries.values():
        bucket.sort()
    return index


@dataclass
class Roster:
    """Labeled persons plus the index the scanner matches against."""

    persons: dict[str, Person]
    index: RosterIndex

    @classmethod
    def build(cls, persons: Iterable[Person]) -> "Roster":
        by_id = {p.person_id: p for p in persons}
        return cls(persons=by_id, index=build_index(by_id.values()))

    def group_of(self, person_id: str) -> str:
        return self.persons[person_id].group

    def birth_year_of(self, person_id: str) -> int | None:
        return self.persons[person_id].birth_year

    def __len__(self) -> int:
        return len(self.persons)


__all__: Sequence[str] = [
    "OTHER_GROUP",
    "Person",
    "GroupMap",
    "ParsedRoster",
    "parse_roster_export",
    "apply_group_map",
    "apply_overrides",
    "fetch_roster",
    "RosterIndex",
    "build_index",
    "Roster",
    "person_id_for",
]
