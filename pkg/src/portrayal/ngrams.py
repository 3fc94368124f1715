"""N-gram shard parsing, token cleaning, name matching, and the corpus scan.

Shards are tab-separated text (optionally gzip-compressed), one record per
line: the 5-gram field, then ``year,match_count,volume_count`` triples::

    Frederick Douglass spoke at length\t1855,3,1\t1861,2,1

The scan turns matched records into weighted context events aggregated per
(decade, group).  Shards may be processed by independent workers; partial
tables merge by commutative addition, so output is identical under any
permutation or partition of the input lines.
"""

from __future__ import annotations

import gzip
import logging
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .context import ContextTable, merge
from .errors import MalformedLine
from .roster import Person, Roster, RosterIndex

logger = logging.getLogger(__name__)

NGRAM_ORDER = 5

# years a person must have been alive before they can plausibly appear in print
MIN_AGE_IN_PRINT = 10


class YearEntry(NamedTuple):
    year: int
    match_count: int
    volume_count: int


@dataclass(frozen=True)
class NgramRecord:
    """One parsed 5-gram line with its per-year counts."""

    tokens: tuple[str, ...]
    year_entries: tuple[YearEntry, ...]


def parse_ngram_line(line: str) -> NgramRecord:
    """Parse one shard line; raises ``MalformedLine`` on any contract breach.

    The n-gram field must split on single spaces into exactly five non-empty
    tokens; every triple must be numeric with counts >= 1 and years strictly
    increasing.
    """
    parts = line.rstrip("\n").split("\t")
    if len(parts) < 2:
        raise MalformedLine("expected n-gram field plus at least one year triple")
    tokens = tuple(parts[0].split(" "))
    if len(tokens) != NGRAM_ORDER or any(not t for t in tokens):
        raise MalformedLine(f"expected {NGRAM_ORDER} tokens, got {len(tokens)}")
    entries = []
    previous_year = None
    for raw in parts[1:]:
        pieces = raw.split(",")
        if len(pieces) != 3:
            raise MalformedLine(f"bad year triple {raw!r}")
        try:
            year, match_count, volume_count = (int(p) for p in pieces)
        except ValueError as exc:
            raise MalformedLine(f"non-numeric year triple {raw!r}") from exc
        if year < 0 or match_count < 1 or volume_count < 1:
            raise MalformedLine(f"out-of-range year triple {raw!r}")
        if previous_year is not None and year <= previous_year:
            raise MalformedLine("years not strictly increasing")
        previous_year = year
        entries.append(YearEntry(year, match_count, volume_count))
    return NgramRecord(tokens=tokens, year_entries=tuple(entries))


# --- token cleaning ---------------------------------------------------------

# standalone tag like "_NOUN_"; annotated token like "run_VERB" keeps "run"
_PLACEHOLDER_RE = re.compile(r"^_[A-Z.]+_$")
_SUFFIX_RE = re.compile(r"^(.+)_([A-Z.]+)$")
_NUMBER_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)$")


@dataclass(frozen=True)
class CleaningRules:
    stopword_set: frozenset[str]
    pos_placeholder: re.Pattern = _PLACEHOLDER_RE
    pos_suffix: re.Pattern = _SUFFIX_RE
    number: re.Pattern = _NUMBER_RE
    version: str = "english-v1"

    def __post_init__(self) -> None:
        if not self.stopword_set:
            raise ValueError("stopword set must be non-empty")


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Read the bundled (or a custom) one-word-per-line stopword list."""
    if path is None:
        text = (
            resources.files("portrayal.data")
            .joinpath("stopwords_en.txt")
            .read_text(encoding="utf-8")
        )
    else:
        text = Path(path).read_text(encoding="utf-8")
    words = set()
    for line in text.splitlines():
        word = line.strip()
        if word and not word.startswith("#"):
            words.add(word.lower())
    return frozenset(words)


def default_cleaning_rules() -> CleaningRules:
    return CleaningRules(stopword_set=load_stopwords())


def clean_token(token: str, rules: CleaningRules) -> str | None:
    """Clean one raw token; ``None`` means the token is dropped.

    Standalone tags drop, annotated tokens keep the word part, then numbers
    and stopwords (case-insensitive) drop, and survivors are lowercased.
    """
    if rules.pos_placeholder.match(token):
        return None
    suffix = rules.pos_suffix.match(token)
    if suffix:
        token = suffix.group(1)
    if rules.number.match(token.replace(",", "")):
        return None
    lowered = token.lower()
    if lowered in rules.stopword_set:
        return None
    return lowered


def bucket_by_decade(year: int) -> int:
    """1855 -> 1850; defined for non-negative years."""
    if year < 0:
        raise ValueError(f"year must be >= 0, got {year}")
    return (year // 10) * 10


def birth_gate(person: Person, year: int) -> bool:
    """Accept a year only once the person was at least 10 years old.

    Unknown birth years pass; the scan counts those acceptances separately.
    """
    if person.birth_year is None:
        return True
    return year >= person.birth_year + MIN_AGE_IN_PRINT


# --- matching and context extraction ----------------------------------------

Match = tuple[str, tuple[int, int]]


def match_person(record: NgramRecord, index: RosterIndex) -> list[Match]:
    """All (person_id, token span) occurrences of roster names in the record.

    Matching is exact and case-sensitive on raw tokens, before cleaning.
    Overlapping matches of different persons are all reported.
    """
    tokens = record.tokens
    matches: list[Match] = []
    for start in range(NGRAM_ORDER):
        for sequence, person_id in index.candidates(tokens[start]):
            end = start + len(sequence)
            if end <= NGRAM_ORDER and tokens[start:end] == sequence:
                matches.append((person_id, (start, end)))
    matches.sort()
    return matches


@dataclass(frozen=True)
class ContextEvent:
    decade: int
    group: str
    word: str
    weight: int
    person_id: str


def extract_context(
    record: NgramRecord,
    match: Match,
    rules: CleaningRules,
    group: str,
    year_entries: Sequence[YearEntry] | None = None,
) -> list[ContextEvent]:
    """Context events for one match: every surviving non-name token, once per
    year entry, weighted by that entry's match count.

    ``year_entries`` restricts the record's entries (the scan passes the
    birth-gated subset); by default all entries are used.
    """
    person_id, (start, end) = match
    words = []
    for position, token in enumerate(record.tokens):
        if start <= position < end:
            continue
        cleaned = clean_token(token, rules)
        if cleaned is not None:
            words.append(cleaned)
    if not words:
        return []
    entries = record.year_entries if year_entries is None else year_entries
    events = []
    for entry in entries:
        decade = bucket_by_decade(entry.year)
        for word in words:
            events.append(
                ContextEvent(
                    decade=decade,
                    group=group,
                    word=word,
                    weight=entry.match_count,
                    person_id=person_id,
                )
            )
    return events


# --- corpus scan --------------------------------------------------------------

@dataclass(frozen=True)
class DecadeRange:
    """Half-open range of decade start years, stepping by 10."""

    start: int = 1850
    stop: int = 2000

    def __post_init__(self) -> None:
        if self.start % 10 or self.stop % 10 or self.stop <= self.start:
            raise ValueError(f"bad decade range [{self.start}, {self.stop})")

    def __contains__(self, decade: int) -> bool:
        return self.start <= decade < self.stop and decade % 10 == 0

    def decades(self) -> list[int]:
        return list(range(self.start, self.stop, 10))


@dataclass
class ScanStats:
    lines_read: int = 0
    malformed_lines: int = 0
    matched_records: int = 0
    unknown_birth_accepts: int = 0
    io_errors: list[tuple[str, str]] = field(default_factory=list)

    def merge_in(self, other: "ScanStats") -> None:
        self.lines_read += other.lines_read
        self.malformed_lines += other.malformed_lines
        self.matched_records += other.matched_records
        self.unknown_birth_accepts += other.unknown_birth_accepts
        self.io_errors.extend(other.io_errors)


TableMap = dict[tuple[int, str], ContextTable]


def _open_shard(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def _scan_lines(
    lines: Iterable[str],
    roster: Roster,
    rules: CleaningRules,
    decades: DecadeRange,
) -> tuple[TableMap, ScanStats]:
    tables: TableMap = {}
    stats = ScanStats()
    for line in lines:
        if not line.strip():
            continue
        stats.lines_read += 1
        try:
            record = parse_ngram_line(line)
        except MalformedLine:
            stats.malformed_lines += 1
            continue
        matches = match_person(record, roster.index)
        if not matches:
            continue
        stats.matched_records += 1
        for match in matches:
            person_id = match[0]
            person = roster.persons[person_id]
            if person.birth_year is None:
                stats.unknown_birth_accepts += 1
            entries = tuple(
                e
                for e in record.year_entries
                if birth_gate(person, e.year) and bucket_by_decade(e.year) in decades
            )
            if not entries:
                continue
            group = person.group
            for entry in entries:
                key = (bucket_by_decade(entry.year), group)
                table = tables.get(key)
                if table is None:
                    table = tables[key] = ContextTable(decade=key[0], group=group)
                table.ngrams_matched += entry.match_count
                table.persons_seen.add(person_id)
            for event in extract_context(record, match, rules, group, entries):
                tables[(event.decade, event.group)].add(event.word, event.weight)
    return tables, stats


def _scan_shard(
    path: str, roster: Roster, rules: CleaningRules, decades: DecadeRange
) -> tuple[TableMap, ScanStats, str | None]:
    try:
        with _open_shard(Path(path)) as fh:
            tables, stats = _scan_lines(fh, roster, rules, decades)
        return tables, stats, None
    except OSError as exc:
        return {}, ScanStats(), f"{path}: {exc}"


def scan_corpus(
    shards: Sequence[str | Path],
    roster: Roster,
    rules: CleaningRules,
    decades: DecadeRange | None = None,
    workers: int = 1,
) -> tuple[TableMap, ScanStats]:
    """Scan all shards and merge per-worker partial tables deterministically.

    Unreadable shards are reported in ``stats.io_errors`` and skipped; the
    CLI turns a non-empty error list into a non-zero exit status.
    """
    decades = decades or DecadeRange()
    paths = [str(p) for p in shards]
    results = []
    if workers > 1 and len(paths) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    _scan_shard,
                    paths,
                    [roster] * len(paths),
                    [rules] * len(paths),
                    [decades] * len(paths),
                )
            )
    else:
        results = [_scan_shard(p, roster, rules, decades) for p in paths]

    tables: TableMap = {}
    stats = ScanStats()
    for partial_tables, partial_stats, error in results:
        stats.merge_in(partial_stats)
        if error is not None:
            logger.error("shard skipped: %s", error)
            stats.io_errors.append((error.split(":", 1)[0], error))
            continue
        for key, table in partial_tables.items():
            if key in tables:
                tables[key] = merge(tables[key], table)
            else:
                tables[key] = table
    return tables, stats


def write_scan_stats_csv(
    tables: TableMap, stats: ScanStats, path: str | Path
) -> None:
    """Per-(decade, group) scan summary mirroring the corpus-size plots."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["decade", "group", "matched_ngrams", "matched_persons", "total_context_weight"]
        )
        for decade, group in sorted(tables):
            table = tables[(decade, group)]
            writer.writerow(
                [decade, group, table.ngrams_matched, len(table.persons_seen), table.total_weight]
            )


__all__: Sequence[str] = [
    "NGRAM_ORDER",
    "MIN_AGE_IN_PRINT",
    "YearEntry",
    "NgramRecord",
    "parse_ngram_line",
    "CleaningRules",
    "load_stopwords",
    "default_cleaning_rules",
    "clean_token",
    "bucket_by_decade",
    "birth_gate",
    "match_person",
    "ContextEvent",
    "extract_context",
    "DecadeRange",
    "ScanStats",
    "scan_corpus",
    "write_scan_stats_csv",
]
