"""Merged per-(decade, group) context word tables and their summary stats.

A :class:`ContextTable` is the empirical word distribution of everything
written around one group's people in one decade.  Tables are built by the
corpus scan, merged by pointwise addition, and then treated as immutable by
every downstream consumer.

Serialized form, one file per (decade, group)::

    #decade=1850\tgroup=GRP_A\ttotal_weight=8\tngrams_matched=12\tpersons=p1,p2
    length\t3
    spoke\t5
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError, EmptyTable, KeyMismatch


@dataclass
class ContextTable:
    """Weighted word counts for one (decade, group)."""

    decade: int
    group: str
    counts: Counter = field(default_factory=Counter)
    persons_seen: set[str] = field(default_factory=set)
    ngrams_matched: int = 0

    @property
    def total_weight(self) -> int:
        return sum(self.counts.values())

    def add(self, word: str, weight: int) -> None:
        if weight < 1:
            raise DataError(f"event weight must be >= 1, got {weight}")
        self.counts[word] += weight

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ContextTable):
            return NotImplemented
        return (
            self.decade == other.decade
            and self.group == other.group
            and self.counts == other.counts
            and self.persons_seen == other.persons_seen
            and self.ngrams_matched == other.ngrams_matched
        )


def merge(*tables: ContextTable) -> ContextTable:
    """Pointwise sum of tables for one (decade, group).

    Commutative and associative, so shard workers can be merged in any
    order.  Raises ``KeyMismatch`` when decades or groups differ.
    """
    if not tables:
        raise KeyMismatch("nothing to merge")
    first = tables[0]
    out = ContextTable(decade=first.decade, group=first.group)
    for table in tables:
        if (table.decade, table.group) != (first.decade, first.group):
            raise KeyMismatch(
                f"cannot merge ({table.decade},{table.group}) "
                f"into ({first.decade},{first.group})"
            )
        out.counts.update(table.counts)
        out.persons_seen |= table.persons_seen
        out.ngrams_matched += table.ngrams_matched
    return out


def relative_frequency(table: ContextTable, word: str) -> float:
    """Count share of ``word`` in the table; 0.0 for absent words."""
    total = table.total_weight
    if total == 0:
        raise EmptyTable(f"({table.decade},{table.group}) has zero total weight")
    return table.counts.get(word, 0) / total


@dataclass
class ContextStatsRow:
    decade: int
    group: str
    avg_context_words_per_person: float | None
    avg_context_length_per_ngram: float | None
    matched_ngrams: int


def compute_stats(tables: Iterable[ContextTable]) -> list[ContextStatsRow]:
    """Per-table averages behind the corpus-size sanity plots.

    Zero denominators yield ``None`` entries (written as NA), never a
    division fault.
    """
    rows = []
    for table in sorted(tables, key=lambda t: (t.decade, t.group)):
        weight = table.total_weight
        persons = len(table.persons_seen)
        rows.append(
            ContextStatsRow(
                decade=table.decade,
                group=table.group,
                avg_context_words_per_person=weight / persons if persons else None,
                avg_context_length_per_ngram=(
                    weight / table.ngrams_matched if table.ngrams_matched else None
                ),
                matched_ngrams=table.ngrams_matched,
            )
        )
    return rows


def write_stats_csv(rows: Iterable[ContextStatsRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "decade",
                "group",
                "avg_context_words_per_person",
                "avg_context_length_per_ngram",
                "matched_ngrams",
            ]
        )
        for row in rows:
            writer.writerow(
                [
                    row.decade,
                    row.group,
                    "NA" if row.avg_context_words_per_person is None
                    else f"{row.avg_context_words_per_person:.6f}",
                    "NA" if row.avg_context_length_per_ngram is None
                    else f"{row.avg_context_length_per_ngram:.6f}",
                    row.matched_ngrams,
                ]
            )


def table_filename(decade: int, group: str) -> str:
    return f"context_{decade}_{group}.tsv"


def write_table(table: ContextTable, path: str | Path) -> None:
    """Serialize one table; word lines are sorted so output is reproducible."""
    persons = ",".join(sorted(table.persons_seen))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"#decade={table.decade}\tgroup={table.group}"
            f"\ttotal_weight={table.total_weight}"
            f"\tngrams_matched={table.ngrams_matched}\tpersons={persons}\n"
        )
        for word in sorted(table.counts):
            fh.write(f"{word}\t{table.counts[word]}\n")


def read_table(path: str | Path) -> ContextTable:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header.startswith("#"):
            raise DataError(f"{path}: missing table header")
        fields = dict(
            part.split("=", 1) for part in header[1:].rstrip("\n").split("\t")
        )
        table = ContextTable(
            decade=int(fields["decade"]),
            group=fields["group"],
            ngrams_matched=int(fields["ngrams_matched"]),
            persons_seen=set(p for p in fields["persons"].split(",") if p),
        )
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            try:
                word, count = line.rstrip("\n").split("\t")
                table.counts[word] = int(count)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad count line") from exc
    declared = int(fields.get("total_weight", table.total_weight))
    if declared != table.total_weight:
        raise DataError(
            f"{path}: header claims total_weight={declared}, "
            f"counts sum to {table.total_weight}"
        )
    return table


def write_tables(tables: Iterable[ContextTable], directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for table in sorted(tables, key=lambda t: (t.decade, t.group)):
        path = directory / table_filename(table.decade, table.group)
        write_table(table, path)
        written.append(path)
    return written


def read_tables(directory: str | Path) -> dict[tuple[int, str], ContextTable]:
    directory = Path(directory)
    out: dict[tuple[int, str], ContextTable] = {}
    for path in sorted(directory.glob("context_*.tsv")):
        table = read_table(path)
        out[(table.decade, table.group)] = table
    return out


__all__: Sequence[str] = [
    "ContextTable",
    "ContextStatsRow",
    "merge",
    "relative_frequency",
    "compute_stats",
    "write_stats_csv",
    "write_table",
    "read_table",
    "write_tables",
    "read_tables",
    "table_filename",
]
