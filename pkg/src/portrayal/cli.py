"""Pipeline command line.

Subcommands::

    portrayal scan    --config run.json            # corpus -> context tables
    portrayal train   --config run.json            # tables -> group vectors
    portrayal analyze corr|axes|toxicity --config run.json
    portrayal sweep   --config run.json            # k x n trainer grid
    portrayal synth   --output dir [--seed N ...]  # planted fixture bundle
    portrayal report  --config run.json            # scan + train + analyze x3

Exit codes: 0 success, 2 configuration error, 3 I/O or endpoint error,
4 data error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, describe, load_config
from .context import compute_stats, read_tables, write_stats_csv, write_tables
from .diachronic import (
    correlation_matrix,
    transition_report,
    write_matrix_csv,
    write_transitions_csv,
)
from .errors import (
    ConfigError,
    DataError,
    EndpointUnreachable,
    PortrayalError,
    QueryRejected,
    TooFewDecades,
    TooFewTransitions,
)
from .ngrams import CleaningRules, load_stopwords, scan_corpus, write_scan_stats_csv
from .roster import GroupMap, Roster, apply_group_map, apply_overrides, fetch_roster, parse_roster_export
from .semaxes import build_axis_vectors, compare_axis, load_axes, top_axes, write_axis_report_csv
from .spaces import load_spaces
from .synth import PlantSpec, generate_bundle
from .toxicity import (
    ToxicityRow,
    adjust_lexicon,
    build_adjustment,
    load_lexicon,
    toxicity_rate,
    write_removed_words_csv,
    write_toxicity_csv,
)
from .training import load_group_vectors, save_group_vectors, train_decade

logger = logging.getLogger("portrayal")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_DATA = 4


def _cleaning_rules(config: RunConfig) -> CleaningRules:
    stopwords = load_stopwords(config.stopwords)
    return CleaningRules(stopword_set=stopwords)


def _build_roster(config: RunConfig) -> tuple[Roster, GroupMap]:
    config.require(group_map="to label the roster")
    roster_path = config.roster
    if config.roster_endpoint or (roster_path and not roster_path.exists() and config.roster_fixture):
        config.output.mkdir(parents=True, exist_ok=True)
        fetched = config.output / "roster_fetched.csv"
        query = None
        if config.roster_query:
            query = Path(config.roster_query).read_text(encoding="utf-8")
        roster_path = fetch_roster(
            config.roster_endpoint, query, fetched, fixture=config.roster_fixture
        )
    if roster_path is None:
        raise ConfigError("paths.roster is required")
    parsed = parse_roster_export(roster_path)
    group_map = GroupMap.from_file(config.group_map)
    persons = apply_group_map(parsed.persons, group_map)
    if config.overrides:
        with open(config.overrides, "r", encoding="utf-8") as fh:
            persons = apply_overrides(persons, json.load(fh))
    return Roster.build(persons), group_map


def _group_pair(config: RunConfig, group_map: GroupMap | None = None) -> tuple[str, str]:
    if config.groups:
        return config.groups
    if group_map is None and config.group_map:
        group_map = GroupMap.from_file(config.group_map)
    if group_map is None:
        raise ConfigError("set groups in the config or provide a group map")
    targets = group_map.target_groups
    if len(targets) != 2:
        raise ConfigError(
            f"group map defines {len(targets)} groups {targets}; set groups: [a, b]"
        )
    return targets[0], targets[1]


# --- scan ------------------------------------------------------------------

def run_scan(config: RunConfig) -> int:
    config.require(roster="for name matching", group_map="to label groups")
    shards = config.resolved_shards()
    roster, _ = _build_roster(config)
    rules = _cleaning_rules(config)
    logger.info("scanning %d shards against %d persons", len(shards), len(roster))
    tables, stats = scan_corpus(
        shards, roster, rules, decades=config.decades, workers=config.workers
    )
    out = config.output
    out.mkdir(parents=True, exist_ok=True)
    write_tables(tables.values(), out / "tables")
    write_scan_stats_csv(tables, stats, out / "scan_stats.csv")
    write_stats_csv(compute_stats(tables.values()), out / "context_stats.csv")
    persons_per_group: dict[str, set] = {}
    for (_, group), table in tables.items():
        persons_per_group.setdefault(group, set()).update(table.persons_seen)
    summary = {
        "lines_read": stats.lines_read,
        "malformed_lines": stats.malformed_lines,
        "matched_records": stats.matched_records,
        "unknown_birth_accepts": stats.unknown_birth_accepts,
        "io_errors": stats.io_errors,
        "tables": len(tables),
        "matched_persons_per_group": {
            g: len(p) for g, p in sorted(persons_per_group.items())
        },
    }
    with open(out / "scan_summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if not tables:
        logger.warning("no n-gram matched the roster; outputs are empty")
    logger.info(
        "scan done: %d lines, %d malformed, %d matched records, %d tables",
        stats.lines_read, stats.malformed_lines, stats.matched_records, len(tables),
    )
    if stats.io_errors:
        logger.error("%d shards failed to read", len(stats.io_errors))
        return EXIT_IO
    return EXIT_OK


# --- train -----------------------------------------------------------------

def run_train(config: RunConfig, out_dir: Path | None = None, trainer=None) -> int:
    config.require(embeddings="for the per-decade vectors")
    trainer = trainer or config.trainer
    out = out_dir or config.output
    tables = read_tables(config.output / "tables")
    if not tables:
        raise DataError(f"no context tables under {config.output / 'tables'}; run scan first")
    group_a, group_b = _group_pair(config)
    wanted = [d for d in config.decades.decades() if d in config.embeddings]
    spaces = load_spaces({d: config.embeddings[d] for d in wanted})
    group_vectors = []
    for decade in wanted:
        table_a = tables.get((decade, group_a))
        table_b = tables.get((decade, group_b))
        if (
            table_a is None or table_b is None
            or table_a.total_weight == 0 or table_b.total_weight == 0
        ):
            logger.warning("decade %d: missing or empty context table, skipped", decade)
            continue
        gv_a, gv_b = train_decade(table_a, table_b, spaces[decade], trainer)
        logger.info(
            "decade %d trained: loss %s=%.4f %s=%.4f",
            decade, group_a, gv_a.final_loss, group_b, gv_b.final_loss,
        )
        group_vectors.extend([gv_a, gv_b])
    if not group_vectors:
        raise DataError("no decade had usable tables for both groups")
    out.mkdir(parents=True, exist_ok=True)
    save_group_vectors(group_vectors, out / "group_vectors.txt")
    return EXIT_OK


# --- analyze ----------------------------------------------------------------

def _load_vectors(config: RunConfig):
    path = config.output / "group_vectors.txt"
    if not path.exists():
        raise DataError(f"{path} not found; run train first")
    return load_group_vectors(path)


def run_analyze_corr(config: RunConfig, plots: bool = False) -> int:
    vectors = _load_vectors(config)
    groups = sorted({g for _, g in vectors})
    out = config.output
    for group in groups:
        by_decade = {
            d: (vectors.get((d, group)))
            for d in config.decades.decades()
            if d in config.embeddings or (d, group) in vectors
        }
        try:
            matrix = correlation_matrix(by_decade, group)
        except TooFewDecades as exc:
            logger.warning("group %s: %s", group, exc)
            continue
        write_matrix_csv(matrix, out / f"heatmap_{group}.csv")
        try:
            rows = transition_report(matrix)
        except TooFewTransitions as exc:
            logger.warning("group %s: transition test skipped: %s", group, exc)
            rows = None
        if rows is not None:
            if config.transition_range:
                lo, hi = config.transition_range
                rows = [r for r in rows if lo <= r.interval[0] <= hi]
            write_transitions_csv(rows, out / f"transitions_{group}.csv")
        if plots:
            _plot_heatmap(matrix, out / "plots" / f"heatmap_{group}.svg")
    return EXIT_OK


def run_analyze_axes(config: RunConfig) -> int:
    config.require(axes="for the axis report", embeddings="for pole vectors")
    vectors = _load_vectors(config)
    group_a, group_b = _group_pair(config)
    axes = load_axes(config.axes)
    decades = sorted(
        d
        for d in config.decades.decades()
        if d in config.embeddings and (d, group_a) in vectors and (d, group_b) in vectors
    )
    if not decades:
        raise DataError("no decade has vectors for both groups and a space")
    spaces = load_spaces({d: config.embeddings[d] for d in decades})
    report: dict[int, list] = {}
    exclusions: list[tuple[int, str, str]] = []
    for decade in decades:
        space = spaces[decade]
        axis_vectors, excluded = build_axis_vectors(axes, space)
        exclusions.extend((decade, axis_id, reason) for axis_id, reason in excluded)
        comparisons = [
            compare_axis(av, vectors[(decade, group_a)], vectors[(decade, group_b)], space)
            for _, av in sorted(axis_vectors.items())
        ]
        if comparisons:
            report[decade] = top_axes(comparisons, config.axes_top_k)
    out = config.output
    write_axis_report_csv(report, group_a, group_b, out / "axes_report.csv")
    import csv as _csv

    with open(out / "axes_excluded.csv", "w", newline="", encoding="utf-8") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["decade", "axis_id", "reason"])
        for decade, axis_id, reason in sorted(exclusions):
            writer.writerow([decade, axis_id, reason])
    return EXIT_OK


def run_analyze_toxicity(config: RunConfig, plots: bool = False) -> int:
    config.require(
        axes="for the time adjustment",
        lexicon="for the toxic word list",
        embeddings="for axis and word vectors",
    )
    tables = read_tables(config.output / "tables")
    if not tables:
        raise DataError("no context tables; run scan first")
    lexicon = load_lexicon(config.lexicon, config.toxicity_level)
    axes = load_axes(config.axes)
    decades = sorted(d for d in config.decades.decades() if d in config.embeddings)
    spaces = load_spaces({d: config.embeddings[d] for d in decades})
    anchor = config.anchor_decade if config.anchor_decade is not None else max(decades)
    if anchor not in spaces:
        raise ConfigError(f"anchor decade {anchor} has no embedding space")
    adjustment = build_adjustment(
        spaces[anchor], lexicon, axes, top_n=config.toxicity_top_axes
    )
    logger.info(
        "toxicity anchor %d, top axes: %s", anchor, ", ".join(adjustment.top_axes)
    )
    groups = sorted({g for _, g in tables})
    rows = []
    for decade in decades:
        retained, removed = adjust_lexicon(spaces[decade], adjustment, lexicon, axes)
        for group in groups:
            table = tables.get((decade, group))
            if table is None or table.total_weight == 0:
                logger.warning("decade %d group %s: no context, skipped", decade, group)
                continue
            rows.append(
                ToxicityRow(
                    decade=decade,
                    group=group,
                    toxicity_percent=toxicity_rate(table, retained),
                    removed_word_count=len(removed),
                )
            )
    out = config.output
    write_toxicity_csv(rows, out / "toxicity.csv")
    write_removed_words_csv(adjustment.removed, out / "removed_words.csv")
    if plots:
        _plot_toxicity(rows, out / "plots" / "toxicity.svg")
    return EXIT_OK


# --- sweep -----------------------------------------------------------------

def run_sweep(config: RunConfig) -> int:
    if not (config.output / "tables").exists():
        code = run_scan(config)
        if code != EXIT_OK:
            return code
    for k in config.sweep_k:
        for n in config.sweep_n:
            trainer = dataclasses.replace(config.trainer, k=k, n=n)
            cell_dir = config.output / "sweep" / f"k{k}_n{n}"
            logger.info("sweep cell k=%d n=%d -> %s", k, n, cell_dir)
            run_train(config, out_dir=cell_dir, trainer=trainer)
    return EXIT_OK


# --- synth -----------------------------------------------------------------

def run_synth(args: argparse.Namespace) -> int:
    spec = PlantSpec(
        dim=args.dim,
        decades=tuple(args.decades),
        break_decade=args.break_decade,
        ngrams_per_group=args.ngrams,
        bias_a_right=args.bias_a,
        bias_b_right=args.bias_b,
        toxic_rate=args.toxic_rate,
        toxic_boost=args.toxic_boost,
        persons_per_group=args.persons,
        noise=args.noise,
        seed=args.seed,
    )
    manifest = generate_bundle(spec, args.output)
    logger.info(
        "bundle written to %s (planted axis %s)",
        args.output, manifest.planted["axis_id"],
    )
    return EXIT_OK


# --- report ----------------------------------------------------------------

def _write_manifest(config: RunConfig, subcommand: str) -> None:
    import numpy

    out = config.output
    outputs = sorted(
        str(p.relative_to(out))
        for p in out.rglob("*")
        if p.is_file() and p.name != "run_manifest.json"
    )
    payload = {
        "subcommand": subcommand,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "versions": {
            "portrayal": __version__,
            "python": sys.version.split()[0],
            "numpy": numpy.__version__,
        },
        "config": describe(config),
        "outputs": outputs,
    }
    with open(out / "run_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def run_report(config: RunConfig, plots: bool = False) -> int:
    scan_code = run_scan(config)
    run_train(config)
    run_analyze_corr(config, plots=plots)
    run_analyze_axes(config)
    run_analyze_toxicity(config, plots=plots)
    _write_manifest(config, "report")
    return scan_code


# --- plots -----------------------------------------------------------------

def _plot_heatmap(matrix, path: Path) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib not installed; skipping %s", path)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(matrix.values, vmin=-1.0, vmax=1.0, cmap="RdBu_r")
    ax.set_xticks(range(len(matrix.decades)), matrix.decades, rotation=90)
    ax.set_yticks(range(len(matrix.decades)), matrix.decades)
    ax.set_title(f"decade correlation: {matrix.group}")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def _plot_toxicity(rows, path: Path) -> None:
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib not installed; skipping %s", path)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    groups = sorted({r.group for r in rows})
    fig, ax = plt.subplots(figsize=(7, 4))
    for group in groups:
        series = sorted((r.decade, r.toxicity_percent) for r in rows if r.group == group)
        ax.plot([d for d, _ in series], [v for _, v in series], marker="o", label=group)
    ax.set_xlabel("decade")
    ax.set_ylabel("toxic context (%)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# --- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="portrayal",
        description="Measure how two groups are portrayed across decades of an n-gram corpus.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="run config JSON")
        p.add_argument("--seed", type=int, default=None, help="override the root seed")
        p.add_argument("--output", default=None, help="override the output directory")
        p.add_argument("--workers", type=int, default=None, help="override worker count")

    p_scan = sub.add_parser("scan", help="filter the corpus into context tables")
    add_config_flags(p_scan)

    p_train = sub.add_parser("train", help="train per-decade group vectors")
    add_config_flags(p_train)

    p_analyze = sub.add_parser("analyze", help="emit analysis reports")
    p_analyze.add_argument("which", choices=["corr", "axes", "toxicity"])
    add_config_flags(p_analyze)
    p_analyze.add_argument("--plots", action="store_true", help="also write SVG plots")

    p_sweep = sub.add_parser("sweep", help="train over the configured k x n grid")
    add_config_flags(p_sweep)

    p_report = sub.add_parser("report", help="full pipeline: scan, train, analyze x3")
    add_config_flags(p_report)
    p_report.add_argument("--plots", action="store_true", help="also write SVG plots")

    p_synth = sub.add_parser("synth", help="generate a planted synthetic fixture bundle")
    p_synth.add_argument("--output", required=True, help="bundle directory")
    p_synth.add_argument("--seed", type=int, default=7)
    p_synth.add_argument("--dim", type=int, default=50)
    p_synth.add_argument(
        "--decades", type=int, nargs="+", default=[1850, 1860, 1870],
        help="decade start years",
    )
    p_synth.add_argument("--break-decade", type=int, default=None)
    p_synth.add_argument("--ngrams", type=int, default=10_000, help="5-grams per group per decade")
    p_synth.add_argument("--bias-a", type=float, default=0.8)
    p_synth.add_argument("--bias-b", type=float, default=0.2)
    p_synth.add_argument("--toxic-rate", type=float, default=0.02)
    p_synth.add_argument("--toxic-boost", type=float, default=4.0)
    p_synth.add_argument("--persons", type=int, default=20)
    p_synth.add_argument("--noise", type=float, default=0.08)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%H:%M:%S",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "synth":
            return run_synth(args)
        overrides = {
            "seed": args.seed,
            "output": args.output,
            "workers": args.workers,
        }
        config = load_config(args.config, overrides)
        if args.command == "scan":
            code = run_scan(config)
        elif args.command == "train":
            code = run_train(config)
        elif args.command == "analyze":
            plots = getattr(args, "plots", False)
            if args.which == "corr":
                code = run_analyze_corr(config, plots=plots)
            elif args.which == "axes":
                code = run_analyze_axes(config)
            else:
                code = run_analyze_toxicity(config, plots=plots)
        elif args.command == "sweep":
            code = run_sweep(config)
        elif args.command == "report":
            return run_report(config, plots=getattr(args, "plots", False))
        else:
            parser.error(f"unknown command {args.command}")
        subcommand = args.command if args.command != "analyze" else f"analyze {args.which}"
        _write_manifest(config, subcommand)
        return code
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except (EndpointUnreachable, QueryRejected) as exc:
        logger.error("endpoint error: %s", exc)
        return EXIT_IO
    except OSError as exc:
        logger.error("i/o error: %s", exc)
        return EXIT_IO
    except PortrayalError as exc:
        logger.error("data error: %s", exc)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
