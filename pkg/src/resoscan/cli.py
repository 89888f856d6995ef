"""Command-line entry point: generate, analyze, bench, hist.

Data goes to files; stdout only carries progress lines.
Exit codes: 0 success, 1 I/O, 2 usage, 3 per-particle errors.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import statistics
import sys
from dataclasses import dataclass
from pathlib import Path

from . import executor, synth
from .domain import (ERROR, SearchConfig, read_ephemeris, read_particles, read_results_csv,
                     write_ephemeris, write_labels, write_particles, write_results_csv)
from .errors import InvalidInputError, ParseError, ResoscanError

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_PARTICLE = 0, 1, 2, 3

PARTICLES_FILE = "particles.jsonl"
EPHEMERIS_FILE = "ephemeris.json"
LABELS_FILE = "labels.csv"
BENCH_HEADER = ["particle_id", "mode", "workers", "prefix_depth", "classification",
                "elapsed_ns", "invocations"]
SPEEDUP_HEADER = ["mode", "workers", "depth", "total_elapsed_ns", "speedup_vs_serial"]
BUSY_HEADER = ["mode", "workers", "depth", "worker", "busy_ns"]
HIST_HEADER = ["bucket_low_ns", "bucket_high_ns", "count"]


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class BenchRow:
    particle_id: str
    mode: str
    workers: int
    prefix_depth: int
    classification: str
    elapsed_ns: int
    invocations: int

    def __post_init__(self):
        if self.mode not in executor.MODES:
            raise InvalidInputError(f"unknown mode {self.mode!r}")
        if self.elapsed_ns < 0 or self.invocations < 0:
            raise InvalidInputError("elapsed_ns and invocations must be non-negative")

    def fields(self) -> list:
        return [self.particle_id, self.mode, self.workers, self.prefix_depth,
                self.classification, self.elapsed_ns, self.invocations]


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _count(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _int_list(text):
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return vals


def _mode_list(text):
    vals = [v.strip() for v in text.split(",") if v.strip()]
    bad = [v for v in vals if v not in executor.MODES]
    if not vals or bad:
        raise argparse.ArgumentTypeError(f"modes must be drawn from {', '.join(executor.MODES)}")
    return vals


def _add_search_flags(p):
    p.add_argument("--input", required=True, type=Path,
                   help=f"corpus directory holding {PARTICLES_FILE} and {EPHEMERIS_FILE}")
    p.add_argument("--pmax", type=_positive_int, default=30, help="largest p searched (default 30)")
    p.add_argument("--gap-deg", type=float, default=30.0,
                   help="minimum empty arc, in degrees, for a window to count as librating")
    p.add_argument("--windows", type=_positive_int, default=4,
                   help="number of time windows that must all librate (default 4)")
    p.add_argument("--consistency", type=float, default=0.1,
                   help="largest relative range of a before rejection (default 0.1)")


def build_parser() -> argparse.ArgumentParser:
    cores = os.cpu_count() or 1
    parser = argparse.ArgumentParser(
        prog="resoscan",
        description="Classify orbital time series as resonant or not with a perturbing planet.")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic labeled corpus")
    g.add_argument("--rejectable", type=_count, default=0, help="particles with an inconsistent a")
    g.add_argument("--resonant", type=_count, default=0, help="particles with a planted resonance")
    g.add_argument("--nonresonant", type=_count, default=0,
                   help="particles where every tuple circulates")
    g.add_argument("--steps", type=_positive_int, default=9629, help="samples per particle")
    g.add_argument("--pmax", type=_positive_int, default=30,
                   help="pmax the labels are guaranteed for (default 30)")
    g.add_argument("--seed", type=_count, default=0, help="master seed (default 0)")
    g.add_argument("--preset", choices=sorted(synth.PRESETS),
                   help="named corpus shape; overrides the count and step flags")
    g.add_argument("--out", required=True, type=Path, help="output directory")

    a = sub.add_parser("analyze", help="classify a corpus and write a results CSV")
    _add_search_flags(a)
    a.add_argument("--mode", choices=executor.MODES, default=executor.SERIAL,
                   help="execution strategy (default serial)")
    a.add_argument("--workers", type=_positive_int, default=cores,
                   help=f"worker count (default: logical cores, here {cores})")
    a.add_argument("--depth", type=int, choices=range(1, 6), default=2,
                   help="wavefront prefix depth, 1..5 (default 2)")
    a.add_argument("--out", required=True, type=Path, help="results CSV path")

    b = sub.add_parser("bench", help="time a sweep of execution strategies")
    _add_search_flags(b)
    b.add_argument("--modes", type=_mode_list, default=[executor.SERIAL, executor.WAVEFRONT],
                   help="comma-separated modes (default serial,wavefront)")
    b.add_argument("--workers-list", type=_int_list, default=[1, cores],
                   help="comma-separated worker counts, e.g. 1,2,4,8,12")
    b.add_argument("--depth-list", type=_int_list, default=[2],
                   help="comma-separated wavefront prefix depths, e.g. 1,2,3,4")
    b.add_argument("--repeats", type=_positive_int, default=1,
                   help="runs per point; the run with the median total is kept")
    b.add_argument("--out", required=True, type=Path,
                   help="output directory for bench.csv, speedup.csv and busy.csv")

    h = sub.add_parser("hist", help="decade histogram of per-particle elapsed_ns")
    h.add_argument("--input", required=True, type=Path, help="bench or results CSV")
    h.add_argument("--out", required=True, type=Path, help="histogram CSV path")
    return parser


def _config(args, workers=1, depth=2) -> SearchConfig:
    return SearchConfig(pmax=args.pmax, prefix_depth=depth, workers=workers,
                        gap_threshold_deg=args.gap_deg, window_count=args.windows,
                        consistency_rel_range=args.consistency)


def _load_corpus(directory: Path):
    particles = read_particles(directory / PARTICLES_FILE)
    eph = read_ephemeris(directory / EPHEMERIS_FILE)
    return particles, eph


def cmd_generate(args) -> int:
    if args.preset:
        shape = dict(synth.PRESETS[args.preset])
    else:
        shape = dict(n_rejectable=args.rejectable, n_resonant=args.resonant,
                     n_nonresonant=args.nonresonant, n_steps=args.steps)
    spec = synth.CorpusSpec(pmax=args.pmax, seed=args.seed, **shape)
    print(f"generating {spec.total} particles x {spec.n_steps} steps (seed {spec.seed})")
    corpus = synth.gen_corpus(spec)
    args.out.mkdir(parents=True, exist_ok=True)
    write_particles(args.out / PARTICLES_FILE, corpus.particles)
    write_ephemeris(args.out / EPHEMERIS_FILE, corpus.ephemeris)
    write_labels(args.out / LABELS_FILE, corpus.labels)
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    particles, eph = _load_corpus(args.input)
    config = _config(args, args.workers, args.depth)
    mode = executor.ExecutionMode(args.mode, args.workers, args.depth)
    print(f"analyzing {len(particles)} particles, mode {mode.kind}, workers {mode.workers}")
    rows = executor.run_corpus(particles, eph, config, mode)
    write_results_csv(args.out, rows)
    errors = [r for r in rows if r.label == ERROR]
    for r in errors:
        print(f"{r.id}: {r.error}")
    print(f"wrote {args.out}")
    return EXIT_PARTICLE if errors else EXIT_OK


def _bench_points(args):
    for mode in args.modes:
        if mode == executor.SERIAL:
            yield executor.ExecutionMode.serial()
        elif mode == executor.WAVEFRONT:
            for w in args.workers_list:
                for d in args.depth_list:
                    yield executor.ExecutionMode(mode, w, d)
        else:
            for w in args.workers_list:
                yield executor.ExecutionMode(mode, w)


def _depth_column(mode: executor.ExecutionMode) -> int:
    return mode.prefix_depth if mode.kind == executor.WAVEFRONT else 0


def cmd_bench(args) -> int:
    for d in args.depth_list:
        if d > 5:
            raise UsageError(f"prefix depth {d} outside 1..5")
    particles, eph = _load_corpus(args.input)
    args.out.mkdir(parents=True, exist_ok=True)
    bench_rows, totals, busy_rows = [], {}, []
    any_error = False
    for mode in _bench_points(args):
        config = _config(args, mode.workers, mode.prefix_depth)
        reports = [executor.run_corpus_report(particles, eph, config, mode)
                   for _ in range(args.repeats)]
        median = statistics.median_low([r.wall_ns for r in reports])
        report = next(r for r in reports if r.wall_ns == median)
        depth = _depth_column(mode)
        totals[(mode.kind, mode.workers, depth)] = report.wall_ns
        for row, inv in zip(report.rows, report.invocations):
            any_error |= row.label == ERROR
            bench_rows.append(BenchRow(row.id, mode.kind, mode.workers, depth, row.label,
                                       int(row.elapsed_ns), int(inv)))
        for i, (_, ns) in enumerate(sorted(report.busy_ns.items())):
            busy_rows.append([mode.kind, mode.workers, depth, i, ns])
        print(f"{mode.kind:18s} workers={mode.workers:<3d} depth={depth} "
              f"total={report.wall_ns / 1e9:.3f}s imbalance={report.imbalance:.2f}")

    with open(args.out / "bench.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        w.writerows(r.fields() for r in bench_rows)
    with open(args.out / "speedup.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPEEDUP_HEADER)
        for (kind, workers, depth), total in totals.items():
            w.writerow([kind, workers, depth, total,
                        f"{_speedup(totals, kind, workers, depth):.6g}"])
    with open(args.out / "busy.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BUSY_HEADER)
        w.writerows(busy_rows)
    print(f"wrote {args.out}")
    return EXIT_PARTICLE if any_error else EXIT_OK


def _speedup(totals, kind, workers, depth) -> float:
    """Speedup over the same strategy run with the fewest workers in the sweep."""
    base_workers = min(w for (k, w, d) in totals if k == kind and d == depth)
    base = totals[(kind, base_workers, depth)]
    total = totals[(kind, workers, depth)]
    return base / total if total else math.inf


def _read_elapsed(path: Path) -> list[int]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        header = next(csv.reader(fh), None)
    if header is None:
        return []
    if header == BENCH_HEADER:
        out = []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for lineno, rec in enumerate(csv.DictReader(fh), start=2):
                try:
                    out.append(int(rec["elapsed_ns"]))
                except (TypeError, ValueError) as exc:
                    raise ParseError(f"bad elapsed_ns: {exc}", line=lineno) from exc
        return out
    return [r.elapsed_ns for r in read_results_csv(path)]


def decade_histogram(elapsed_ns) -> list[tuple[int, int, int]]:
    """Counts per [10^k, 10^(k+1)) bucket, contiguous from the smallest to largest decade.

    Zero lands in the [0, 1) bucket.
    """
    if not elapsed_ns:
        return []
    exps = []
    for ns in elapsed_ns:
        if ns < 0:
            raise InvalidInputError(f"negative elapsed_ns {ns}")
        exps.append(-1 if ns == 0 else len(str(int(ns))) - 1)
    counts = {}
    for e in exps:
        counts[e] = counts.get(e, 0) + 1
    out = []
    for e in range(min(exps), max(exps) + 1):
        lo, hi = (0, 1) if e < 0 else (10 ** e, 10 ** (e + 1))
        out.append((lo, hi, counts.get(e, 0)))
    return out


def cmd_hist(args) -> int:
    buckets = decade_histogram(_read_elapsed(args.input))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HIST_HEADER)
        w.writerows(buckets)
    print(f"wrote {args.out} ({len(buckets)} buckets)")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "analyze": cmd_analyze, "bench": cmd_bench,
            "hist": cmd_hist}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (OSError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (UsageError, InvalidInputError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResoscanError as exc:
        # generation failures and other library errors share the non-usage failure code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

if __name__ == "__main__":
    sys.exit(main())
