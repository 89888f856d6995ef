"""Serial, particle-parallel and wavefront-parallel resonance search.

Every strategy returns exactly what the serial nested loops return: the first
tuple in serial order whose angle librates.
"""
from __future__ import annotations

import multiprocessing as mp
import os
import time
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import tuplespace
from .domain import (Classification, ParticleRecord, PlanetEphemeris, ResonanceFinding,
                     ResultRow, SearchConfig)
from .errors import InvalidInputError, ResoscanError, SearchError
from .libration import LibrationChecker, is_consistent

SERIAL = "serial"
PARTICLES_STATIC = "particles_static"
PARTICLES_DYNAMIC = "particles_dynamic"
WAVEFRONT = "wavefront"
MODES = (SERIAL, PARTICLES_STATIC, PARTICLES_DYNAMIC, WAVEFRONT)


@dataclass(frozen=True)
class ExecutionMode:
    kind: str
    workers: int = 1
    prefix_depth: int = 2

    def __post_init__(self):
        if self.kind not in MODES:
            raise InvalidInputError(f"unknown mode {self.kind!r}; expected one of {MODES}")
        if self.workers < 1:
            raise InvalidInputError("workers must be >= 1")
        if self.prefix_depth not in range(1, 6):
            raise InvalidInputError("prefix_depth must be in 1..5")

    @classmethod
    def serial(cls):
        return cls(SERIAL)

    @classmethod
    def particles_static(cls, workers):
        return cls(PARTICLES_STATIC, workers)

    @classmethod
    def particles_dynamic(cls, workers):
        return cls(PARTICLES_DYNAMIC, workers)

    @classmethod
    def wavefront(cls, workers, prefix_depth=2):
        return cls(WAVEFRONT, workers, prefix_depth)


@dataclass
class SearchStats:
    """Counters filled in by one particle search."""

    invocations: int = 0
    wavefronts: int = 0
    # tuple -> number of evaluations, only kept when requested
    trace: Optional[dict] = None

    def record(self, rows: np.ndarray) -> None:
        self.invocations += len(rows)
        if self.trace is not None:
            for row in rows:
                key = tuple(int(v) for v in row)
                self.trace[key] = self.trace.get(key, 0) + 1


def _wrap_failure(exc: Exception, row) -> SearchError:
    t = tuple(int(v) for v in row)
    return SearchError(f"evaluation of tuple {t} failed: {exc}", tuple=t)


def check_resonance_serial(particle: ParticleRecord, eph: PlanetEphemeris,
                           config: SearchConfig,
                           stats: Optional[SearchStats] = None) -> Classification:
    """Reference search: one tuple at a time in serial order, stop at the first hit."""
    stats = stats if stats is not None else SearchStats()
    if not is_consistent(particle, config.consistency_rel_range):
        return Classification.rejected()
    checker = LibrationChecker(particle, eph, config)
    for p, q in tuplespace.enumerate_ratios(config.pmax):
        block = tuplespace.subset_array(tuplespace.WavefrontPrefix(2, (p, q)))
        for i in range(len(block)):
            row = block[i:i + 1]
            stats.record(row)
            try:
                found = checker.check_block(row)[0]
            except ResoscanError as exc:
                raise _wrap_failure(exc, row[0]) from exc
            if found is not None:
                return Classification.resonant(found)
    return Classification.non_resonant()


_UNSET = object()


class WavefrontSearch:
    """Inspector/executor search with a reusable worker pool.

    Each wavefront is the full completion set of one prefix. Its tuples are
    split into contiguous chunks; every chunk writes only its own slots of the
    result array, and the scan for the first hit starts after all chunks finish.
    """

    def __init__(self, workers: int, prefix_depth: int = 2, chunks_per_worker: int = 4):
        if workers < 1:
            raise InvalidInputError("workers must be >= 1")
        if prefix_depth not in range(1, 6):
            raise InvalidInputError("prefix_depth must be in 1..5")
        self.workers = workers
        self.prefix_depth = prefix_depth
        self.chunks_per_worker = chunks_per_worker
        self._pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown(wait=True)
            self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _evaluate(self, checker, block, slots, writes, lo, hi):
        part = block[lo:hi]
        try:
            found = checker.check_block(part)
        except ResoscanError as exc:
            # name the first tuple the screen let through; the exact test is per tuple
            bad = part[0]
            for i, row in enumerate(part):
                try:
                    checker.check_block(part[i:i + 1])
                except ResoscanError:
                    bad = row
                    break
            raise _wrap_failure(exc, bad) from exc
        for i, f in enumerate(found):
            if slots[lo + i] is not _UNSET:
                raise RuntimeError(f"result slot {lo + i} written twice")
            slots[lo + i] = f
        writes[lo:hi] += 1

    def run_wavefront(self, checker: LibrationChecker,
                      block: np.ndarray) -> list[Optional[ResonanceFinding]]:
        k = len(block)
        slots = [_UNSET] * k
        writes = np.zeros(k, dtype=np.int64)
        n_chunks = min(k, self.workers * self.chunks_per_worker) if self._pool else 1
        edges = np.linspace(0, k, n_chunks + 1).astype(np.int64)
        spans = [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
        if self._pool is None:
            for lo, hi in spans:
                self._evaluate(checker, block, slots, writes, lo, hi)
        else:
            futures = [self._pool.submit(self._evaluate, checker, block, slots, writes, lo, hi)
                       for lo, hi in spans]
            for fut in futures:
                fut.result()
        if not np.all(writes == 1):
            raise RuntimeError("wavefront finished with slots not written exactly once")
        return slots

    def search(self, particle: ParticleRecord, eph: PlanetEphemeris, config: SearchConfig,
               stats: Optional[SearchStats] = None) -> Classification:
        stats = stats if stats is not None else SearchStats()
        if not is_consistent(particle, config.consistency_rel_range):
            return Classification.rejected()
        checker = LibrationChecker(particle, eph, config)
        for prefix in tuplespace.iter_prefixes(config.pmax, self.prefix_depth):
            block = tuplespace.subset_array(prefix)
            stats.record(block)
            stats.wavefronts += 1
            for found in self.run_wavefront(checker, block):
                if found is not None:
                    return Classification.resonant(found)
        return Classification.non_resonant()


def check_resonance_wavefront(particle: ParticleRecord, eph: PlanetEphemeris,
                              config: SearchConfig, workers: int, prefix_depth: int,
                              stats: Optional[SearchStats] = None,
                              search: Optional[WavefrontSearch] = None) -> Classification:
    """Wavefront search; pass ``search`` to reuse its pool across particles."""
    if search is not None:
        if (search.workers, search.prefix_depth) != (workers, prefix_depth):
            raise InvalidInputError("search pool does not match workers/prefix_depth")
        return search.search(particle, eph, config, stats)
    with WavefrontSearch(workers, prefix_depth) as own:
        return own.search(particle, eph, config, stats)


# -- corpus runs -----------------------------------------------------------------

@dataclass
class CorpusReport:
    rows: list
    invocations: list
    wall_ns: int
    # worker id -> summed per-particle elapsed time
    busy_ns: dict = field(default_factory=dict)

    @property
    def imbalance(self) -> float:
        """Max over mean worker busy time (1.0 is perfectly balanced)."""
        vals = list(self.busy_ns.values())
        if not vals or sum(vals) == 0:
            return 1.0
        return max(vals) / (sum(vals) / len(vals))


def _timed(fn, particle, *args):
    stats = SearchStats()
    t0 = time.perf_counter_ns()
    try:
        cls = fn(particle, *args, stats=stats)
        err = None
    except ResoscanError as exc:
        cls, err = None, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter_ns() - t0
    return ResultRow(particle.id, cls, elapsed, error=err), stats.invocations


# process-pool worker state, installed by the initializer
_WORKER = {}


def _init_worker(particles, eph, config):
    _WORKER["particles"] = particles
    _WORKER["eph"] = eph
    _WORKER["config"] = config


def _run_indices(indices):
    ps, eph, config = _WORKER["particles"], _WORKER["eph"], _WORKER["config"]
    out = []
    for i in indices:
        row, inv = _timed(check_resonance_serial, ps[i], eph, config)
        out.append((i, row, inv, os.getpid()))
    return out


def _contiguous_blocks(n: int, workers: int) -> list[list[int]]:
    edges = np.linspace(0, n, workers + 1).astype(int)
    return [list(range(a, b)) for a, b in zip(edges[:-1], edges[1:])]


def _warm_kernel():
    from ._kernels import screen_block
    screen_block(np.zeros((1, 6)), np.zeros((1, 6), dtype=np.int64),
                 np.zeros(1, dtype=np.int64), np.ones(1, dtype=np.int64), 4,
                 np.zeros(1, dtype=np.bool_))


def run_corpus_report(particles: Sequence[ParticleRecord], eph: PlanetEphemeris,
                      config: SearchConfig, mode: ExecutionMode) -> CorpusReport:
    particles = list(particles)
    n = len(particles)
    rows: list = [None] * n
    invocations = [0] * n
    busy: dict = {}
    if n == 0:
        return CorpusReport([], [], 0, {})
    _warm_kernel()
    t0 = time.perf_counter_ns()
    if mode.kind == SERIAL:
        for i, p in enumerate(particles):
            rows[i], invocations[i] = _timed(check_resonance_serial, p, eph, config)
        busy[0] = sum(r.elapsed_ns for r in rows)
    elif mode.kind == WAVEFRONT:
        with WavefrontSearch(mode.workers, mode.prefix_depth) as search:
            for i, p in enumerate(particles):
                rows[i], invocations[i] = _timed(search.search, p, eph, config)
        busy[0] = sum(r.elapsed_ns for r in rows)
    else:
        if mode.kind == PARTICLES_STATIC:
            tasks = [b for b in _contiguous_blocks(n, mode.workers) if b]
        else:
            tasks = [[i] for i in range(n)]
        ctx = mp.get_context("fork") if "fork" in mp.get_all_start_methods() else None
        with ProcessPoolExecutor(max_workers=mode.workers, mp_context=ctx,
                                 initializer=_init_worker,
                                 initargs=(particles, eph, config)) as pool:
            t0 = time.perf_counter_ns()
            for chunk in pool.map(_run_indices, tasks):
                for i, row, inv, pid in chunk:
                    rows[i], invocations[i] = row, inv
                    busy[pid] = busy.get(pid, 0) + row.elapsed_ns
    wall = time.perf_counter_ns() - t0
    return CorpusReport(rows, invocations, wall, busy)


def run_corpus(particles: Sequence[ParticleRecord], eph: PlanetEphemeris,
               config: SearchConfig, mode: ExecutionMode) -> list[ResultRow]:
    """Classify every particle; rows come back in input order for every mode."""
    return run_corpus_report(particles, eph, config, mode).rows
