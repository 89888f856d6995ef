"""Seeded synthetic particles for the three workload categories.

Particles are built by inverting the resonance-angle definition instead of
integrating orbits. Each resonant or non-resonant particle is verified by the
serial search before it is returned, so the labels hold unconditionally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import tuplespace
from .domain import (NON_RESONANT, REJECTED, RESONANT, ParticleRecord, PlanetEphemeris,
                     ResonanceTuple, SearchConfig, validate_ephemeris, validate_particle)
from .errors import DetectorDegenerateError, GenerationError, InvalidInputError
from .libration import LibrationChecker, window_bounds

NEPTUNE_PERIOD_DAYS = 60190.03
NEPTUNE_A_AU = 30.07
# one output every ~1050 yr: lambda_N advances 6 turns plus the golden angle per
# step, the rotation whose multiples spread most evenly around the circle
STEP_DAYS = (6.0 + (3.0 - math.sqrt(5.0)) / 2.0) * NEPTUNE_PERIOD_DAYS
NEPTUNE_DEG_PER_STEP = 360.0 * STEP_DAYS / NEPTUNE_PERIOD_DAYS

MAX_ATTEMPTS = 8
NONRES_CANDIDATES = 512

DEFAULT_PLANTED = (
    ResonanceTuple(3, 2, 1, 0, 0, 0),
    ResonanceTuple(2, 1, 1, 0, 0, 0),
    ResonanceTuple(5, 3, 2, 0, 0, 0),
    ResonanceTuple(4, 3, 1, 0, 0, 0),
    ResonanceTuple(5, 2, 3, 0, 0, 0),
    ResonanceTuple(7, 4, 3, 0, 0, 0),
    ResonanceTuple(1, 1, 0, 0, 0, 0),
)


def _rng(seed, *salt) -> np.random.Generator:
    return np.random.default_rng([int(seed), *salt])


def _steps(n_steps: int) -> np.ndarray:
    if n_steps < 2:
        raise InvalidInputError(f"n_steps must be >= 2, got {n_steps}")
    return np.arange(n_steps, dtype=np.float64)


def gen_ephemeris(n_steps: int, seed: int) -> PlanetEphemeris:
    """Planet angles: lambda_N at a fixed mean motion, varpi_N and Omega_N slow.

    The two slow rates are drawn from disjoint ranges of opposite sign and stay
    below 1e-6 of the lambda_N rate.
    """
    k = _steps(n_steps)
    rng = _rng(seed, 0xE9)
    lam0, varpi0, node0 = rng.uniform(0.0, 360.0, size=3)
    varpi_rate = rng.uniform(3e-4, 5e-4)
    node_rate = -rng.uniform(1e-4, 2.5e-4)
    return validate_ephemeris(
        epochs=k * STEP_DAYS,
        lam_N=lam0 + NEPTUNE_DEG_PER_STEP * k,
        varpi_N=varpi0 + varpi_rate * k,
        Omega_N=node0 + node_rate * k,
    )


def _unwrapped_ephemeris(eph: PlanetEphemeris):
    """Continuous planet angles, using the generator's fixed mean motion for lambda_N."""
    steps = (eph.epochs - eph.epochs[0]) / STEP_DAYS
    lam = eph.lam_N[0] + NEPTUNE_DEG_PER_STEP * steps
    if np.max(np.abs((lam - eph.lam_N + 180.0) % 360.0 - 180.0)) > 1e-6:
        # not one of ours: wrapped values still give the exact planted angle
        lam = np.asarray(eph.lam_N, dtype=np.float64)
    return lam, np.unwrap(eph.varpi_N, period=360.0), np.unwrap(eph.Omega_N, period=360.0)


def _window_len(n_steps: int, config: SearchConfig) -> int:
    bounds = window_bounds(n_steps, config.window_count, config.min_window_samples)
    return min(b - a for a, b in bounds)


def _self_check(particle, eph, config):
    from .executor import check_resonance_serial
    return check_resonance_serial(particle, eph, config)


def gen_rejectable(id: str, eph: PlanetEphemeris, seed: int,
                   consistency_rel_range: float = 0.1) -> ParticleRecord:
    """Particle whose semi-major axis varies by 4x the consistency threshold (capped near 1)."""
    if consistency_rel_range >= 0.9:
        raise InvalidInputError("consistency_rel_range too large to build an inconsistent a")
    k = _steps(len(eph))
    rng = _rng(seed, 0x01)
    a0 = rng.uniform(35.0, 50.0)
    # relative range = 2 * swing; below 1 keeps a positive
    swing = min(2.0 * consistency_rel_range, 0.9)
    wave = np.sin(2 * np.pi * k / rng.uniform(50.0, 500.0) + rng.uniform(0, 6.3))
    # stretch to exactly [-1, 1] so short series still span the full swing
    span = wave.max() - wave.min()
    wave = 2.0 * (wave - wave.min()) / span - 1.0 if span > 1e-3 else np.where(k % 2 == 0, 1.0, -1.0)
    a = a0 * (1.0 + swing * wave)
    lam = rng.uniform(0, 360) + rng.uniform(0.3, 0.9) * NEPTUNE_DEG_PER_STEP * k
    varpi = rng.uniform(0, 360) + rng.uniform(-1.0, 1.0) * k
    node = rng.uniform(0, 360) + rng.uniform(-1.0, 1.0) * k
    return validate_particle(id, eph.epochs, a, lam, varpi, node)


def gen_resonant(id: str, eph: PlanetEphemeris, target, amplitude_deg: float,
                 libration_period_steps: float, seed: int, *, center_deg: float = 180.0,
                 config: Optional[SearchConfig] = None, jitter_deg: float = 0.0) -> ParticleRecord:
    """Particle whose ``target`` angle librates as center + amplitude * sin(2 pi t / period).

    varpi and Omega drift slowly. When the target is not the first completion
    of its (p, q) they drift at several turns per detector window instead, so
    the earlier siblings of the target circulate. The result is re-drawn with a
    new sub-seed until the serial search reports ``target`` as its first hit.
    """
    target = ResonanceTuple(*target).checked()
    p, q, m, n, r, s = target
    if math.gcd(p, q) != 1:
        raise InvalidInputError(f"target {tuple(target)} is removed by the ratio filter")
    if not 0.0 <= amplitude_deg < 170.0:
        raise InvalidInputError("amplitude_deg must be in [0, 170)")
    config = config or SearchConfig(pmax=max(p, 1), workers=1)
    if p > config.pmax:
        raise InvalidInputError(f"target p={p} exceeds pmax={config.pmax}")
    n_steps = len(eph)
    k = _steps(n_steps)
    lam_N, varpi_N, node_N = _unwrapped_ephemeris(eph)
    turns = 360.0 / _window_len(n_steps, config)
    lo, hi = (5.0, 8.0) if m != p - q else (0.2, 0.6)
    a = np.full(n_steps, NEPTUNE_A_AU * (p / q) ** (2.0 / 3.0))
    phi_star = center_deg + amplitude_deg * np.sin(2 * np.pi * k / libration_period_steps)

    for attempt in range(MAX_ATTEMPTS):
        rng = _rng(seed, 0x02, attempt)
        varpi = rng.uniform(0, 360) + rng.uniform(lo, hi) * turns * k
        node = rng.uniform(0, 360) - rng.uniform(0.3 * lo, 0.375 * hi) * turns * k
        lam = (q * lam_N + m * varpi + n * node + r * varpi_N + s * node_N + phi_star) / p
        if jitter_deg:
            lam = lam + rng.normal(0.0, jitter_deg, n_steps)
        particle = validate_particle(id, eph.epochs, a, lam, varpi, node)
        got = _self_check(particle, eph, config)
        if got.is_resonant and got.finding.tuple == target:
            return particle
    raise GenerationError(
        f"could not plant {tuple(target)} as the first librating tuple in {MAX_ATTEMPTS} attempts")


def _probe_rows(pmax: int) -> np.ndarray:
    """Extreme completions of every surviving (p, q): one per free coefficient."""
    rows = []
    for p, q in tuplespace.enumerate_ratios(pmax):
        d = p - q
        for j in range(4):
            tail = [0, 0, 0, 0]
            tail[j] = d
            rows.append((p, q, *tail))
    return np.array(rows, dtype=np.int64)


def gen_nonresonant(id: str, eph: PlanetEphemeris, seed: int, pmax: int, *,
                    config: Optional[SearchConfig] = None,
                    jitter_deg: float = 0.0) -> ParticleRecord:
    """Consistent particle whose every resonance angle up to ``pmax`` circulates.

    The mean motion is an irrational multiple of the planet's; candidates are
    drawn until every probe angle (the extreme completions of each ratio)
    circulates, and the winner must then pass the full serial search as
    non-resonant.
    """
    config = config or SearchConfig(pmax=pmax, workers=1)
    if config.pmax != pmax:
        config = replace(config, pmax=pmax)
    n_steps = len(eph)
    k = _steps(n_steps)
    probes = _probe_rows(pmax)
    full_checks = 0
    for cand in range(NONRES_CANDIDATES):
        rng = _rng(seed, 0x03, cand)
        ratio = rng.uniform(0.45, 0.8)
        a = np.full(n_steps, NEPTUNE_A_AU * ratio ** (-2.0 / 3.0))
        lam = rng.uniform(0, 360) + ratio * NEPTUNE_DEG_PER_STEP * k
        if jitter_deg:
            lam = lam + rng.normal(0.0, jitter_deg, n_steps)
        varpi = rng.uniform(0, 360) + rng.uniform(1e-4, 4e-4) * k
        node = rng.uniform(0, 360) - rng.uniform(1e-4, 4e-4) * k
        particle = validate_particle(id, eph.epochs, a, lam, varpi, node)
        checker = LibrationChecker(particle, eph, replace(config, prescreen=True))
        try:
            if any(f is not None for f in checker.check_block(probes)):
                continue
        except DetectorDegenerateError:
            continue
        got = _self_check(particle, eph, config)
        if got.kind == NON_RESONANT:
            return particle
        full_checks += 1
        if full_checks >= MAX_ATTEMPTS:
            break
    raise GenerationError(f"no circulating mean motion found for {id} (pmax={pmax})")


@dataclass
class CorpusSpec:
    n_rejectable: int = 0
    n_resonant: int = 0
    n_nonresonant: int = 0
    n_steps: int = 9629
    pmax: int = 30
    seed: int = 0
    planted: Optional[Sequence] = None
    jitter_deg: float = 0.0

    def __post_init__(self):
        if min(self.n_rejectable, self.n_resonant, self.n_nonresonant) < 0:
            raise InvalidInputError("category counts must be non-negative")
        if self.n_steps < 2:
            raise InvalidInputError("n_steps must be >= 2")
        planted = self.planted
        if planted is None:
            planted = [t for t in DEFAULT_PLANTED if t.p <= self.pmax]
        planted = [ResonanceTuple(*t).checked() for t in planted]
        for t in planted:
            if math.gcd(t.p, t.q) != 1:
                raise InvalidInputError(f"planted tuple {tuple(t)} is removed by the ratio filter")
        if self.n_resonant and not planted:
            raise InvalidInputError("no planted tuple fits within pmax")
        self.planted = planted

    @property
    def total(self) -> int:
        return self.n_rejectable + self.n_resonant + self.n_nonresonant


PRESETS = {
    # 82 particles x 9629 steps
    "small82": dict(n_rejectable=57, n_resonant=5, n_nonresonant=20, n_steps=9629),
    # 100 particles x 50,000 steps
    "long100": dict(n_rejectable=70, n_resonant=5, n_nonresonant=25, n_steps=50000),
    # 500 particles x 9629 steps, a quarter needing the full search
    "mixed500": dict(n_rejectable=350, n_resonant=25, n_nonresonant=125, n_steps=9629),
}


@dataclass
class Corpus:
    particles: list
    ephemeris: PlanetEphemeris
    labels: list = field(default_factory=list)  # (id, expected)
    planted: dict = field(default_factory=dict)  # id -> (tuple, center, amplitude)


def _whole_cycle_period(n_steps: int, rng) -> float:
    """Libration period giving an integer number of cycles over the series.

    Whole cycles make the sampled oscillation symmetric, so the circular mean
    lands on the planted center. Periods stay >= 50 samples.
    """
    max_cycles = max(1, min(40, n_steps // 50))
    cycles = int(rng.integers(max(1, max_cycles // 4), max_cycles + 1))
    return n_steps / cycles


def _plant_with_fallback(pid, eph, spec, target, amp, period, sub, center, config):
    # short series can make a target unplantable; move on to the next planted tuple
    i0 = spec.planted.index(target)
    order = spec.planted[i0:] + spec.planted[:i0]
    for cand in order:
        try:
            part = gen_resonant(pid, eph, cand, amp, period, sub, center_deg=center,
                                config=config, jitter_deg=spec.jitter_deg)
            return part, cand
        except GenerationError:
            continue
    raise GenerationError(f"no planted tuple could be planted for {pid}")


def gen_corpus(spec: CorpusSpec, config: Optional[SearchConfig] = None) -> Corpus:
    """Interleaved corpus of the three categories with ground-truth labels."""
    config = config or SearchConfig(pmax=spec.pmax, workers=1)
    if config.pmax != spec.pmax:
        config = replace(config, pmax=spec.pmax)
    eph = gen_ephemeris(spec.n_steps, spec.seed)
    rng = _rng(spec.seed, 0xC0)
    kinds = [REJECTED] * spec.n_rejectable + [RESONANT] * spec.n_resonant \
        + [NON_RESONANT] * spec.n_nonresonant
    order = rng.permutation(len(kinds))
    kinds = [kinds[i] for i in order]
    sub_seeds = rng.integers(0, 2**63, size=len(kinds))
    particles, labels, planted = [], [], {}
    for idx, (kind, sub) in enumerate(zip(kinds, sub_seeds), start=1):
        pid = f"synth-{idx:04d}"
        sub = int(sub)
        if kind == REJECTED:
            part = gen_rejectable(pid, eph, sub, config.consistency_rel_range)
        elif kind == RESONANT:
            prng = _rng(sub, 0x04)
            target = spec.planted[int(prng.integers(len(spec.planted)))]
            amp = 0.0 if target == (1, 1, 0, 0, 0, 0) and prng.random() < 0.2 \
                else float(prng.uniform(15.0, 120.0))
            center = float(prng.choice([0.0, 60.0, 90.0, 180.0, 270.0, 300.0]))
            period = _whole_cycle_period(spec.n_steps, prng)
            part, target = _plant_with_fallback(pid, eph, spec, target, amp, period, sub,
                                                center, config)
            planted[pid] = (target, center, amp)
        else:
            part = gen_nonresonant(pid, eph, sub, spec.pmax, config=config,
                                   jitter_deg=spec.jitter_deg)
        particles.append(part)
        labels.append((pid, kind))
    return Corpus(particles, eph, labels, planted)
