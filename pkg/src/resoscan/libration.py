"""Consistency gate, resonance angles and the libration test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ._kernels import screen_block
from .circular import ang_diff, circular_mean, max_circular_gap, wrap_deg
from .domain import (ParticleRecord, PlanetEphemeris, ResonanceFinding, ResonanceTuple,
                     SearchConfig)
from .errors import DetectorDegenerateError, InvalidInputError, UndefinedMeanError


@dataclass(frozen=True, eq=False)
class ResonanceAngleSeries:
    tuple: ResonanceTuple
    phi: np.ndarray


def is_consistent(particle: ParticleRecord, consistency_rel_range: float) -> bool:
    """Semi-major axis relative range (max - min) / mean within the threshold."""
    a = particle.a
    return bool((a.max() - a.min()) / a.mean() <= consistency_rel_range)


def _phi(t, lam, lam_N, varpi, Omega, varpi_N, Omega_N) -> np.ndarray:
    p, q, m, n, r, s = (float(v) for v in t)
    # phi = p*lambda - q*lambda_N - m*varpi - n*Omega - r*varpi_N - s*Omega_N
    raw = p * lam - q * lam_N - m * varpi - n * Omega - r * varpi_N - s * Omega_N
    return wrap_deg(raw)


def resonance_angle_series(particle: ParticleRecord, eph: PlanetEphemeris,
                           t) -> ResonanceAngleSeries:
    t = ResonanceTuple(*t).checked()
    eph.check_matches(particle)
    phi = _phi(t, particle.lam, eph.lam_N, particle.varpi, particle.Omega,
               eph.varpi_N, eph.Omega_N)
    return ResonanceAngleSeries(t, phi)


def window_bounds(n: int, window_count: int, min_window_samples: int) -> list[tuple[int, int]]:
    """Index ranges [start, stop) of the detector windows.

    Window i covers the real interval [i*n/W, (i+1)*n/W) rounded outward, so
    neighbours share a sample when n is not a multiple of W and the layout is
    mirror-symmetric. Falls back to one whole-series window when any window
    would be shorter than ``min_window_samples``.
    """
    bounds = [((i * n) // window_count, -((-(i + 1) * n) // window_count))
              for i in range(window_count)]
    if any(b - a < min_window_samples for a, b in bounds):
        return [(0, n)]
    return bounds


def librates(phi: np.ndarray, config: SearchConfig) -> bool:
    for a, b in window_bounds(len(phi), config.window_count, config.min_window_samples):
        if max_circular_gap(phi[a:b]) < config.gap_threshold_deg:
            return False
    return True


def check_libration(series: ResonanceAngleSeries,
                    config: SearchConfig) -> Optional[ResonanceFinding]:
    """Windowed confinement test; returns center and amplitude when librating."""
    phi = series.phi
    if len(phi) < 2:
        raise InvalidInputError("libration test needs at least 2 samples")
    if not librates(phi, config):
        return None
    try:
        center = circular_mean(phi)
    except UndefinedMeanError as exc:
        raise DetectorDegenerateError(
            f"tuple {tuple(series.tuple)} passes the gap test but has no mean direction") from exc
    amplitude = float(np.max(np.abs(ang_diff(phi, center))))
    return ResonanceFinding(series.tuple, center, amplitude)


def screen_bins(gap_threshold_deg: float) -> int:
    """Bin count for the screen: width below half the threshold by a relative 1e-6 or more."""
    return math.floor(720.0 / gap_threshold_deg * (1.0 + 1e-6)) + 1


class LibrationChecker:
    """Evaluates candidate tuples against one particle.

    Holds the epoch-checked angle table so repeated calls skip validation. The
    result for every tuple equals ``check_libration(resonance_angle_series(...))``;
    with ``config.prescreen`` the compiled bin screen discards tuples that
    certainly circulate before the exact test runs.
    """

    def __init__(self, particle: ParticleRecord, eph: PlanetEphemeris, config: SearchConfig):
        eph.check_matches(particle)
        self.particle = particle
        self.eph = eph
        self.config = config
        self.table = np.ascontiguousarray(np.column_stack(
            [particle.lam, eph.lam_N, particle.varpi, particle.Omega, eph.varpi_N, eph.Omega_N]))
        bounds = window_bounds(len(particle), config.window_count, config.min_window_samples)
        self.starts = np.array([a for a, _ in bounds], dtype=np.int64)
        self.stops = np.array([b for _, b in bounds], dtype=np.int64)
        self.nbins = screen_bins(config.gap_threshold_deg)

    def series(self, t) -> ResonanceAngleSeries:
        p, e = self.particle, self.eph
        t = ResonanceTuple(*t)
        return ResonanceAngleSeries(t, _phi(t, p.lam, e.lam_N, p.varpi, p.Omega,
                                            e.varpi_N, e.Omega_N))

    def exact(self, t) -> Optional[ResonanceFinding]:
        return check_libration(self.series(t), self.config)

    def screen(self, block: np.ndarray) -> np.ndarray:
        """Boolean mask of rows that may librate (all True without prescreen)."""
        out = np.ones(len(block), dtype=np.bool_)
        if self.config.prescreen and len(block):
            screen_block(self.table, np.ascontiguousarray(block, dtype=np.int64),
                         self.starts, self.stops, self.nbins, out)
        return out

    def check(self, t) -> Optional[ResonanceFinding]:
        if self.config.prescreen:
            row = np.asarray([t], dtype=np.int64)
            if not self.screen(row)[0]:
                return None
        return self.exact(t)

    def check_block(self, block: np.ndarray) -> list[Optional[ResonanceFinding]]:
        maybe = self.screen(block)
        out: list[Optional[ResonanceFinding]] = [None] * len(block)
        for i in np.flatnonzero(maybe):
            out[i] = self.exact(tuple(int(v) for v in block[i]))
        return out
