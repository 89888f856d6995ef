"""The sparse (p, q, m, n, r, s) search space.

Serial order: p ascending from 1, q descending from p to 1 (pairs whose
reduced ratio was already visited are skipped), then m, n, r descending from
their largest admissible value with s taking the remainder.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .domain import ResonanceTuple
from .errors import InvalidInputError

FIELDS = "pqmnr"


def _check_pair(p, q):
    if not (isinstance(p, (int, np.integer)) and isinstance(q, (int, np.integer))):
        raise InvalidInputError(f"p and q must be integers, got {p!r}, {q!r}")
    if p < 1 or not 1 <= q <= p:
        raise InvalidInputError(f"need p >= 1 and 1 <= q <= p, got ({p}, {q})")


def is_unique_ratio(p: int, q: int) -> bool:
    """True when (p, q) is the first visit of its ratio.

    Under the serial order a reduced fraction is always reached at a smaller p
    than any of its multiples, so first occurrence is exactly gcd(p, q) == 1.
    """
    _check_pair(p, q)
    return math.gcd(p, q) == 1


def enumerate_ratios(pmax: int) -> list[tuple[int, int]]:
    if pmax < 1:
        raise InvalidInputError(f"pmax must be >= 1, got {pmax}")
    return [(p, q) for p in range(1, pmax + 1) for q in range(p, 0, -1) if math.gcd(p, q) == 1]


@lru_cache(maxsize=None)
def _completions(d: int) -> np.ndarray:
    """All (m, n, r, s) with sum d, in loop order, as a read-only (k, 4) array."""
    rows = [
        (m, n, r, d - m - n - r)
        for m in range(d, -1, -1)
        for n in range(d - m, -1, -1)
        for r in range(d - m - n, -1, -1)
    ]
    arr = np.array(rows, dtype=np.int64).reshape(-1, 4)
    arr.setflags(write=False)
    return arr


def _pair_block(p: int, q: int) -> np.ndarray:
    tail = _completions(p - q)
    out = np.empty((len(tail), 6), dtype=np.int64)
    out[:, 0] = p
    out[:, 1] = q
    out[:, 2:] = tail
    return out


@dataclass(frozen=True)
class WavefrontPrefix:
    """The first ``depth`` tuple components, held fixed across one wavefront."""

    depth: int
    fixed: tuple

    def __post_init__(self):
        if self.depth not in range(1, 6):
            raise InvalidInputError(f"prefix depth must be in 1..5, got {self.depth}")
        if len(self.fixed) != self.depth:
            raise InvalidInputError(f"depth {self.depth} prefix needs {self.depth} components")
        if not all(isinstance(v, (int, np.integer)) for v in self.fixed):
            raise InvalidInputError("prefix components must be integers")
        p = self.fixed[0]
        if p < 1:
            raise InvalidInputError(f"p must be >= 1, got {p}")
        if self.depth >= 2:
            q = self.fixed[1]
            if not 1 <= q <= p:
                raise InvalidInputError(f"need 1 <= q <= p, got q={q}, p={p}")
            left = p - q
            for name, v in zip(FIELDS[2:], self.fixed[2:]):
                if not 0 <= v <= left:
                    raise InvalidInputError(f"{name}={v} outside [0, {left}]")
                left -= v

    @property
    def remaining(self) -> int:
        """Sum left for the free components (depth >= 2)."""
        p, q = self.fixed[:2]
        return p - q - sum(self.fixed[2:])

    def __str__(self):
        return "(" + ",".join(f"{k}={v}" for k, v in zip(FIELDS, self.fixed)) + ")"


def subset_array(prefix: WavefrontPrefix) -> np.ndarray:
    """Completions of ``prefix`` in serial order as an (k, 6) int64 array.

    A depth-1 prefix spans every q and applies the unique-ratio filter;
    deeper prefixes enumerate completions of the fixed (p, q) as given.
    """
    p = prefix.fixed[0]
    if prefix.depth == 1:
        return np.concatenate([_pair_block(p, q) for q in range(p, 0, -1) if math.gcd(p, q) == 1])
    block = _pair_block(p, prefix.fixed[1])
    if prefix.depth == 2:
        return block
    mask = np.ones(len(block), dtype=bool)
    for col, v in enumerate(prefix.fixed[2:], start=2):
        mask &= block[:, col] == v
    return block[mask]


def subset_for_prefix(prefix: WavefrontPrefix) -> list[ResonanceTuple]:
    return [ResonanceTuple(*map(int, row)) for row in subset_array(prefix)]


def subset_size(prefix: WavefrontPrefix) -> int:
    if prefix.depth == 1:
        p = prefix.fixed[0]
        return sum(math.comb(p - q + 3, 3) for q in range(p, 0, -1) if math.gcd(p, q) == 1)
    left = prefix.remaining
    # free components: 4 at depth 2 down to 1 at depth 5 (s alone)
    free = 6 - prefix.depth
    return math.comb(left + free - 1, free - 1)


def total_space_size(pmax: int, deduped: bool) -> int:
    if pmax < 1:
        raise InvalidInputError(f"pmax must be >= 1, got {pmax}")
    if not deduped:
        return math.comb(pmax + 4, 5)
    return sum(math.comb(p - q + 3, 3) for p, q in enumerate_ratios(pmax))


def iter_prefixes(pmax: int, depth: int) -> Iterator[WavefrontPrefix]:
    """Wavefront prefixes in serial order, ratio filter applied."""
    if depth not in range(1, 6):
        raise InvalidInputError(f"prefix depth must be in 1..5, got {depth}")
    if depth == 1:
        for p in range(1, pmax + 1):
            yield WavefrontPrefix(1, (p,))
        return
    for p, q in enumerate_ratios(pmax):
        if depth == 2:
            yield WavefrontPrefix(2, (p, q))
            continue
        seen = set()
        for row in _completions(p - q):
            head = (p, q, *map(int, row[: depth - 2]))
            if head not in seen:
                seen.add(head)
                yield WavefrontPrefix(depth, head)


def iterate_tuples(pmax: int) -> Iterator[ResonanceTuple]:
    """Every tuple of the deduped space in serial order."""
    for p, q in enumerate_ratios(pmax):
        for m, n, r, s in _completions(p - q):
            yield ResonanceTuple(p, q, int(m), int(n), int(r), int(s))


def iteration_rank(t, pmax: int) -> int:
    """Zero-based position of ``t`` in the deduped serial order."""
    t = ResonanceTuple(*t)
    if not t.is_valid():
        raise InvalidInputError(f"invalid resonance tuple {tuple(t)}")
    p, q, m, n, r, s = t
    if p > pmax:
        raise InvalidInputError(f"p={p} exceeds pmax={pmax}")
    if math.gcd(p, q) != 1:
        raise InvalidInputError(f"({p},{q}) is skipped by the ratio filter")
    before = 0
    for pp, qq in enumerate_ratios(p):
        if (pp, qq) == (p, q):
            break
        before += math.comb(pp - qq + 3, 3)
    d = p - q
    # tuples with larger m, then same m and larger n, then same m, n and larger r
    return before + math.comb(d - m + 2, 3) + math.comb(d - m - n + 1, 2) + s
