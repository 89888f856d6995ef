"""Domain records, validation and file formats.

Particle files are JSON Lines (one particle per line, keys ``id, epochs, a,
lambda, varpi, Omega``); the ephemeris is one JSON object with keys
``epochs, lambda_N, varpi_N, Omega_N``. Reals are written with 17 significant
digits so a write/read cycle is bit-exact.
"""
from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .circular import wrap_deg
from .errors import InvalidInputError, ParseError, ValidationError

EPOCH_TOLERANCE_DAYS = 1e-6

RESULTS_HEADER = [
    "id", "classification", "p", "q", "m", "n", "r", "s",
    "center_deg", "amplitude_deg", "elapsed_ns",
]

REJECTED = "rejected"
RESONANT = "resonant"
NON_RESONANT = "non_resonant"
ERROR = "error"
CLASSIFICATION_KINDS = (REJECTED, RESONANT, NON_RESONANT)


class ResonanceTuple(NamedTuple):
    """Integer coefficients (p, q, m, n, r, s) of one candidate resonance angle."""

    p: int
    q: int
    m: int
    n: int
    r: int
    s: int

    def is_valid(self) -> bool:
        p, q, m, n, r, s = self
        return (p >= 1 and 1 <= q <= p and min(m, n, r, s) >= 0
                and m + n + r + s == p - q)

    def checked(self) -> "ResonanceTuple":
        if not self.is_valid():
            raise InvalidInputError(f"invalid resonance tuple {tuple(self)}")
        return self


def _frozen(values, name, index_offset=0) -> np.ndarray:
    try:
        arr = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not a list of numbers", field=name) from exc
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional", field=name)
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        i = int(bad[0])
        raise ValidationError(f"{name}[{i}] non-finite", field=name, index=i)
    arr.setflags(write=False)
    return arr


def _frozen_angles(values, name) -> np.ndarray:
    arr = wrap_deg(_frozen(values, name))
    arr.setflags(write=False)
    return arr


def _check_increasing(epochs: np.ndarray, name: str) -> None:
    bad = np.flatnonzero(np.diff(epochs) <= 0)
    if bad.size:
        i = int(bad[0]) + 1
        raise ValidationError(f"{name}[{i}] not strictly increasing", field=name, index=i)


def _arrays_equal(a, b, names) -> bool:
    return all(np.array_equal(getattr(a, n), getattr(b, n)) for n in names)


@dataclass(frozen=True, eq=False)
class ParticleRecord:
    """Orbital-element time series of one object.

    Build through :func:`validate_particle`; the arrays are read-only.
    """

    id: str
    epochs: np.ndarray
    a: np.ndarray
    lam: np.ndarray
    varpi: np.ndarray
    Omega: np.ndarray

    _ARRAYS = ("epochs", "a", "lam", "varpi", "Omega")

    def __len__(self) -> int:
        return len(self.epochs)

    def __eq__(self, other):
        if not isinstance(other, ParticleRecord):
            return NotImplemented
        return self.id == other.id and _arrays_equal(self, other, self._ARRAYS)


def validate_particle(id, epochs, a, lam, varpi, Omega) -> ParticleRecord:
    """Check raw series against the record invariants and normalize angles.

    Raises :class:`ValidationError` naming the first offending field/index.
    """
    if not isinstance(id, str) or not id:
        raise ValidationError("id must be a non-empty string", field="id")
    raw = {"epochs": epochs, "a": a, "lambda": lam, "varpi": varpi, "Omega": Omega}
    lengths = {}
    for name, values in raw.items():
        try:
            lengths[name] = len(values)
        except TypeError as exc:
            raise ValidationError(f"{name} is not a sequence", field=name) from exc
    if len(set(lengths.values())) != 1:
        detail = ", ".join(f"{k}={v}" for k, v in lengths.items())
        odd = next(k for k, v in lengths.items() if v != lengths["epochs"])
        raise ValidationError(f"series length mismatch ({detail})", field=odd)
    if lengths["epochs"] < 2:
        raise ValidationError("series need at least 2 samples", field="epochs")

    ep = _frozen(epochs, "epochs")
    _check_increasing(ep, "epochs")
    sma = _frozen(a, "a")
    bad = np.flatnonzero(sma <= 0)
    if bad.size:
        i = int(bad[0])
        raise ValidationError(f"a[{i}] non-positive", field="a", index=i)
    return ParticleRecord(
        id=id,
        epochs=ep,
        a=sma,
        lam=_frozen_angles(lam, "lambda"),
        varpi=_frozen_angles(varpi, "varpi"),
        Omega=_frozen_angles(Omega, "Omega"),
    )


@dataclass(frozen=True, eq=False)
class PlanetEphemeris:
    """Angles of the perturbing planet on the particles' epochs."""

    epochs: np.ndarray
    lam_N: np.ndarray
    varpi_N: np.ndarray
    Omega_N: np.ndarray

    _ARRAYS = ("epochs", "lam_N", "varpi_N", "Omega_N")

    def __len__(self) -> int:
        return len(self.epochs)

    def __eq__(self, other):
        if not isinstance(other, PlanetEphemeris):
            return NotImplemented
        return _arrays_equal(self, other, self._ARRAYS)

    def check_matches(self, particle: ParticleRecord) -> None:
        if len(particle) != len(self):
            raise InvalidInputError(
                f"particle {particle.id} has {len(particle)} epochs, ephemeris has {len(self)}")
        off = np.abs(particle.epochs - self.epochs)
        if off.max() > EPOCH_TOLERANCE_DAYS:
            i = int(off.argmax())
            raise InvalidInputError(
                f"particle {particle.id} epoch[{i}] differs from ephemeris by {off[i]:g} days")


def validate_ephemeris(epochs, lam_N, varpi_N, Omega_N) -> PlanetEphemeris:
    raw = {"epochs": epochs, "lambda_N": lam_N, "varpi_N": varpi_N, "Omega_N": Omega_N}
    lengths = {k: len(v) for k, v in raw.items()}
    if len(set(lengths.values())) != 1:
        odd = next(k for k, v in lengths.items() if v != lengths["epochs"])
        raise ValidationError(f"ephemeris series length mismatch {lengths}", field=odd)
    if lengths["epochs"] < 2:
        raise ValidationError("ephemeris needs at least 2 samples", field="epochs")
    ep = _frozen(epochs, "epochs")
    _check_increasing(ep, "epochs")
    return PlanetEphemeris(
        epochs=ep,
        lam_N=_frozen_angles(lam_N, "lambda_N"),
        varpi_N=_frozen_angles(varpi_N, "varpi_N"),
        Omega_N=_frozen_angles(Omega_N, "Omega_N"),
    )


@dataclass
class SearchConfig:
    pmax: int = 30
    prefix_depth: int = 2
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)
    gap_threshold_deg: float = 30.0
    window_count: int = 4
    min_window_samples: int = 32
    consistency_rel_range: float = 0.1
    seed: int = 0
    # bin screen in front of the exact gap test; verdicts are identical either way
    prescreen: bool = True

    def __post_init__(self):
        if not 1 <= self.pmax <= 200:
            raise InvalidInputError(f"pmax must be in [1, 200], got {self.pmax}")
        if self.prefix_depth not in range(1, 6):
            raise InvalidInputError(f"prefix_depth must be in 1..5, got {self.prefix_depth}")
        if self.workers < 1:
            raise InvalidInputError("workers must be positive")
        if not 0.0 < self.gap_threshold_deg < 360.0:
            raise InvalidInputError("gap_threshold_deg must be in (0, 360)")
        if self.window_count < 1 or self.min_window_samples < 1:
            raise InvalidInputError("window_count and min_window_samples must be positive")
        if not self.consistency_rel_range > 0.0:
            raise InvalidInputError("consistency_rel_range must be positive")
        if not 0 <= self.seed < 2**64:
            raise InvalidInputError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class ResonanceFinding:
    tuple: ResonanceTuple
    center_deg: float
    amplitude_deg: float

    def __post_init__(self):
        self.tuple.checked()
        if not 0.0 <= self.amplitude_deg <= 180.0:
            raise InvalidInputError(f"amplitude {self.amplitude_deg} outside [0, 180]")


@dataclass(frozen=True)
class Classification:
    kind: str
    finding: Optional[ResonanceFinding] = None

    def __post_init__(self):
        if self.kind not in CLASSIFICATION_KINDS:
            raise InvalidInputError(f"unknown classification {self.kind!r}")
        if (self.kind == RESONANT) != (self.finding is not None):
            raise InvalidInputError("only a resonant classification carries a finding")

    @classmethod
    def rejected(cls) -> "Classification":
        return cls(REJECTED)

    @classmethod
    def non_resonant(cls) -> "Classification":
        return cls(NON_RESONANT)

    @classmethod
    def resonant(cls, finding: ResonanceFinding) -> "Classification":
        return cls(RESONANT, finding)

    @property
    def is_resonant(self) -> bool:
        return self.kind == RESONANT


@dataclass(frozen=True)
class ResultRow:
    id: str
    classification: Optional[Classification]
    elapsed_ns: int
    error: Optional[str] = None

    @property
    def label(self) -> str:
        return ERROR if self.classification is None else self.classification.kind


# -- particle / ephemeris files ------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _json_array(values) -> str:
    return "[" + ",".join(_fmt(v) for v in values) + "]"


def particle_to_line(p: ParticleRecord) -> str:
    return (
        "{" + f"\"id\":{json.dumps(p.id)},"
        f"\"epochs\":{_json_array(p.epochs)},\"a\":{_json_array(p.a)},"
        f"\"lambda\":{_json_array(p.lam)},\"varpi\":{_json_array(p.varpi)},"
        f"\"Omega\":{_json_array(p.Omega)}" + "}"
    )


def write_particles(path, particles: Iterable[ParticleRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in particles:
            fh.write(particle_to_line(p))
            fh.write("\n")


PARTICLE_KEYS = ("id", "epochs", "a", "lambda", "varpi", "Omega")


def read_particles(path) -> list[ParticleRecord]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON ({exc.msg})", line=lineno) from exc
            if not isinstance(obj, dict):
                raise ParseError("expected a JSON object", line=lineno)
            missing = [k for k in PARTICLE_KEYS if k not in obj]
            if missing:
                raise ParseError(f"missing keys {missing}", line=lineno)
            try:
                out.append(validate_particle(obj["id"], obj["epochs"], obj["a"],
                                             obj["lambda"], obj["varpi"], obj["Omega"]))
            except ValidationError as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return out


def write_ephemeris(path, eph: PlanetEphemeris) -> None:
    text = (
        "{" + f"\"epochs\":{_json_array(eph.epochs)},\"lambda_N\":{_json_array(eph.lam_N)},"
        f"\"varpi_N\":{_json_array(eph.varpi_N)},\"Omega_N\":{_json_array(eph.Omega_N)}" + "}\n"
    )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_ephemeris(path) -> PlanetEphemeris:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"malformed JSON ({exc.msg})", line=exc.lineno) from exc
    keys = ("epochs", "lambda_N", "varpi_N", "Omega_N")
    if not isinstance(obj, dict) or any(k not in obj for k in keys):
        raise ParseError(f"ephemeris must be an object with keys {list(keys)}", line=1)
    try:
        return validate_ephemeris(*(obj[k] for k in keys))
    except ValidationError as exc:
        raise ParseError(str(exc), line=1) from exc


# -- results / labels ----------------------------------------------------------

def result_fields(row: ResultRow) -> list[str]:
    cls = row.classification
    if cls is not None and cls.is_resonant:
        f = cls.finding
        tail = [str(v) for v in f.tuple] + [repr(float(f.center_deg)), repr(float(f.amplitude_deg))]
    else:
        tail = [""] * 8
    return [row.id, row.label, *tail, str(int(row.elapsed_ns))]


def write_results_csv(path, rows: Sequence[ResultRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULTS_HEADER)
        for row in rows:
            w.writerow(result_fields(row))


def read_results_csv(path) -> list[ResultRow]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return rows
        if header != RESULTS_HEADER:
            raise ParseError(f"unexpected results header {header}", line=1)
        for lineno, rec in enumerate(reader, start=2):
            if len(rec) != len(RESULTS_HEADER):
                raise ParseError("wrong number of columns", line=lineno)
            try:
                kind = rec[1]
                elapsed = int(rec[10])
                if kind == ERROR:
                    rows.append(ResultRow(rec[0], None, elapsed, error="error"))
                    continue
                finding = None
                if kind == RESONANT:
                    t = ResonanceTuple(*(int(v) for v in rec[2:8]))
                    finding = ResonanceFinding(t, float(rec[8]), float(rec[9]))
                rows.append(ResultRow(rec[0], Classification(kind, finding), elapsed))
            except (ValueError, InvalidInputError) as exc:
                raise ParseError(str(exc), line=lineno) from exc
    return rows


def write_labels(path, labels: Sequence[tuple[str, str]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "expected"])
        w.writerows(labels)


def read_labels(path) -> dict[str, str]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        return {row["id"]: row["expected"] for row in reader}
