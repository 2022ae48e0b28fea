"""CSV ingestion, per-model applicability filtering and the synthetic corpus.

CSV schema (UTF-8, comma separated, header required)::

    id,source,method,bulk_density_g_cm3,sand_pct,silt_pct,clay_pct,
    sample_height_cm,sample_diameter_cm,ksat_cm_per_day

``ksat_cm_per_day`` may be omitted in estimation mode.  Empty height,
diameter or ksat cells mean "not measured".
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass

from .classic import ClassicModelId
from .errors import FileError, HeaderMismatch, ValidationError
from .estimators import CPXR_ID
from .soil import DEFAULT_CONSTANTS, DEFAULT_TOLERANCE, SoilSample, validate_sample

COLUMNS = (
    "id",
    "source",
    "method",
    "bulk_density_g_cm3",
    "sand_pct",
    "silt_pct",
    "clay_pct",
    "sample_height_cm",
    "sample_diameter_cm",
    "ksat_cm_per_day",
)
KSAT_COLUMN = "ksat_cm_per_day"

ESTIMATE = "estimate"
EVALUATE = "evaluate"


@dataclass(frozen=True)
class Rejection:
    row: int  # 1-based data row (file line = row + 1)
    reason: str
    message: str


@dataclass
class IngestResult:
    accepted: list
    rejected: list
    path: str
    total_rows: int

    def __post_init__(self):
        assert len(self.accepted) + len(self.rejected) == self.total_rows


class _RowError(Exception):
    def __init__(self, reason, message):
        super().__init__(message)
        self.reason = reason


def _parse_number(text, column, optional):
    text = text.strip()
    if text == "":
        if optional:
            return None
        raise _RowError("ParseError", f"{column} is empty")
    try:
        value = float(text)
    except ValueError:
        raise _RowError("ParseError", f"{column}={text!r} is not a number") from None
    if not math.isfinite(value):
        raise _RowError("ParseError", f"{column}={text!r} is not finite")
    return value


def parse_row(record: dict, mode: str = EVALUATE) -> SoilSample:
    """Build an unvalidated SoilSample from one CSV record."""
    ksat = None
    if KSAT_COLUMN in record:
        ksat = _parse_number(record[KSAT_COLUMN], KSAT_COLUMN, optional=True)
    if mode == EVALUATE and ksat is None:
        raise _RowError("MissingMeasurement", f"{KSAT_COLUMN} is required for evaluation")
    return SoilSample(
        id=record["id"],
        source=record["source"],
        method=record["method"],
        bulk_density=_parse_number(record["bulk_density_g_cm3"], "bulk_density_g_cm3", False),
        sand_pct=_parse_number(record["sand_pct"], "sand_pct", False),
        silt_pct=_parse_number(record["silt_pct"], "silt_pct", False),
        clay_pct=_parse_number(record["clay_pct"], "clay_pct", False),
        height=_parse_number(record["sample_height_cm"], "sample_height_cm", True),
        diameter=_parse_number(record["sample_diameter_cm"], "sample_diameter_cm", True),
        ksat_measured=ksat,
    )


def check_header(header, mode=EVALUATE, ignore_extra=False):
    required = [c for c in COLUMNS if not (c == KSAT_COLUMN and mode == ESTIMATE)]
    missing = [c for c in required if c not in header]
    unknown = [] if ignore_extra else [c for c in header if c not in COLUMNS]
    if missing or unknown:
        raise HeaderMismatch(missing, unknown)
    dupes = sorted({c for c in header if header.count(c) > 1})
    if dupes:
        raise HeaderMismatch(unknown=[f"{c} (duplicated)" for c in dupes])


def ingest_csv(
    path,
    mode: str = EVALUATE,
    tolerance: float = DEFAULT_TOLERANCE,
    renormalize: bool = False,
    ignore_extra: bool = False,
    constants=DEFAULT_CONSTANTS,
) -> IngestResult:
    """Read and validate a sample CSV.  Bad rows are collected, never dropped."""
    if mode not in (ESTIMATE, EVALUATE):
        raise ValueError(f"mode must be {ESTIMATE!r} or {EVALUATE!r}")
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise FileError(f"cannot read {path}: {exc.strerror}") from exc
    accepted, rejected = [], []
    total = 0
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise HeaderMismatch(missing=COLUMNS) from None
        check_header(header, mode, ignore_extra)
        for row_number, cells in enumerate(reader, start=1):
            if not cells or all(not c.strip() for c in cells):
                continue
            total += 1
            if len(cells) != len(header):
                rejected.append(
                    Rejection(row_number, "ParseError", f"expected {len(header)} fields, got {len(cells)}")
                )
                continue
            try:
                sample = parse_row(dict(zip(header, cells)), mode)
                accepted.append(validate_sample(sample, tolerance, renormalize, constants))
            except _RowError as exc:
                rejected.append(Rejection(row_number, exc.reason, str(exc)))
            except ValidationError as exc:
                rejected.append(Rejection(row_number, exc.reason, str(exc)))
    return IngestResult(accepted, rejected, os.fspath(path), total)


def _fmt(value):
    return "" if value is None else repr(float(value))


def write_csv(samples, path_or_file):
    """Write samples in the ingest schema with round-trip float formatting."""

    def _write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for s in samples:
            w.writerow(
                [
                    s.id,
                    s.source,
                    s.method,
                    _fmt(s.bulk_density),
                    _fmt(s.sand_pct),
                    _fmt(s.silt_pct),
                    _fmt(s.clay_pct),
                    _fmt(s.height),
                    _fmt(s.diameter),
                    _fmt(s.ksat_measured),
                ]
            )

    if hasattr(path_or_file, "write"):
        _write(path_or_file)
    else:
        with open(path_or_file, "w", newline="", encoding="utf-8") as fh:
            _write(fh)


# -- applicability ------------------------------------------------------------

ZERO_SILT = "ZeroSilt"
ZERO_CLAY = "ZeroClay"
MISSING_DIMENSION = "MissingDimension"


@dataclass(frozen=True)
class Exclusion:
    sample: SoilSample
    reason: str


def exclusion_reason(sample: SoilSample, model) -> str | None:
    mid = model.value if isinstance(model, ClassicModelId) else str(model)
    if mid == ClassicModelId.JABRO92.value:
        if sample.silt_pct <= 0:
            return ZERO_SILT
        if sample.clay_pct <= 0:
            return ZERO_CLAY
    elif mid == CPXR_ID:
        if sample.height is None or sample.diameter is None:
            return MISSING_DIMENSION
    return None


def filter_applicable(samples, model):
    """Split samples into (kept, excluded) for ``model`` (a ClassicModelId or 'cpxr')."""
    kept, excluded = [], []
    for s in samples:
        reason = exclusion_reason(s, model)
        if reason is None:
            kept.append(s)
        else:
            excluded.append(Exclusion(s, reason))
    return kept, excluded


# -- synthetic corpus ---------------------------------------------------------

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 (Steele, Lea and Flood 2014).

    state += 0x9E3779B97F4A7C15; z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    output z ^ (z >> 31)          (all arithmetic mod 2**64)

    ``uniform()`` maps the top 53 bits to [0, 1).
    """

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 42
    count: int = 10_000
    bulk_density: tuple = (1.0, 1.8)  # g/cm3
    height: tuple = (2.0, 60.0)  # cm
    diameter: tuple = (2.5, 12.5)  # cm
    log10_ksat: tuple = (-2.0, 6.0)  # log10 cm/day
    zero_fines_fraction: float = 0.01
    source: str = "synthetic"

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        for name in ("bulk_density", "height", "diameter", "log10_ksat"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name} range ({lo}, {hi}) is degenerate")
        lo, hi = self.bulk_density
        if lo <= 0 or hi >= DEFAULT_CONSTANTS.particle_density:
            raise ValueError("bulk_density range must lie inside (0, 2.65)")
        if self.height[0] <= 0 or self.diameter[0] <= 0:
            raise ValueError("dimension ranges must be positive")
        if not 0.0 <= self.zero_fines_fraction <= 1.0:
            raise ValueError("zero_fines_fraction must be in [0, 1]")


_GRID = 10_000  # texture resolution: 0.01 percent


def generate_synthetic(config: SynthConfig = SynthConfig()):
    """Deterministic synthetic corpus.

    Each sample consumes exactly eight uniforms from SplitMix64(seed), in
    order: two texture cuts, zero-fines trigger, zero-fines side, bulk
    density, height, diameter, log10 K_sat.  Texture is uniform over the
    simplex on a 0.01 % grid: cuts a <= b in {0..10000} give sand = a,
    silt = b - a, clay = 10000 - b hundredths.  When triggered, silt (side
    < 0.5) or clay is moved into sand.  Bulk density is rounded to 0.001,
    dimensions to 0.01 cm; K_sat is 10**u over the configured log10 range.
    """
    rng = SplitMix64(config.seed)
    out = []
    width = max(6, len(str(config.count)))

    def scaled(u, rng_):
        lo, hi = rng_
        return lo + (hi - lo) * u

    for i in range(config.count):
        u = [rng.uniform() for _ in range(8)]
        a, b = sorted((int(u[0] * (_GRID + 1)), int(u[1] * (_GRID + 1))))
        sand, silt, clay = a, b - a, _GRID - b
        if u[2] < config.zero_fines_fraction:
            if u[3] < 0.5:
                sand, silt = sand + silt, 0
            else:
                sand, clay = sand + clay, 0
        out.append(
            SoilSample(
                id=f"syn-{i:0{width}d}",
                source=config.source,
                method="synthetic",
                sand_pct=sand / 100,
                silt_pct=silt / 100,
                clay_pct=clay / 100,
                bulk_density=round(scaled(u[4], config.bulk_density), 3),
                height=round(scaled(u[5], config.height), 2),
                diameter=round(scaled(u[6], config.diameter), 2),
                ksat_measured=10.0 ** scaled(u[7], config.log10_ksat),
            )
        )
    return out
