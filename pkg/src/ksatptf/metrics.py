"""Log-space error metrics, per-texture-class model reports and dataset
summary statistics.

All sums go through math.fsum (exactly rounded), so results do not depend
on the order of the pairs or on how a dataset was partitioned.
"""

from __future__ import annotations

import math
import statistics
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyDataset, EmptyGroup, EmptySeries, MissingMeasurement, NonPositiveValue
from .soil import TEXTURE_CLASSES, SampleArrays, classify_texture_array

OVERALL = "Overall"
COLUMNS = tuple(c.value for c in TEXTURE_CLASSES) + (OVERALL,)
BEST_TIE_TOL = 1e-12


@dataclass(frozen=True)
class PairedSeries:
    estimated: np.ndarray  # cm/day
    measured: np.ndarray  # cm/day

    def __post_init__(self):
        est = np.asarray(self.estimated, dtype=float).ravel()
        meas = np.asarray(self.measured, dtype=float).ravel()
        if est.shape != meas.shape:
            raise ValueError(f"length mismatch: {est.size} estimated vs {meas.size} measured")
        if est.size == 0:
            raise EmptySeries("series has no pairs")
        for name, arr in (("estimated", est), ("measured", meas)):
            bad = ~(arr > 0) | ~np.isfinite(arr)
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise NonPositiveValue(f"{name}[{i}]={arr[i]} is not a positive finite value")
        object.__setattr__(self, "estimated", est)
        object.__setattr__(self, "measured", meas)

    @property
    def n(self):
        return self.estimated.size

    def log_errors(self):
        return np.log10(self.estimated) - np.log10(self.measured)


def _mean(r):
    return math.fsum(r) / r.size


def _root_mean_square(r):
    return math.sqrt(math.fsum(r * r) / r.size)


def mle(series: PairedSeries) -> float:
    """Mean log10 error; negative means underestimation."""
    return _mean(series.log_errors())


def rmsle(series: PairedSeries) -> float:
    """Root mean square log10 error."""
    return _root_mean_square(series.log_errors())


@dataclass(frozen=True)
class Cell:
    n: int
    mle: float | None
    rmsle: float | None
    best: bool = False


@dataclass
class ModelPairs:
    """Per-sample results for one model, in input order, applicable rows only."""

    row_index: np.ndarray
    class_index: np.ndarray
    log_measured: np.ndarray
    log_estimated: np.ndarray
    n_invalid: int = 0  # applicable rows whose estimate was non-positive or non-finite


@dataclass
class EvalReport:
    models: tuple  # model ids in report order
    labels: dict
    cells: dict  # (model id, column) -> Cell
    pairs: dict = field(default_factory=dict)  # model id -> ModelPairs
    n_samples: int = 0

    def cell(self, model, column):
        if not isinstance(column, str):
            column = column.value
        return self.cells[(model, column)]

    def best_models(self, column):
        return [m for m in self.models if self.cells[(m, column)].best]


def _series_cell(log_est, log_meas):
    n = int(log_est.size)
    if n == 0:
        return Cell(0, None, None)
    r = log_est - log_meas
    return Cell(n, _mean(r), _root_mean_square(r))


def per_class_report(samples, estimators) -> EvalReport:
    """Evaluate each estimator per USDA texture class and overall.

    Rows a model cannot handle (zero silt/clay for Jabro, missing sample
    dimensions for the pattern model) are left out of that model's counts
    only; every other model keeps them.
    """
    arrays = samples if isinstance(samples, SampleArrays) else SampleArrays.from_samples(samples)
    if len(arrays) == 0:
        raise EmptyDataset("no samples to evaluate")
    meas = arrays.ksat
    bad = ~(meas > 0) | ~np.isfinite(meas)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise MissingMeasurement(
            f"sample {i} has no positive measured K_sat", "ksat_measured", float(meas[i])
        )
    classes = classify_texture_array(arrays.sand, arrays.silt, arrays.clay)
    log_meas_all = np.log10(meas)

    cells = {}
    pairs = {}
    for est in estimators:
        mask = np.asarray(est.applicable(arrays), dtype=bool)
        rows = np.flatnonzero(mask)
        values = np.asarray(est.estimate(arrays.take(mask)), dtype=float)
        ok = (values > 0) & np.isfinite(values)
        rows, values = rows[ok], values[ok]
        with np.errstate(divide="ignore"):
            log_est = np.log10(values)
        mp = ModelPairs(rows, classes[rows], log_meas_all[rows], log_est, int((~ok).sum()))
        pairs[est.id] = mp
        for ci, col in enumerate(COLUMNS[:-1]):
            sel = mp.class_index == ci
            cells[(est.id, col)] = _series_cell(mp.log_estimated[sel], mp.log_measured[sel])
        cells[(est.id, OVERALL)] = _series_cell(mp.log_estimated, mp.log_measured)

    ids = tuple(e.id for e in estimators)
    for col in COLUMNS:
        scored = [cells[(m, col)].rmsle for m in ids if cells[(m, col)].n > 0]
        if not scored:
            continue
        best = min(scored)
        for m in ids:
            c = cells[(m, col)]
            if c.n > 0 and c.rmsle - best <= BEST_TIE_TOL:
                cells[(m, col)] = Cell(c.n, c.mle, c.rmsle, True)
    return EvalReport(ids, {e.id: e.label for e in estimators}, cells, pairs, len(arrays))


SUMMARY_FIELDS = (
    "bulk_density",
    "sand_pct",
    "silt_pct",
    "clay_pct",
    "height",
    "diameter",
    "ksat_measured",
)


@dataclass(frozen=True)
class GroupStats:
    n: int
    mean: dict
    sd: dict
    singleton: bool


def summary_stats(samples, group_key="source"):
    """Mean and sample standard deviation (n - 1) of each field per group.

    Groups keep first-seen order.  A singleton group reports sd 0 and sets
    ``singleton``.  Fields absent from every sample of a group give None.
    """
    samples = list(samples)
    if not samples:
        raise EmptyGroup("no samples to summarize")
    key = group_key if callable(group_key) else (lambda s: getattr(s, group_key))
    groups = OrderedDict()
    for s in samples:
        groups.setdefault(key(s), []).append(s)

    out = OrderedDict()
    for name, members in groups.items():
        mean, sd = {}, {}
        for f in SUMMARY_FIELDS:
            values = [getattr(s, f) for s in members if getattr(s, f) is not None]
            if not values:
                mean[f] = sd[f] = None
                continue
            mean[f] = math.fsum(values) / len(values)
            sd[f] = statistics.stdev(values, mean[f]) if len(values) > 1 else 0.0
        out[name] = GroupStats(len(members), mean, sd, len(members) == 1)
    return out
