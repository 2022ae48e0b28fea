"""Uniform batch interface over the eight K_sat models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import classic, cpxr
from .classic import ClassicModelId
from .soil import DEFAULT_CONSTANTS, SampleArrays

CPXR_ID = "cpxr"
MODEL_IDS = tuple(m.value for m in ClassicModelId) + (CPXR_ID,)
CPXR_CITATION = "CPXR (sample dimensions)"


@dataclass(frozen=True)
class Estimator:
    id: str
    label: str
    estimate: Callable[[SampleArrays], np.ndarray]  # cm/day
    applicable: Callable[[SampleArrays], np.ndarray]  # boolean mask


def parse_model_list(selection) -> tuple:
    """'all', a comma-separated string or an iterable of ids -> ordered ids."""
    if isinstance(selection, str):
        selection = [s.strip().lower() for s in selection.split(",") if s.strip()]
    ids = []
    for s in selection:
        if s == "all":
            ids.extend(MODEL_IDS)
        elif s in MODEL_IDS:
            ids.append(s)
        else:
            raise ValueError(f"unknown model {s!r}; choose from {', '.join(MODEL_IDS)} or all")
    seen = set()
    return tuple(i for i in ids if not (i in seen or seen.add(i)))


def classic_estimator(model: ClassicModelId, constants=DEFAULT_CONSTANTS, jabro_as_printed=False):
    def estimate(a: SampleArrays):
        out = classic.estimate_arrays(
            model, a.sand, a.silt, a.clay, a.bulk_density, constants, jabro_as_printed
        )
        return np.broadcast_to(np.asarray(out, dtype=float), a.sand.shape)

    def applicable(a: SampleArrays):
        return classic.applicable_mask(model, a.silt, a.clay)

    return Estimator(model.value, model.citation, estimate, applicable)


def cpxr_estimator(model=None, constants=DEFAULT_CONSTANTS, weighting=None, avg_space="log"):
    model = cpxr.default_model() if model is None else model

    def estimate(a: SampleArrays):
        values, _ = cpxr.predict_log_batch(model, a.features(constants), weighting, avg_space)
        return 10.0**values

    def applicable(a: SampleArrays):
        return np.isfinite(a.height) & np.isfinite(a.diameter)

    return Estimator(CPXR_ID, CPXR_CITATION, estimate, applicable)


def build_estimators(
    ids="all",
    *,
    constants=DEFAULT_CONSTANTS,
    cpxr_model=None,
    weighting=None,
    avg_space="log",
    jabro_as_printed=False,
):
    out = []
    for mid in parse_model_list(ids):
        if mid == CPXR_ID:
            out.append(cpxr_estimator(cpxr_model, constants, weighting, avg_space))
        else:
            out.append(classic_estimator(ClassicModelId(mid), constants, jabro_as_printed))
    return out
