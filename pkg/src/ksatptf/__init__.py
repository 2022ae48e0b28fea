"""Saturated hydraulic conductivity pedotransfer functions and their evaluation."""

from .classic import ClassicModelId, estimate_classic, is_applicable
from .cpxr import CpxrModel, default_model, load_bundle, predict_ksat, predict_log
from .soil import (
    DEFAULT_CONSTANTS,
    FeatureVector,
    PhysicalConstants,
    SoilSample,
    TextureClass,
    classify_texture,
    compute_porosity,
    derive_particle_stats,
    validate_sample,
)

__version__ = "0.1.0"

__all__ = [
    "ClassicModelId",
    "CpxrModel",
    "DEFAULT_CONSTANTS",
    "FeatureVector",
    "PhysicalConstants",
    "SoilSample",
    "TextureClass",
    "classify_texture",
    "compute_porosity",
    "default_model",
    "derive_particle_stats",
    "estimate_classic",
    "is_applicable",
    "load_bundle",
    "predict_ksat",
    "predict_log",
    "validate_sample",
]
