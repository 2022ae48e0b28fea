"""Soil sample records, validation, derived particle-size features and
USDA texture classification.

Most functions here accept either Python floats or numpy arrays so the same
arithmetic backs single-sample estimates and whole-dataset evaluation.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    MissingFeature,
    NonPositiveField,
    NonphysicalDensity,
    PercentOutOfRange,
    TextureSumViolation,
)

DEFAULT_TOLERANCE = 0.5
# a renormalized triple is left alone on re-application
_RENORM_EPS = 1e-9


@dataclass(frozen=True)
class PhysicalConstants:
    particle_density: float = 2.65  # g/cm3
    # representative particle diameters (mm) of the three USDA fractions
    d_clay: float = 0.001
    d_silt: float = 0.026
    d_sand: float = 1.025


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True)
class SoilSample:
    """One soil core record.

    Percentages are by mass, bulk density in g/cm3, ``height`` (sample
    length L) and ``diameter`` (internal diameter ID) in cm, conductivity in
    cm/day.  Dimensions and measured K_sat may be absent.
    """

    id: str
    sand_pct: float
    silt_pct: float
    clay_pct: float
    bulk_density: float
    height: Optional[float] = None
    diameter: Optional[float] = None
    ksat_measured: Optional[float] = None
    source: str = ""
    method: str = ""

    @property
    def texture(self):
        return self.sand_pct, self.silt_pct, self.clay_pct


class TextureClass(enum.Enum):
    SAND = "Sa"
    LOAMY_SAND = "LSa"
    SANDY_LOAM = "SaL"
    LOAM = "L"
    SILT_LOAM = "SiL"
    SILT = "Si"
    SANDY_CLAY_LOAM = "SaCL"
    CLAY_LOAM = "CL"
    SILTY_CLAY_LOAM = "SiCL"
    SANDY_CLAY = "SaC"
    SILTY_CLAY = "SiC"
    CLAY = "C"

    @property
    def label(self):
        return self.name.replace("_", " ").capitalize()


# Index order used by the array classifier and by report columns.
TEXTURE_CLASSES = tuple(TextureClass)


def validate_sample(
    raw: SoilSample,
    tolerance: float = DEFAULT_TOLERANCE,
    renormalize: bool = False,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
) -> SoilSample:
    """Check every SoilSample invariant and return the (possibly renormalized) sample.

    The texture-sum check runs before renormalization, so renormalizing only
    absorbs deviations already within ``tolerance``.  Bulk density must also
    stay below the particle density.
    """
    for name in ("sand_pct", "silt_pct", "clay_pct"):
        value = getattr(raw, name)
        if not 0.0 <= value <= 100.0:
            raise PercentOutOfRange(f"{name}={value} outside [0, 100]", name, value)
    total = raw.sand_pct + raw.silt_pct + raw.clay_pct
    if abs(total - 100.0) > tolerance:
        raise TextureSumViolation(
            f"sand+silt+clay={total:g} deviates from 100 by more than {tolerance:g}",
            "texture_sum",
            total,
        )
    for name in ("bulk_density", "height", "diameter", "ksat_measured"):
        value = getattr(raw, name)
        if name == "bulk_density" or value is not None:
            if not value > 0.0:
                raise NonPositiveField(f"{name}={value} must be > 0", name, value)
    if not raw.bulk_density < constants.particle_density:
        raise NonphysicalDensity(
            f"bulk_density={raw.bulk_density} not below particle density "
            f"{constants.particle_density}",
            "bulk_density",
            raw.bulk_density,
        )

    if renormalize and abs(total - 100.0) > _RENORM_EPS:
        scale = 100.0 / total
        return dataclasses.replace(
            raw,
            sand_pct=raw.sand_pct * scale,
            silt_pct=raw.silt_pct * scale,
            clay_pct=raw.clay_pct * scale,
        )
    return raw


def compute_porosity(bulk_density, constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Total porosity 1 - rho_b / rho_s.

    Densities outside (0, rho_s) raise NonphysicalDensity rather than being
    clamped.
    """
    rho_s = constants.particle_density
    bd = np.asarray(bulk_density, dtype=float)
    bad = ~((bd > 0.0) & (bd < rho_s))
    if np.any(bad):
        value = bd[bad].flat[0] if bd.ndim else float(bd)
        raise NonphysicalDensity(
            f"bulk density {value} g/cm3 not in (0, {rho_s})", "bulk_density", float(value)
        )
    phi = 1.0 - bd / rho_s
    return float(phi) if np.ndim(bulk_density) == 0 else phi


def derive_particle_stats(sand, silt, clay, constants: PhysicalConstants = DEFAULT_CONSTANTS):
    """Geometric mean diameter d_g (mm) and geometric standard deviation sigma_g.

    Three-fraction log-normal summary: with mass fractions f_i and
    representative diameters M_i, ln d_g = sum f_i ln M_i and
    ln sigma_g = sqrt(sum f_i (ln M_i - ln d_g)^2).  d_g is formed as the
    product of M_i ** f_i so single-component textures give M_i exactly.
    """
    scalar = np.ndim(sand) == 0 and np.ndim(silt) == 0 and np.ndim(clay) == 0
    fractions = (
        np.asarray(sand, dtype=float) / 100.0,
        np.asarray(silt, dtype=float) / 100.0,
        np.asarray(clay, dtype=float) / 100.0,
    )
    diameters = (constants.d_sand, constants.d_silt, constants.d_clay)
    logs = [np.log(m) for m in diameters]

    d_g = np.power(diameters[0], fractions[0])
    ln_dg = fractions[0] * logs[0]
    for f, m, lm in zip(fractions[1:], diameters[1:], logs[1:]):
        d_g = d_g * np.power(m, f)
        ln_dg = ln_dg + f * lm
    var = 0.0
    for f, lm in zip(fractions, logs):
        var = var + f * (lm - ln_dg) ** 2
    sigma_g = np.exp(np.sqrt(var))
    if scalar:
        return float(d_g), float(sigma_g)
    return d_g, sigma_g


# Ordered USDA class rules, evaluated first-match.  Each predicate works on
# floats and on numpy arrays (bitwise & on booleans).
_TEXTURE_RULES = (
    (TextureClass.SAND, lambda sa, si, cl: (sa >= 85) & (si + 1.5 * cl < 15)),
    (TextureClass.LOAMY_SAND, lambda sa, si, cl: (si + 1.5 * cl >= 15) & (si + 2 * cl < 30)),
    (TextureClass.SANDY_LOAM, lambda sa, si, cl: (
        ((cl >= 7) & (cl < 20) & (sa > 52) & (si + 2 * cl >= 30))
        | ((cl < 7) & (si < 50) & (si + 2 * cl >= 30))
    )),
    (TextureClass.LOAM, lambda sa, si, cl: (
        (cl >= 7) & (cl < 27) & (si >= 28) & (si < 50) & (sa <= 52)
    )),
    (TextureClass.SILT_LOAM, lambda sa, si, cl: (
        ((si >= 50) & (cl >= 12) & (cl < 27)) | ((si >= 50) & (si < 80) & (cl < 12))
    )),
    (TextureClass.SILT, lambda sa, si, cl: (si >= 80) & (cl < 12)),
    (TextureClass.SANDY_CLAY_LOAM, lambda sa, si, cl: (
        (cl >= 20) & (cl < 35) & (si < 28) & (sa > 45)
    )),
    (TextureClass.CLAY_LOAM, lambda sa, si, cl: (cl >= 27) & (cl < 40) & (sa > 20) & (sa <= 45)),
    (TextureClass.SILTY_CLAY_LOAM, lambda sa, si, cl: (cl >= 27) & (cl < 40) & (sa <= 20)),
    (TextureClass.SANDY_CLAY, lambda sa, si, cl: (cl >= 35) & (sa > 45)),
    (TextureClass.SILTY_CLAY, lambda sa, si, cl: (cl >= 40) & (si >= 40)),
    (TextureClass.CLAY, lambda sa, si, cl: (cl >= 40) & (sa <= 45) & (si < 40)),
)


def _on_simplex(sand, silt, clay):
    # decimal triples like 12.34/50.5/37.16 may sum to 100 +- 1 ulp; leave those as is
    total = sand + silt + clay
    off = np.abs(total - 100.0) > _RENORM_EPS
    if np.ndim(total) == 0:
        if not off or total == 0.0:
            return sand, silt, clay
        s = 100.0 / total
        return sand * s, silt * s, clay * s
    s = np.where(off & (total > 0), 100.0 / np.where(total > 0, total, 1.0), 1.0)
    return sand * s, silt * s, clay * s


def classify_texture(sand, silt, clay) -> TextureClass:
    """USDA texture class of one triple.

    Triples within tolerance of 100 are first scaled onto the simplex so the
    rule list stays total.
    """
    sa, si, cl = _on_simplex(float(sand), float(silt), float(clay))
    for cls, rule in _TEXTURE_RULES:
        if rule(sa, si, cl):
            return cls
    raise AssertionError(f"unclassifiable texture ({sand}, {silt}, {clay})")


def classify_texture_array(sand, silt, clay) -> np.ndarray:
    """Vectorized classifier returning indices into TEXTURE_CLASSES."""
    sa, si, cl = _on_simplex(
        np.asarray(sand, dtype=float), np.asarray(silt, dtype=float), np.asarray(clay, dtype=float)
    )
    index = {c: i for i, c in enumerate(TEXTURE_CLASSES)}
    out = np.select(
        [rule(sa, si, cl) for _, rule in _TEXTURE_RULES],
        [index[c] for c, _ in _TEXTURE_RULES],
        default=-1,
    )
    if np.any(out < 0):
        raise AssertionError("unclassifiable texture in batch")
    return out


@dataclass(frozen=True)
class FeatureVector:
    """Predictors of the pattern-ensemble model (d_g in mm, sigma_g unitless)."""

    sand: float
    silt: float
    clay: float
    d_g: float
    sigma_g: float
    bulk_density: float
    diameter: float
    height: float

    @classmethod
    def from_sample(cls, sample: SoilSample, constants: PhysicalConstants = DEFAULT_CONSTANTS):
        if sample.diameter is None:
            raise MissingFeature("diameter")
        if sample.height is None:
            raise MissingFeature("height")
        d_g, sigma_g = derive_particle_stats(
            sample.sand_pct, sample.silt_pct, sample.clay_pct, constants
        )
        return cls(
            sand=sample.sand_pct,
            silt=sample.silt_pct,
            clay=sample.clay_pct,
            d_g=d_g,
            sigma_g=sigma_g,
            bulk_density=sample.bulk_density,
            diameter=sample.diameter,
            height=sample.height,
        )

    def as_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class SampleArrays:
    """Column view of a dataset; missing optional values are NaN."""

    sand: np.ndarray
    silt: np.ndarray
    clay: np.ndarray
    bulk_density: np.ndarray
    height: np.ndarray
    diameter: np.ndarray
    ksat: np.ndarray

    def __len__(self):
        return len(self.sand)

    @classmethod
    def from_samples(cls, samples):
        def col(attr):
            return np.array(
                [np.nan if getattr(s, attr) is None else getattr(s, attr) for s in samples],
                dtype=float,
            )

        return cls(
            sand=col("sand_pct"),
            silt=col("silt_pct"),
            clay=col("clay_pct"),
            bulk_density=col("bulk_density"),
            height=col("height"),
            diameter=col("diameter"),
            ksat=col("ksat_measured"),
        )

    def take(self, mask):
        return SampleArrays(*(getattr(self, f.name)[mask] for f in dataclasses.fields(self)))

    def features(self, constants: PhysicalConstants = DEFAULT_CONSTANTS):
        """Feature columns keyed like FeatureVector fields."""
        d_g, sigma_g = derive_particle_stats(self.sand, self.silt, self.clay, constants)
        return {
            "sand": self.sand,
            "silt": self.silt,
            "clay": self.clay,
            "d_g": d_g,
            "sigma_g": sigma_g,
            "bulk_density": self.bulk_density,
            "diameter": self.diameter,
            "height": self.height,
        }


def ternary_xy(sand, silt, clay):
    """Cartesian position on the texture triangle (sand at the origin, silt at
    (100, 0), clay at the apex)."""
    return silt + clay / 2.0, clay * (3.0**0.5 / 2.0)
