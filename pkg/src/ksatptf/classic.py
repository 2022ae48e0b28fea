"""Seven closed-form K_sat pedotransfer functions (cm/day).

Texture in percent, bulk density in g/cm3.  ``log`` in the published forms
is base 10.  Formula functions take floats or numpy arrays.
"""

from __future__ import annotations

import enum

import numpy as np

from .errors import NotApplicable
from .soil import DEFAULT_CONSTANTS, PhysicalConstants, SoilSample, compute_porosity


class ClassicModelId(enum.Enum):
    BRAKENSIEK84 = "brakensiek84"
    CAMPBELL_SHIOZAWA94 = "campbellshiozawa94"
    COSBY84 = "cosby84"
    JABRO92 = "jabro92"
    PUCKETT85 = "puckett85"
    DANE_PUCKETT94 = "danepuckett94"
    SAXTON86 = "saxton86"

    @property
    def citation(self):
        return _CITATIONS[self]


_CITATIONS = {
    ClassicModelId.BRAKENSIEK84: "Brakensiek et al. (1984)",
    ClassicModelId.CAMPBELL_SHIOZAWA94: "Campbell and Shiozawa (1994)",
    ClassicModelId.COSBY84: "Cosby et al. (1984)",
    ClassicModelId.JABRO92: "Jabro (1992)",
    ClassicModelId.PUCKETT85: "Puckett et al. (1985)",
    ClassicModelId.DANE_PUCKETT94: "Dane and Puckett (1994)",
    ClassicModelId.SAXTON86: "Saxton et al. (1986)",
}


def brakensiek84(sand, clay, porosity):
    p, sa, cl = porosity, sand, clay
    exponent = (
        19.52348 * p
        - 8.96847
        - 0.028212 * cl
        + 0.00018107 * sa**2
        - 0.0094125 * cl**2
        - 8.395215 * p**2
        + 0.077718 * p * sa
        - 0.00298 * p**2 * sa**2
        - 0.019492 * p**2 * cl**2
        + 0.0000173 * sa**2 * cl
        + 0.02733 * p * cl**2
        + 0.001434 * p * sa**2
        - 0.0000035 * cl**2 * sa
    )
    return 24.0 * np.exp(exponent)


def campbell_shiozawa94(silt, clay):
    return 129.6 * np.exp(-0.07 * silt - 0.167 * clay)


def cosby84(sand, clay):
    return 60.96 * 10.0 ** (-0.6 + 0.0126 * sand - 0.0064 * clay)


def jabro92(silt, clay, bulk_density, as_printed=False):
    """Jabro (1992) with the bracket read as log10 of K_sat in cm/hr.

    ``as_printed=True`` returns 24 * bracket literally, which goes negative
    for ordinary soils; it exists only for auditing the transcription.
    """
    with np.errstate(divide="ignore"):
        bracket = 9.56 - 0.81 * np.log10(silt) - 1.09 * np.log10(clay) - 4.64 * bulk_density
    if as_printed:
        return 24.0 * bracket
    return 24.0 * 10.0**bracket


def puckett85(clay):
    return 376.7 * np.exp(-0.1975 * clay)


def dane_puckett94(clay):
    return 729.22 * np.exp(-0.144 * clay)


def saxton86(sand):
    # sand-only form with positive intercept, as tabulated
    return 24.0 * np.exp(12.012 - 0.0755 * sand)


def is_applicable(model: ClassicModelId, sample: SoilSample) -> bool:
    if model is ClassicModelId.JABRO92:
        return sample.silt_pct > 0 and sample.clay_pct > 0
    return True


def applicable_mask(model: ClassicModelId, silt, clay):
    silt = np.asarray(silt)
    if model is ClassicModelId.JABRO92:
        return (silt > 0) & (np.asarray(clay) > 0)
    return np.ones(silt.shape, dtype=bool)


def estimate_arrays(
    model: ClassicModelId,
    sand,
    silt,
    clay,
    bulk_density,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    jabro_as_printed: bool = False,
):
    """Evaluate ``model`` on texture/density values (no applicability check)."""
    if model is ClassicModelId.BRAKENSIEK84:
        return brakensiek84(sand, clay, compute_porosity(bulk_density, constants))
    if model is ClassicModelId.CAMPBELL_SHIOZAWA94:
        return campbell_shiozawa94(silt, clay)
    if model is ClassicModelId.COSBY84:
        return cosby84(sand, clay)
    if model is ClassicModelId.JABRO92:
        return jabro92(silt, clay, bulk_density, as_printed=jabro_as_printed)
    if model is ClassicModelId.PUCKETT85:
        return puckett85(clay)
    if model is ClassicModelId.DANE_PUCKETT94:
        return dane_puckett94(clay)
    if model is ClassicModelId.SAXTON86:
        return saxton86(sand)
    raise ValueError(f"unknown model {model!r}")


def estimate_classic(
    model: ClassicModelId,
    sample: SoilSample,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    jabro_as_printed: bool = False,
) -> float:
    """K_sat in cm/day of one validated sample."""
    if not is_applicable(model, sample):
        raise NotApplicable(
            f"{model.value} needs positive silt and clay "
            f"(silt={sample.silt_pct}, clay={sample.clay_pct})",
            "silt_pct" if sample.silt_pct <= 0 else "clay_pct",
            sample.silt_pct if sample.silt_pct <= 0 else sample.clay_pct,
        )
    # one-element arrays keep the scalar result bit-identical to the batch path
    values = [np.array([v], dtype=float) for v in (sample.sand_pct, sample.silt_pct, sample.clay_pct, sample.bulk_density)]
    return float(estimate_arrays(model, *values, constants, jabro_as_printed)[0])
