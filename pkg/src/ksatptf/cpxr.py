"""Inference for contrast-pattern-aided regression (CPXR) models.

A model is a baseline linear regressor plus an ordered list of
(pattern, local linear model) pairs.  A pattern is a conjunction of
half-open intervals ``lower <= x < upper`` on named features.  The
prediction is the weighted mean of the local models whose patterns match,
or the baseline when nothing matches.

Bundle text format (``format cpxr-bundle 1``)::

    # comment
    format cpxr-bundle 1
    features <name> <name> ...
    output <free text>
    weighting arr|uniform

    baseline
    intercept <real>
    <feature> <real>
    end

    pattern <id>
    arr <real>
    support <real>
    criteria
    <feature> <lower|-inf> <upper|+inf>
    local
    intercept <real>
    <feature> <real>
    end

Tokens are whitespace separated; blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass
from importlib import resources
from typing import NamedTuple, Optional

import numpy as np

from .errors import MissingFeature, ParseError, SchemaError
from .soil import DEFAULT_CONSTANTS, FeatureVector, PhysicalConstants, SoilSample

BUNDLE_FORMAT = "cpxr-bundle"
BUNDLE_VERSION = 1
DEFAULT_BUNDLE = "ksat_cpxr.bundle"


class Weighting(enum.Enum):
    ARR = "arr"
    UNIFORM = "uniform"


class AvgSpace(enum.Enum):
    LOG = "log"
    LINEAR = "linear"


@dataclass(frozen=True)
class Interval:
    lower: Optional[float] = None  # inclusive
    upper: Optional[float] = None  # exclusive

    def __post_init__(self):
        if self.lower is None and self.upper is None:
            raise SchemaError("interval needs at least one finite bound")
        if self.lower is not None and self.upper is not None and not self.lower < self.upper:
            raise SchemaError(f"interval lower {self.lower} must be < upper {self.upper}")

    def contains(self, x):
        """Exact half-open test; works elementwise on arrays."""
        if self.lower is None:
            return x < self.upper
        if self.upper is None:
            return x >= self.lower
        return (x >= self.lower) & (x < self.upper)

    def __str__(self):
        lo = "-inf" if self.lower is None else repr(self.lower)
        hi = "+inf" if self.upper is None else repr(self.upper)
        return f"[{lo}, {hi})"


@dataclass(frozen=True)
class Pattern:
    id: int
    criteria: tuple  # ((feature, Interval), ...)
    arr: float
    support: float


@dataclass(frozen=True)
class LinearModel:
    intercept: float
    coefficients: tuple = ()  # ((feature, coefficient), ...)


@dataclass(frozen=True)
class CpxrModel:
    feature_names: tuple
    baseline: LinearModel
    entries: tuple  # ((Pattern, LinearModel), ...)
    weighting: Weighting = Weighting.ARR
    output: str = "log10 ksat cm/day"

    @property
    def patterns(self):
        return tuple(p for p, _ in self.entries)

    def entry(self, pattern_id):
        for p, lm in self.entries:
            if p.id == pattern_id:
                return p, lm
        raise KeyError(pattern_id)


class Prediction(NamedTuple):
    value: float
    trace: tuple  # ((pattern id, weight), ...); empty when the baseline was used

    @property
    def pattern_ids(self):
        return [pid for pid, _ in self.trace]


def _get(features, name):
    if isinstance(features, FeatureVector):
        try:
            return getattr(features, name)
        except AttributeError:
            raise MissingFeature(name) from None
    try:
        return features[name]
    except KeyError:
        raise MissingFeature(name) from None


def pattern_matches(pattern: Pattern, features):
    """True iff every criterion interval contains its feature value.

    With array-valued features the result is a boolean mask.
    """
    result = True
    for name, interval in pattern.criteria:
        result = result & interval.contains(_get(features, name))
    return result


def evaluate_linear(model: LinearModel, features):
    """intercept + sum(coef * feature), summed in coefficient order."""
    acc = model.intercept
    for name, coef in model.coefficients:
        acc = acc + coef * _get(features, name)
    return acc


def _resolve(model, weighting, avg_space):
    weighting = model.weighting if weighting is None else Weighting(weighting)
    return weighting, AvgSpace(avg_space)


def predict_log(model: CpxrModel, features, weighting=None, avg_space="log") -> Prediction:
    """log10 K_sat for one feature vector, with the matched-pattern trace."""
    weighting, avg_space = _resolve(model, weighting, avg_space)
    matched = [(p, lm) for p, lm in model.entries if pattern_matches(p, features)]
    if not matched:
        return Prediction(float(evaluate_linear(model.baseline, features)), ())

    raw = [p.arr if weighting is Weighting.ARR else 1.0 for p, _ in matched]
    total = 0.0
    for r in raw:
        total += r
    if total <= 0.0:
        raw = [1.0] * len(matched)
        total = float(len(matched))
    weights = [r / total for r in raw]
    values = [float(evaluate_linear(lm, features)) for _, lm in matched]
    trace = tuple((p.id, w) for (p, _), w in zip(matched, weights))

    if len(matched) == 1:
        return Prediction(values[0], trace)
    combined = 0.0
    if avg_space is AvgSpace.LOG:
        for w, v in zip(weights, values):
            combined += w * v
        # rounding can leave the weighted sum a hair outside the hull
        combined = min(max(combined, min(values)), max(values))
    else:
        top = max(values)
        for w, v in zip(weights, values):
            combined += w * 10.0 ** (v - top)
        combined = min(max(top + math.log10(combined), min(values)), top)
    return Prediction(combined, trace)


def predict_log_batch(model: CpxrModel, features, weighting=None, avg_space="log"):
    """Vectorized predict_log over feature columns.

    Returns (values, n_matched).  Values agree bit-for-bit with predict_log
    in log space.
    """
    weighting, avg_space = _resolve(model, weighting, avg_space)
    baseline = np.asarray(evaluate_linear(model.baseline, features), dtype=float)
    shape = baseline.shape
    masks = []
    locals_ = []
    for p, lm in model.entries:
        masks.append(np.broadcast_to(pattern_matches(p, features), shape))
        locals_.append(np.broadcast_to(np.asarray(evaluate_linear(lm, features), float), shape))

    count = np.zeros(shape, dtype=int)
    total = np.zeros(shape)
    for (p, _), m in zip(model.entries, masks):
        count = count + m
        total = total + np.where(m, p.arr if weighting is Weighting.ARR else 1.0, 0.0)
    uniform = total <= 0.0
    total = np.where(uniform, count.astype(float), total)
    safe_total = np.where(count > 0, total, 1.0)

    lo = np.full(shape, np.inf)
    hi = np.full(shape, -np.inf)
    for m, v in zip(masks, locals_):
        lo = np.where(m, np.minimum(lo, v), lo)
        hi = np.where(m, np.maximum(hi, v), hi)

    hi_safe = np.where(count > 0, hi, 0.0)
    combined = np.zeros(shape)
    for (p, _), m, v in zip(model.entries, masks, locals_):
        raw = np.where(uniform, 1.0, p.arr if weighting is Weighting.ARR else 1.0)
        w = raw / safe_total
        if avg_space is AvgSpace.LOG:
            term = w * v
        else:
            term = w * 10.0 ** np.where(m, v - hi_safe, 0.0)
        combined = combined + np.where(m, term, 0.0)
    if avg_space is AvgSpace.LINEAR:
        with np.errstate(divide="ignore"):
            combined = hi + np.log10(np.where(count > 0, combined, 1.0))
    combined = np.minimum(np.maximum(combined, lo), hi)

    single = np.zeros(shape)
    for m, v in zip(masks, locals_):
        single = np.where(m & (count == 1), v, single)
    out = np.where(count == 0, baseline, np.where(count == 1, single, combined))
    return out, count


def predict_ksat(
    model: CpxrModel,
    sample: SoilSample,
    constants: PhysicalConstants = DEFAULT_CONSTANTS,
    weighting=None,
    avg_space="log",
) -> float:
    """K_sat (cm/day) of one validated sample; needs height and diameter."""
    return explain(model, sample, constants, weighting, avg_space)[0]


def explain(model, sample, constants=DEFAULT_CONSTANTS, weighting=None, avg_space="log"):
    """(K_sat in cm/day, Prediction) for one sample."""
    pred = predict_log(model, FeatureVector.from_sample(sample, constants), weighting, avg_space)
    return 10.0**pred.value, pred


# -- bundle I/O ---------------------------------------------------------------


def _number(token, line, field):
    t = token.lower()
    if t in ("-inf", "+inf", "inf"):
        raise ParseError(f"infinite value not allowed for {field}", line, field)
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"expected a number for {field}, got {token!r}", line, field) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value for {field}", line, field)
    return value


def _bound(token, line, field, infinite):
    if token.lower() == infinite:
        return None
    return _number(token, line, field)


def _tokens(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def load_bundle(text: str) -> CpxrModel:
    """Parse a bundle document into an immutable CpxrModel."""
    header = {}
    baseline = None
    entries = []
    lines = list(_tokens(text))
    i = 0

    def coefficient_block(start_kw):
        nonlocal i
        intercept = None
        coefs = []
        while i < len(lines):
            lineno, toks = lines[i]
            i += 1
            if toks[0] == "end":
                if len(toks) != 1:
                    raise ParseError("'end' takes no arguments", lineno)
                if intercept is None:
                    raise ParseError(f"{start_kw} block has no intercept", lineno, "intercept")
                return LinearModel(intercept, tuple(coefs))
            if len(toks) != 2:
                raise ParseError(f"expected '<name> <coefficient>', got {' '.join(toks)!r}", lineno)
            name, value = toks[0], _number(toks[1], lineno, toks[0])
            if name == "intercept":
                if intercept is not None:
                    raise ParseError("duplicate intercept", lineno, "intercept")
                intercept = value
            else:
                if name in (c for c, _ in coefs):
                    raise ParseError(f"duplicate coefficient {name!r}", lineno, name)
                coefs.append((name, value))
        raise ParseError(f"unterminated {start_kw} block (missing 'end')")

    while i < len(lines):
        lineno, toks = lines[i]
        kw = toks[0]
        if kw in ("format", "features", "output", "weighting"):
            if kw in header:
                raise ParseError(f"duplicate header field {kw!r}", lineno, kw)
            if baseline is not None or entries:
                raise ParseError(f"header field {kw!r} after model blocks", lineno, kw)
            if len(toks) < 2:
                raise ParseError(f"header field {kw!r} needs a value", lineno, kw)
            header[kw] = (lineno, toks[1:])
            i += 1
        elif kw == "baseline":
            if baseline is not None:
                raise ParseError("duplicate baseline block", lineno, "baseline")
            i += 1
            baseline = coefficient_block("baseline")
        elif kw == "pattern":
            if len(toks) != 2:
                raise ParseError("expected 'pattern <id>'", lineno, "pattern")
            try:
                pid = int(toks[1])
            except ValueError:
                raise ParseError(f"pattern id must be an integer, got {toks[1]!r}", lineno) from None
            i += 1
            fields = {}
            criteria = []
            section = "meta"
            local = None
            while i < len(lines):
                ln, t = lines[i]
                if t[0] == "pattern" or t[0] == "baseline":
                    break
                i += 1
                if t[0] == "criteria" and len(t) == 1:
                    section = "criteria"
                elif t[0] == "local" and len(t) == 1:
                    local = coefficient_block(f"pattern {pid} local")
                    break
                elif section == "meta" and t[0] in ("arr", "support") and len(t) == 2:
                    if t[0] in fields:
                        raise ParseError(f"duplicate {t[0]!r}", ln, t[0])
                    fields[t[0]] = _number(t[1], ln, t[0])
                elif section == "criteria" and len(t) == 3:
                    name = t[0]
                    lower = _bound(t[1], ln, name, "-inf")
                    upper = _bound(t[2], ln, name, "+inf")
                    try:
                        criteria.append((name, Interval(lower, upper)))
                    except SchemaError as exc:
                        raise SchemaError(f"line {ln}: pattern {pid} criterion {name}: {exc}") from None
                else:
                    raise ParseError(f"unexpected line in pattern {pid}: {' '.join(t)!r}", ln)
            if local is None:
                raise SchemaError(f"pattern {pid} has no paired local model")
            for key in ("arr", "support"):
                if key not in fields:
                    raise ParseError(f"pattern {pid} missing {key!r}", lineno, key)
            if fields["arr"] < 0:
                raise SchemaError(f"pattern {pid} arr must be >= 0")
            if not criteria:
                raise SchemaError(f"pattern {pid} has no criteria")
            entries.append((Pattern(pid, tuple(criteria), fields["arr"], fields["support"]), local))
        else:
            raise ParseError(f"unexpected keyword {kw!r}", lineno, kw)

    for key in ("format", "features"):
        if key not in header:
            raise ParseError(f"missing header field {key!r}", None, key)
    lineno, fmt = header["format"]
    if fmt != [BUNDLE_FORMAT, str(BUNDLE_VERSION)]:
        raise ParseError(f"unsupported format {' '.join(fmt)!r}", lineno, "format")
    features = tuple(header["features"][1])
    if len(set(features)) != len(features):
        raise SchemaError("duplicate feature names in header")
    weighting = Weighting.ARR
    if "weighting" in header:
        lineno, w = header["weighting"]
        try:
            weighting = Weighting(w[0])
        except ValueError:
            raise ParseError(f"unknown weighting {w[0]!r}", lineno, "weighting") from None
    output = " ".join(header["output"][1]) if "output" in header else "log10 ksat cm/day"
    if baseline is None:
        raise SchemaError("bundle has no baseline block")

    declared = set(features)
    ids = set()
    for p, lm in entries:
        if p.id in ids:
            raise SchemaError(f"duplicate pattern id {p.id}")
        ids.add(p.id)
        for name, _ in p.criteria:
            if name not in declared:
                raise SchemaError(f"pattern {p.id} criterion uses undeclared feature {name!r}")
        for name, _ in lm.coefficients:
            if name not in declared:
                raise SchemaError(f"pattern {p.id} local model uses undeclared feature {name!r}")
    for name, _ in baseline.coefficients:
        if name not in declared:
            raise SchemaError(f"baseline uses undeclared feature {name!r}")

    return CpxrModel(features, baseline, tuple(entries), weighting, output)


def dump_bundle(model: CpxrModel) -> str:
    """Serialize with shortest round-trip floats; load_bundle inverts it."""
    out = [
        f"format {BUNDLE_FORMAT} {BUNDLE_VERSION}",
        "features " + " ".join(model.feature_names),
        f"output {model.output}",
        f"weighting {model.weighting.value}",
        "",
    ]

    def coefs(lm):
        out.append(f"intercept {lm.intercept!r}")
        out.extend(f"{name} {c!r}" for name, c in lm.coefficients)
        out.append("end")

    out.append("baseline")
    coefs(model.baseline)
    for p, lm in model.entries:
        out += ["", f"pattern {p.id}", f"arr {p.arr!r}", f"support {p.support!r}", "criteria"]
        for name, iv in p.criteria:
            lo = "-inf" if iv.lower is None else repr(iv.lower)
            hi = "+inf" if iv.upper is None else repr(iv.upper)
            out.append(f"{name} {lo} {hi}")
        out.append("local")
        coefs(lm)
    return "\n".join(out) + "\n"


def bundle_text(name: str = DEFAULT_BUNDLE) -> str:
    return resources.files("ksatptf").joinpath("data").joinpath(name).read_text(encoding="utf-8")


@functools.lru_cache(maxsize=None)
def default_model() -> CpxrModel:
    """The shipped 14-pattern K_sat model."""
    return load_bundle(bundle_text())
