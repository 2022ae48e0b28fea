"""Exception hierarchy shared by every ksatptf module."""


class KsatError(Exception):
    """Base class for all library errors."""


class ValidationError(KsatError, ValueError):
    """A sample or input value violates a domain invariant.

    ``field`` and ``value`` name the offending input so callers (and the
    ingest diagnostics) can report it without parsing the message.
    """

    def __init__(self, message, field=None, value=None):
        super().__init__(message)
        self.field = field
        self.value = value

    @property
    def reason(self):
        return type(self).__name__


class TextureSumViolation(ValidationError):
    pass


class NonPositiveField(ValidationError):
    pass


class PercentOutOfRange(ValidationError):
    pass


class NonphysicalDensity(ValidationError):
    pass


class NotApplicable(ValidationError):
    pass


class MissingFeature(KsatError, KeyError):
    def __init__(self, feature):
        super().__init__(feature)
        self.feature = feature

    def __str__(self):
        return f"missing feature {self.feature!r}"


class ParseError(KsatError, ValueError):
    def __init__(self, message, line=None, field=None):
        loc = f"line {line}: " if line is not None else ""
        super().__init__(loc + message)
        self.line = line
        self.field = field


class SchemaError(KsatError, ValueError):
    pass


class EmptySeries(KsatError, ValueError):
    pass


class NonPositiveValue(KsatError, ValueError):
    pass


class EmptyDataset(KsatError, ValueError):
    pass


class EmptyGroup(KsatError, ValueError):
    pass


class FileError(KsatError, OSError):
    pass


class HeaderMismatch(KsatError, ValueError):
    def __init__(self, missing=(), unknown=()):
        self.missing = tuple(missing)
        self.unknown = tuple(unknown)
        parts = []
        if self.missing:
            parts.append("missing columns: " + ", ".join(self.missing))
        if self.unknown:
            parts.append("unknown columns: " + ", ".join(self.unknown))
        super().__init__("; ".join(parts) or "header mismatch")


class MissingMeasurement(ValidationError):
    pass
