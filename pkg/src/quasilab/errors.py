"""Exception types raised across the package."""


class QuasilabError(Exception):
    """Base class for all package errors."""


class PoleOnPath(QuasilabError):
    pass


class OutsideDisk(QuasilabError):
    pass


class BoundaryPoint(QuasilabError):
    """A containment query landed within the geometric tolerance of the boundary."""


class InvalidPolyline(QuasilabError):
    pass


class ArcTooLong(QuasilabError):
    pass


class InvalidDomain(QuasilabError):
    pass


class NotSimple(QuasilabError):
    pass


class NotMarkov(QuasilabError):
    pass


class ExpandingViolation(QuasilabError):
    pass


class Inadmissible(QuasilabError):
    pass


class DeltaOutOfRange(QuasilabError):
    pass


class MaxStepsExceeded(QuasilabError):
    pass


class EmptyIntersection(QuasilabError):
    pass


class NotFound(QuasilabError):
    pass


class BasepointSwallowed(QuasilabError):
    pass


class NoPath(QuasilabError):
    pass


class Ineligible(QuasilabError):
    pass


class WindowEmpty(QuasilabError):
    pass


class InsufficientHits(QuasilabError):
    pass


class TooFewScales(QuasilabError):
    pass


class BudgetExceeded(QuasilabError):
    pass


class ConfigError(QuasilabError):
    """Invalid run configuration; carries the offending field and line when known."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field '{field}'")
        prefix = f"[{', '.join(loc)}] " if loc else ""
        super().__init__(prefix + message)
