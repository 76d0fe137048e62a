"""Exception hierarchy shared by all ioisac modules."""


class IoIsacError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(IoIsacError):
    """A config or data file could not be parsed."""


class ValidationError(IoIsacError):
    """A config invariant is violated; the message names the offending field."""


class DomainError(IoIsacError):
    """An argument is outside the documented domain of an operation."""


class DimensionError(IoIsacError):
    """Antenna counts are too small for the requested active set."""


class RankDeficient(IoIsacError):
    """A Gram matrix is numerically singular (degenerate channel geometry)."""


class Infeasible(IoIsacError):
    """No power allocation satisfies the sensing-SINR and budget constraints."""


class AllInfeasible(IoIsacError):
    """No activation vector admits a feasible power allocation."""


class ZeroRate(IoIsacError):
    """An active device has zero uplink rate; latency would be unbounded."""


class EmptySet(IoIsacError):
    """The active set is empty where at least one device is required."""


class SizeLimit(IoIsacError):
    """A brute-force oracle was asked for a problem above its hard size cap."""
